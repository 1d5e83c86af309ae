"""GF(3) linear algebra on element codes.

A linear map GF(3)^n -> GF(3)^n is represented by its n basis-image codes
(column i = image of the basis element with code 3^i).  Matrices handed to
the batched routines are uint8 numpy arrays with entries in {0,1,2}.
"""

import numpy as np


def digit(code, k):
    return (code // 3**k) % 3


def code_to_vec(ctx, code):
    return np.array(ctx.digits(code), dtype=np.uint8)


def mat_from_cols(ctx, cols):
    """n x n uint8 matrix whose column i is the digit vector of cols[i]."""
    n = ctx.n
    m = np.zeros((n, n), dtype=np.uint8)
    for i, c in enumerate(cols):
        m[:, i] = ctx.digits(c)
    return m


def cols_from_mat(ctx, m):
    return [ctx.from_digits(list(m[:, i])) for i in range(ctx.n)]


def apply_map(ctx, cols, x):
    """Apply the linear map given by basis images to a single code."""
    acc = 0
    i = 0
    while x:
        d = x % 3
        if d == 1:
            acc = ctx.add(acc, cols[i])
        elif d == 2:
            acc = ctx.add(acc, ctx.add(cols[i], cols[i]))
        x //= 3
        i += 1
    return acc


def map_table(ctx, cols):
    """Full table of the linear map over all q codes, built span by span."""
    q = ctx.q
    T = np.zeros(q, dtype=np.int64)
    for i in range(ctx.n):
        blk = T[: 3**i]
        c = cols[i]
        T[3**i : 2 * 3**i] = ctx.vadd(blk, c)
        T[2 * 3**i : 3 ** (i + 1)] = ctx.vadd(blk, ctx.add(c, c))
    return T


def rank_of_cols(ctx, cols):
    pivots = []  # (pivot position, reduced code with pivot digit 1)
    for v in cols:
        for p, w in pivots:
            d = digit(v, p)
            if d:
                # subtract d*w; w is normalized so this clears the digit
                v = ctx.add(v, ctx.smul(3 - d, w))
        if v:
            p = 0
            while digit(v, p) == 0:
                p += 1
            if digit(v, p) == 2:
                v = ctx.add(v, v)
            pivots.append((p, v))
    return len(pivots)


def is_permutation_map(ctx, cols):
    return rank_of_cols(ctx, cols) == ctx.n


def invert_map(ctx, cols):
    """Basis images of the inverse map; raises if singular."""
    n = ctx.n
    rows = [(cols[i], 3**i) for i in range(n)]  # (image, preimage) pairs
    pivots = []
    for v, w in rows:
        for p, pv, pw in pivots:
            d = digit(v, p)
            if d:
                v = ctx.add(v, ctx.smul(3 - d, pv))
                w = ctx.add(w, ctx.smul(3 - d, pw))
        if v == 0:
            raise ValueError("map is singular")
        p = 0
        while digit(v, p) == 0:
            p += 1
        if digit(v, p) == 2:  # scale row by 2 so the pivot digit becomes 1
            v = ctx.add(v, v)
            w = ctx.add(w, w)
        pivots.append((p, v, w))
    # back-substitute so each pivot column is clean
    out = [0] * n
    for i in range(len(pivots) - 1, -1, -1):
        p, v, w = pivots[i]
        for j in range(i):
            pj, vj, wj = pivots[j]
            d = digit(vj, p)
            if d:
                vj = ctx.add(vj, ctx.smul(3 - d, v))
                wj = ctx.add(wj, ctx.smul(3 - d, w))
                pivots[j] = (pj, vj, wj)
        out[p] = w
    return out


def solve_upper(ctx, pairs):
    """Consistent-extension solver used in tests: given (input, output) pairs
    of a supposed linear map, return basis images or None if inconsistent."""
    n = ctx.n
    pivots = []
    for v, w in pairs:
        for p, pv, pw in pivots:
            d = digit(v, p)
            if d:
                v = ctx.add(v, ctx.smul(3 - d, pv))
                w = ctx.add(w, ctx.smul(3 - d, pw))
        if v == 0:
            if w != 0:
                return None
            continue
        p = 0
        while digit(v, p) == 0:
            p += 1
        if digit(v, p) == 2:
            v = ctx.add(v, v)
            w = ctx.add(w, w)
        pivots.append((p, v, w))
    if len(pivots) < n:
        return None
    for i in range(len(pivots) - 1, -1, -1):
        p, v, w = pivots[i]
        for j in range(i):
            pj, vj, wj = pivots[j]
            d = digit(vj, p)
            if d:
                pivots[j] = (pj, ctx.add(vj, ctx.smul(3 - d, v)), ctx.add(wj, ctx.smul(3 - d, w)))
    out = [0] * n
    for p, v, w in pivots:
        out[p] = w
    return out


def random_linear_permutation(ctx, rng):
    """Uniformly random element of GL(n, 3) as basis-image codes."""
    while True:
        cols = [int(rng.integers(1, ctx.q)) for _ in range(ctx.n)]
        if is_permutation_map(ctx, cols):
            return cols


def batched_nonsingular(mats):
    """Boolean array: which of the (B, n, n) GF(3) matrices are nonsingular."""
    m = np.ascontiguousarray(mats, dtype=np.uint8).copy()
    B, n, _ = m.shape
    ok = np.ones(B, dtype=bool)
    idx = np.arange(B)
    for k in range(n):
        sub = m[:, k:, k]
        has = sub != 0
        piv = np.argmax(has, axis=1)
        ok &= has[idx, piv]
        pr = k + piv
        rows_k = m[idx, k].copy()
        m[idx, k] = m[idx, pr]
        m[idx, pr] = rows_k
        pv = m[:, k, k]
        m[:, k, :] = (m[:, k, :] * pv[:, None]) % 3  # inverse of 1,2 is itself
        below = m[:, k + 1 :, k]
        m[:, k + 1 :, :] = (m[:, k + 1 :, :] + ((3 - below) % 3)[:, :, None] * m[:, k : k + 1, :]) % 3
    return ok


def rank_uint8(mat):
    """Rank of one small GF(3) matrix (reference implementation)."""
    m = np.array(mat, dtype=np.int64) % 3
    rows, cols = m.shape
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if m[i, c]:
                piv = i
                break
        if piv is None:
            continue
        m[[r, piv]] = m[[piv, r]]
        m[r] = (m[r] * m[r, c]) % 3
        for i in range(rows):
            if i != r and m[i, c]:
                m[i] = (m[i] + (3 - m[i, c]) * m[r]) % 3
        r += 1
    return r
