"""Exact arithmetic in GF(3^n) for 1 <= n <= 12.

Elements are integer codes in [0, q) whose base-3 digits are the coordinates
in the power basis 1, a, ..., a^(n-1), where a is the primitive root of the
embedded degree-n Conway polynomial over GF(3).  Addition is digit-wise mod 3
(no carries), multiplication goes through log/antilog tables, so codes are
directly usable as table indices everywhere downstream.
"""

import functools
import re

import numpy as np

P = 3
MAX_N = 12

# Conway polynomials over GF(3), ascending coefficients, degree n = index.
# Recomputable from the definition; see conway_polynomial() below.
CONWAY = {
    1: (1, 1),
    2: (2, 2, 1),
    3: (1, 2, 0, 1),
    4: (2, 0, 0, 2, 1),
    5: (1, 2, 0, 0, 0, 1),
    6: (2, 2, 1, 0, 2, 0, 1),
    7: (1, 0, 2, 0, 0, 0, 0, 1),
    8: (2, 2, 2, 0, 1, 2, 0, 0, 1),
    9: (1, 1, 2, 2, 0, 0, 0, 0, 0, 1),
    10: (2, 1, 0, 0, 2, 2, 2, 0, 0, 0, 1),
    11: (1, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    12: (2, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0, 0, 1),
}


class FieldError(ValueError):
    pass


class FieldCtx:
    """Immutable arithmetic context for GF(3^n).

    All operations are pure; a context can be shared freely across workers.
    """

    def __init__(self, n):
        if not (1 <= n <= MAX_N):
            raise FieldError(f"extension degree must be in [1, {MAX_N}], got {n}")
        self.n = n
        self.q = P**n
        self.modulus = CONWAY[n]
        q = self.q

        # small digit-wise addition table on 3^h codes, h = ceil(n/2)
        h = (n + 1) // 2
        self._H = H = P**h
        small = np.zeros((H, H), dtype=np.int64)
        for a in range(H):
            for b in range(H):
                s, pa, pb, pw = 0, a, b, 1
                for _ in range(h):
                    s += ((pa + pb) % P) * pw
                    pa //= P
                    pb //= P
                    pw *= P
                small[a, b] = s
        self._small = small
        self._small_list = small.tolist()

        # log/antilog tables; exp is doubled so mul never needs a reduction
        exp = np.zeros(2 * (q - 1), dtype=np.int64)
        log = np.full(q, -1, dtype=np.int64)
        red = [self._digit_scale(self._top_reduction(), t) for t in (1, 2)]
        x = 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            hi, lo = divmod(x, P ** (n - 1))
            x = lo * P
            if hi:
                x = self.add(x, red[hi - 1])
        if x != 1:
            raise FieldError(f"modulus for n={n} is not primitive")
        exp[q - 1 :] = exp[: q - 1]
        self.exp_table = exp
        self.log_table = log
        self._exp_list = exp.tolist()
        self._log_list = log.tolist()
        self.alpha = self._exp_list[1] if q > P else 2

    def _top_reduction(self):
        # code of x^n mod modulus = -(low-degree part)
        c = 0
        for i in range(self.n):
            c += ((-self.modulus[i]) % P) * P**i
        return c

    def _digit_scale(self, code, t):
        s, pw = 0, 1
        while code:
            s += (code % P * t % P) * pw
            code //= P
            pw *= P
        return s

    # -- scalar ops ------------------------------------------------------

    def add(self, a, b):
        H = self._H
        s = self._small_list
        return s[a % H][b % H] + H * s[a // H][b // H]

    def neg(self, a):
        return self.add(a, a)

    def sub(self, a, b):
        return self.add(a, self.add(b, b))

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return self._exp_list[self._log_list[a] + self._log_list[b]]

    def inv(self, a):
        if a == 0:
            raise FieldError("inversion of zero")
        return self._exp_list[self.q - 1 - self._log_list[a]]

    def pow(self, a, e):
        if a == 0:
            if e <= 0:
                raise FieldError("0 cannot be raised to a non-positive power")
            return 0
        return self._exp_list[(self._log_list[a] * e) % (self.q - 1)]

    def smul(self, c, a):
        # scalar c in {0,1,2} times element a
        if c == 0:
            return 0
        if c == 1:
            return a
        return self.add(a, a)

    def frobenius(self, a, i=1):
        return self.pow(a, P ** (i % self.n)) if a else 0

    def trace(self, x, k=1):
        """Trace of GF(3^n) onto the subfield GF(3^k); additive in x."""
        if self.n % k:
            raise FieldError(f"k={k} does not divide n={self.n}")
        acc = 0
        for j in range(0, self.n, k):
            acc = self.add(acc, self.frobenius(x, j))
        return acc

    def subfield_elements(self, m):
        """All codes of the subfield GF(3^m) inside GF(3^n)."""
        if self.n % m:
            raise FieldError(f"m={m} does not divide n={self.n}")
        step = (self.q - 1) // (P**m - 1)
        elems = {0}
        for i in range(P**m - 1):
            elems.add(self._exp_list[i * step])
        return elems

    def is_square(self, a):
        if a == 0:
            return True
        return self._log_list[a] % 2 == 0

    def digits(self, a):
        d = []
        for _ in range(self.n):
            d.append(a % P)
            a //= P
        return d

    def from_digits(self, d):
        c = 0
        for i, v in enumerate(d):
            c += (int(v) % P) * P**i
        return c

    # -- vectorized ops on numpy arrays of codes --------------------------

    def vadd(self, a, b):
        H = self._H
        return self._small[a % H, b % H] + H * self._small[a // H, b // H]

    def vneg(self, a):
        return self.vadd(a, a)

    def vsub(self, a, b):
        return self.vadd(a, self.vadd(b, b))

    def vmul(self, a, b):
        out = self.exp_table[self.log_table[a] + self.log_table[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def all_codes(self):
        return np.arange(self.q, dtype=np.int64)

    # -- element text syntax ----------------------------------------------

    def parse_element(self, text):
        """Parse `0`, a decimal code, `g`, or `g^k` into a code."""
        t = text.strip()
        if t == "0":
            return 0
        if t == "g":
            return self.alpha
        m = re.fullmatch(r"g\^(\d+)", t)
        if m:
            return self._exp_list[int(m.group(1)) % (self.q - 1)]
        if t.isdigit():
            c = int(t)
            if c >= self.q:
                raise FieldError(f"element code {c} out of range for q={self.q}")
            return c
        raise FieldError(f"cannot parse field element {text!r}")

    def format_element(self, a):
        if a == 0:
            return "0"
        return f"g^{self._log_list[a]}"


@functools.lru_cache(maxsize=None)
def make_field(n):
    """Context for GF(3^n); cached, contexts are immutable."""
    return FieldCtx(n)


# -- Conway polynomial recomputation (test oracle) -------------------------


def _poly_mulmod(a, b, f):
    n = len(f) - 1
    res = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                res[i + j] = (res[i + j] + ai * bj) % P
    for i in range(len(res) - 1, n - 1, -1):
        c = res[i]
        if c:
            res[i] = 0
            for j in range(n):
                res[i - n + j] = (res[i - n + j] - c * f[j]) % P
    res = res[:n]
    while len(res) > 1 and res[-1] == 0:
        res.pop()
    return res


def _poly_powmod(a, e, f):
    result, base = [1], list(a)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, f)
        base = _poly_mulmod(base, base, f)
        e >>= 1
    return result


def _prime_factors(m):
    out, d = [], 2
    while d * d <= m:
        if m % d == 0:
            out.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        out.append(m)
    return out


def _x_is_primitive(f, n):
    q1 = P**n - 1
    if _poly_powmod([0, 1], q1, f) != [1]:
        return False
    return all(_poly_powmod([0, 1], q1 // r, f) != [1] for r in _prime_factors(q1))


def _norm_compatible(f, n, smaller):
    for m, g in smaller.items():
        if n % m or m >= n:
            continue
        t = (P**n - 1) // (P**m - 1)
        y = _poly_powmod([0, 1], t, f)
        acc, ypow = [0], [1]
        for c in g:
            if c:
                term = [(c * v) % P for v in ypow]
                L = max(len(acc), len(term))
                acc = [
                    ((acc[i] if i < len(acc) else 0) + (term[i] if i < len(term) else 0)) % P
                    for i in range(L)
                ]
            ypow = _poly_mulmod(ypow, y, f)
        while len(acc) > 1 and acc[-1] == 0:
            acc.pop()
        if acc != [0]:
            return False
    return True


def conway_polynomial(n, smaller=None):
    """Degree-n Conway polynomial over GF(3), recomputed from the definition.

    Candidates are scanned in the standard word order: f = x^n + a_{n-1}x^{n-1}
    + ... + a_0 maps to the word (c_{n-1},...,c_0) with c_i = (-1)^(n-i) a_i,
    compared lexicographically.  The first primitive, norm-compatible candidate
    wins.
    """
    if smaller is None:
        smaller = {m: list(CONWAY[m]) for m in range(1, n) if n % m == 0}
    from itertools import product

    for word in product(range(P), repeat=n):
        coeffs = [0] * (n + 1)
        coeffs[n] = 1
        for k, c in enumerate(word):
            i = n - 1 - k
            coeffs[i] = (c * (-1) ** (n - i)) % P
        if coeffs[0] == 0:
            continue
        if _x_is_primitive(coeffs, n) and _norm_compatible(coeffs, n, smaller):
            return tuple(coeffs)
    raise FieldError(f"no Conway polynomial found for n={n}")
