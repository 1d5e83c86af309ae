"""Commutative presemifields and semifields from planar DO polynomials.

The presemifield product of a planar DO polynomial F is the symmetric
bilinear form x*y = F(x+y) - F(x) - F(y); unitalization picks a nonzero a,
transports along the bijection x -> x*a and has unit e = a*a.  Products are
never stored as q x q tables: multiplication by a constant is a linear map,
so everything here runs on O(n^2) precomputed map tables plus gathers.
"""

import numpy as np

from . import gf3linalg
from .planarfn import PlanarFn, is_planar_do


class SemifieldError(ValueError):
    pass


class Presemifield:
    """Product x *_F y = B_F(x, y) of a planar DO source polynomial."""

    def __init__(self, ctx, fn):
        self.ctx = ctx
        self.fn = fn
        self.slices = fn.slices()

    def mul(self, x, y):
        m = self._combo_cols(y)
        return gf3linalg.apply_map(self.ctx, m, x)

    def _combo_cols(self, y):
        # matrix of x -> B(x, y) as basis-image codes
        ctx = self.ctx
        acc = np.zeros((ctx.n, ctx.n), dtype=np.int64)
        k = 0
        while y:
            d = y % 3
            if d:
                acc += d * self.slices[k]
            y //= 3
            k += 1
        acc %= 3
        return gf3linalg.cols_from_mat(ctx, acc.astype(np.uint8))

    def mul_const_table(self, y):
        """Full table of the linear map x -> x * y."""
        return gf3linalg.map_table(self.ctx, self._combo_cols(y))


def presemifield_from(fn):
    """Presemifield of a planar DO polynomial; rejects anything else."""
    if not fn.is_do():
        raise SemifieldError("source is not a DO polynomial")
    if not is_planar_do(fn):
        raise SemifieldError("source DO polynomial is not planar")
    return Presemifield(fn.ctx, fn)


class Semifield:
    """Unitalized commutative semifield (F_q, +, *) with unit e = a *_F a."""

    def __init__(self, ps, a):
        if a == 0:
            raise SemifieldError("unitalization element must be nonzero")
        ctx = ps.ctx
        self.ctx = ctx
        self.ps = ps
        self.a = a
        phi = ps.mul_const_table(a)  # x -> x *_F a, bijective by planarity
        psi = np.zeros(ctx.q, dtype=np.int64)
        psi[phi] = np.arange(ctx.q, dtype=np.int64)
        self.phi, self.psi = phi, psi
        self.unit = ps.mul(a, a)
        # digit tensor of the unitalized product on basis pairs
        n = ctx.n
        bp = np.zeros((n, n), dtype=np.int64)
        for i in range(n):
            for j in range(i + 1):
                v = self.mul(3**i, 3**j)
                bp[i, j] = bp[j, i] = v
        self._basis_products = bp
        self._basis_tables = None

    def mul(self, x, y):
        return self.ps.mul(int(self.psi[x]), int(self.psi[y]))

    def mul_const_table(self, y):
        t = self.ps.mul_const_table(int(self.psi[y]))
        return t[self.psi]

    def basis_tables(self):
        """Tables of x -> x * alpha^k for the n basis elements."""
        if self._basis_tables is None:
            self._basis_tables = [self.mul_const_table(3**k) for k in range(self.ctx.n)]
        return self._basis_tables

    def mul_vec(self, X, Y):
        """Elementwise product of two code arrays."""
        ctx = self.ctx
        n = ctx.n
        Xd = np.zeros((len(X), n), dtype=np.int64)
        Yd = np.zeros((len(Y), n), dtype=np.int64)
        tx, ty = np.asarray(X), np.asarray(Y)
        for k in range(n):
            Xd[:, k] = tx % 3
            Yd[:, k] = ty % 3
            tx = tx // 3
            ty = ty // 3
        BPd = np.zeros((n, n, n), dtype=np.int64)
        t = self._basis_products.copy()
        for k in range(n):
            BPd[:, :, k] = t % 3
            t = t // 3
        outd = np.einsum("ti,tj,ijd->td", Xd, Yd, BPd) % 3
        pw = 3 ** np.arange(n, dtype=np.int64)
        return outd @ pw


def unitalize(ps, a=1):
    return Semifield(ps, a)


class NucleiProfile:
    def __init__(self, nucleus_set, middle_set):
        self.nucleus_set = nucleus_set
        self.middle_set = middle_set
        self.nucleus_order = len(nucleus_set)
        self.middle_order = len(middle_set)

    def orders(self):
        return (self.nucleus_order, self.middle_order)

    def __repr__(self):
        return f"NucleiProfile(|N|={self.nucleus_order}, |Nm|={self.middle_order})"


def nuclei(sf):
    """Nucleus and middle nucleus of a commutative semifield.

    Both associativity conditions are biadditive in the two swept arguments,
    so checking the n^2 basis pairs suffices.  With M_k the table of
    multiplication by the basis element b_k and P_ij = b_i * b_j:
      middle:  (b_i * a) * b_j = b_i * (a * b_j)   <=>  M_j[M_i[a]] = M_i[M_j[a]]
      nucleus: (a * b_i) * b_j = a * (b_i * b_j)   <=>  M_j[M_i[a]] = T_Pij[a]
    """
    ctx = sf.ctx
    n = ctx.n
    M = sf.basis_tables()
    mid = np.ones(ctx.q, dtype=bool)
    nuc = np.ones(ctx.q, dtype=bool)
    for i in range(n):
        Mi = M[i]
        for j in range(i + 1, n):
            mid &= M[j][Mi] == Mi[M[j]]
    for i in range(n):
        Mi = M[i]
        for j in range(n):
            lhs = M[j][Mi]
            nuc &= lhs == sf.mul_const_table(int(sf._basis_products[i, j]))
    nucleus_set = set(int(v) for v in np.flatnonzero(nuc))
    middle_set = set(int(v) for v in np.flatnonzero(mid))
    if not nucleus_set <= middle_set:
        raise SemifieldError("nucleus escaped the middle nucleus; product is broken")
    return NucleiProfile(nucleus_set, middle_set)


def nm_structure(sf, profile=None):
    """Star-squares of N_m, and one representative per coset b * N^* with
    b in N_m \\ N (all such cosets have exactly |N| - 1 elements, so there are
    (|Nm| - |N|) / (|N| - 1) of them).  Sweep order: ascending discrete log."""
    if profile is None:
        profile = nuclei(sf)
    ctx = sf.ctx
    nuc = profile.nucleus_set
    mid = profile.middle_set
    squares = {sf.mul(b, b) for b in mid}
    outside = [b for b in mid if b not in nuc and b != 0]
    outside.sort(key=lambda b: ctx.log_table[b])
    reps, covered = [], set()
    for b in outside:
        if b in covered:
            continue
        reps.append(b)
        for g in nuc:
            if g:
                covered.add(sf.mul(g, b))
    return squares, reps
