"""Linear equivalence of planar DO polynomials, right-orbit invariants,
catalogs, and the invariant-gated classification pipeline.

The witness search exploits the bilinear structure of planar DO polynomials.
For any witness L1 o F o L2 = G one has B_G(x,y) = L1(B_F(L2 x, L2 y)); with
v1 = L2(1) this pins L1 = B_G(1,.) o L2^{-1} o B_F(v1,.)^{-1}, reducing the
search to a single-map condition F' o L2 = L2 o G' with F' = B_F(v1,.)^{-1} o F
and G' = B_G(1,.)^{-1} o G.  Assigning one basis image triggers a cascade:
every point x entering the span of L2's domain forces the derived value
L2(G'(x)) = F'(L2(x)), which either contradicts (prune) or extends the span
(more forced values).  Guessing happens only when the cascade saturates, so
the tree over basis assignments is complete and usually tiny.
"""

from collections import Counter

import numpy as np

from . import gf3linalg
from .planarfn import (
    PlanarFn,
    canonicalize,
    cyclotomic_equivalent,
    format_fn,
    is_planar,
    parse_fn,
)
from .field3 import make_field

ORBIT_DEFAULT_MAX_N = 7  # complete self-equivalence enumeration above this is gated


class EquivalenceError(ValueError):
    pass


class LinearMap:
    """Linear map given by images of the power basis; table cached."""

    def __init__(self, ctx, cols):
        self.ctx = ctx
        self.cols = tuple(int(c) for c in cols)
        self._table = None

    def table(self):
        if self._table is None:
            self._table = gf3linalg.map_table(self.ctx, self.cols)
        return self._table

    def __call__(self, x):
        return int(self.table()[x])

    def is_permutation(self):
        return gf3linalg.is_permutation_map(self.ctx, self.cols)

    def inverse(self):
        return LinearMap(self.ctx, gf3linalg.invert_map(self.ctx, self.cols))

    def compose(self, other):
        # self after other
        t = self.table()
        return LinearMap(self.ctx, [int(t[c]) for c in other.cols])

    @classmethod
    def identity(cls, ctx):
        return cls(ctx, [3**k for k in range(ctx.n)])

    @classmethod
    def random(cls, ctx, rng):
        return cls(ctx, gf3linalg.random_linear_permutation(ctx, rng))

    def __repr__(self):
        return f"LinearMap(n={self.ctx.n}, cols={self.cols})"


def verify_witness(F, G, L1, L2):
    """Exact replay: L1(F(L2(x))) == G(x) on all q inputs."""
    TF, TG = F.table(), G.table()
    return bool(np.array_equal(L1.table()[TF[L2.table()]], TG))


def _require_planar_do(fn, what):
    if not fn.is_do():
        raise EquivalenceError(f"{what} is not a DO polynomial")
    if not is_planar(fn):
        raise EquivalenceError(f"{what} is not planar")


def _combo_cols(ctx, slices, direction):
    acc = np.zeros((ctx.n, ctx.n), dtype=np.int64)
    k = 0
    while direction:
        d = direction % 3
        if d:
            acc += d * slices[k]
        direction //= 3
        k += 1
    return gf3linalg.cols_from_mat(ctx, (acc % 3).astype(np.uint8))


class _Search:
    """Complete DFS over L2 candidates for L1 o F o L2 = G (planar DO pair).

    The hot loops run on flat python lists with paged addition lookups and
    everything inlined; this is the kernel every classification, orbit and
    split computation sits on.  Witnesses come in mirror pairs (L1, +-L2)
    because F(-x) = F(x), so only anchors v1 = L2(1) whose lowest nonzero
    digit is 1 are searched; callers re-emit the mirror.
    """

    MAX_Z0_TRIES = 40

    def __init__(self, F, G):
        ctx = F.ctx
        self.ctx = ctx
        self.q = ctx.q
        self.n = ctx.n
        self.TF = F.table().tolist()
        self.TFa = F.table()
        self.TGa = G.table()
        self.SF = F.slices()
        ng_cols = _combo_cols(ctx, G.slices(), 1)
        self.ng_cols = ng_cols
        ng_inv = gf3linalg.invert_map(ctx, ng_cols)
        self.Gp = gf3linalg.map_table(ctx, ng_inv)[self.TGa].tolist()
        self.pow3 = [3**k for k in range(self.n)]
        self.inv_nf = None

    def run(self, on_witness, half=True):
        """Visit every witness whose anchor image lies in the searched half
        (every witness when half=False); on_witness returning False stops.

        Dispatch: the vectorized value-program path when some guess point
        closes the whole domain (the usual case), else the scalar DFS."""
        if self.q >= 27:
            z0 = self._full_closure_z0()
            if z0 is not None:
                return self._run_vectorized(on_witness, z0, half)
        return self.run_scalar(on_witness, half)

    # -- vectorized path --------------------------------------------------

    def _closure_size(self, z0):
        """Domain-side cascade closure of span{1, z0} under G'."""
        ctx = self.ctx
        add = ctx.add
        Gp = self.Gp
        known = bytearray(self.q)
        known[0] = 1
        span = [1, 2]
        known[1] = known[2] = 1
        z2 = add(z0, z0)
        old = len(span)
        for p in (z0, z2):
            known[p] = 1
            span.append(p)
        for idx in range(old):
            for p in (add(span[idx], z0), add(span[idx], z2)):
                known[p] = 1
                span.append(p)
        i = old
        while i < len(span):
            t = Gp[span[i]]
            i += 1
            if known[t]:
                continue
            old2 = len(span)
            t2 = add(t, t)
            known[t] = known[t2] = 1
            span.append(t)
            span.append(t2)
            for idx in range(old2):
                for u in (add(span[idx], t), add(span[idx], t2)):
                    known[u] = 1
                    span.append(u)
        return len(span)

    def _full_closure_z0(self):
        tried = 0
        for z0 in range(3, self.q):
            if z0 in (1, 2):
                continue
            if self._closure_size(z0) == self.q - 1:
                return z0
            tried += 1
            if tried >= self.MAX_Z0_TRIES:
                break
        return None

    def _build_program(self, z0):
        """Straight-line value program of the (v1, w) cascade at guess point
        z0.  The domain trajectory is value-independent, so one program serves
        every lane; ops act on value slots:
          ("add", dst, a, b)   val[dst] = val[a] + val[b]
          ("derive", dst, x)   val[dst] = F'(val[x])
          ("check", t, x)      kill lanes with F'(val[x]) != val[t]
        Slot/op order mirrors the scalar cascade exactly."""
        ctx = self.ctx
        add = ctx.add
        Gp = self.Gp
        slot = [-1] * self.q
        pts = []
        ops = []

        def new_slot(p):
            slot[p] = len(pts)
            pts.append(p)
            return slot[p]

        new_slot(1)
        new_slot(2)
        z2 = add(z0, z0)
        old = len(pts)
        sz = new_slot(z0)
        sz2 = new_slot(z2)
        ops.append(("add", sz2, sz, sz))
        for idx in range(old):
            s = pts[idx]
            ops.append(("add", new_slot(add(s, z0)), slot[s], sz))
            ops.append(("add", new_slot(add(s, z2)), slot[s], sz2))
        i = old
        while i < len(pts):
            x = pts[i]
            i += 1
            t = Gp[x]
            if slot[t] >= 0:
                ops.append(("check", slot[t], slot[x]))
            else:
                old2 = len(pts)
                st = new_slot(t)
                ops.append(("derive", st, slot[x]))
                st2 = new_slot(add(t, t))
                ops.append(("add", st2, st, st))
                for idx in range(old2):
                    s = pts[idx]
                    ops.append(("add", new_slot(add(s, t)), slot[s], st))
                    ops.append(("add", new_slot(add(s, add(t, t))), slot[s], st2))
        if len(pts) != self.q - 1:
            raise EquivalenceError("internal error: program built without full closure")
        return pts, ops

    def _run_vectorized(self, on_witness, z0, half):
        ctx = self.ctx
        q = self.q
        pts, ops = self._build_program(z0)
        vadd = ctx.vadd
        add = ctx.add
        nslots = len(pts)
        lanes0 = np.arange(1, q, dtype=np.int64)
        for v1 in range(1, q):
            if half:
                tv = v1
                while tv % 3 == 0:
                    tv //= 3
                if tv % 3 != 1:
                    continue
            inv_cols = gf3linalg.invert_map(ctx, _combo_cols(ctx, self.SF, v1))
            fp = gf3linalg.map_table(ctx, inv_cols)[self.TFa]  # F' value table
            val = [None] * nslots
            val[0] = v1
            val[1] = add(v1, v1)
            val[2] = lanes0
            lanes = lanes0
            for op in ops:
                kind = op[0]
                if kind == "add":
                    _, dst, a, b = op
                    va, vb = val[a], val[b]
                    if isinstance(va, int) and isinstance(vb, int):
                        val[dst] = add(va, vb)
                    else:
                        val[dst] = vadd(va, vb)
                elif kind == "derive":
                    _, dst, x = op
                    vx = val[x]
                    val[dst] = int(fp[vx]) if isinstance(vx, int) else fp[vx]
                else:  # check
                    _, t, x = op
                    vx, vt = val[x], val[t]
                    lhs = fp[vx] if not isinstance(vx, int) else int(fp[vx])
                    if isinstance(lhs, int) and isinstance(vt, int):
                        if lhs != vt:
                            lanes = lanes0[:0]
                            break
                        continue
                    mask = np.equal(lhs, vt)
                    if mask.all():
                        continue
                    if not mask.any():
                        lanes = lanes0[:0]
                        break
                    lanes = lanes[mask]
                    for s in range(nslots):
                        vs = val[s]
                        if vs is not None and not isinstance(vs, int):
                            val[s] = vs[mask]
            if len(lanes) == 0:
                continue
            # surviving lanes: rebuild known[], filter singular L2, emit
            self.inv_nf = inv_cols
            for li in range(len(lanes)):
                known = [-1] * q
                for s in range(nslots):
                    vs = val[s]
                    known[pts[s]] = vs if isinstance(vs, int) else int(vs[li])
                l2t = np.array(known, dtype=np.int64)
                l2t[0] = 0
                if np.unique(l2t).size != q:
                    continue  # injectivity is not enforced lane-wise; filter here
                if not self._emit_leaf(on_witness, known, inv_cols):
                    return

    def _emit_leaf(self, on_witness, known, inv_cols):
        ctx = self.ctx
        q = self.q
        inv_known = [0] * q
        for x in range(1, q):
            inv_known[known[x]] = x
        l1_cols = []
        for k in range(self.n):
            t1 = gf3linalg.apply_map(ctx, inv_cols, self.pow3[k])
            l1_cols.append(gf3linalg.apply_map(ctx, self.ng_cols, inv_known[t1]))
        l2t = np.array(known, dtype=np.int64)
        l2t[0] = 0
        l1t = gf3linalg.map_table(ctx, l1_cols)
        if not np.array_equal(l1t[self.TFa[l2t]], self.TGa):
            raise EquivalenceError("internal error: leaf failed witness replay")
        l2_cols = [known[b] for b in self.pow3]
        return on_witness(l1_cols, l2_cols, known)

    # -- scalar fallback ---------------------------------------------------

    def run_scalar(self, on_witness, half=True):
        """Visit every witness with anchor in the searched half (all of them
        when half=False); on_witness returning False stops the search."""
        ctx = self.ctx
        q = self.q
        H = ctx._H
        lo = ctx._small.ravel().tolist()          # (a%H, b%H) page
        hi = (ctx._small * H).ravel().tolist()    # (a//H, b//H) page, pre-scaled
        TF, Gp, p3 = self.TF, self.Gp, self.pow3
        known = [-1] * q
        span = []
        imgp, img1, img2 = [], [], []
        inv_nf = [0] * self.n
        inv_nf2 = [0] * self.n
        nloc = self.n

        def assign(z, w):
            """Set L2(z) = w, materialize the span, run the forced cascade.
            Returns False on contradiction (caller restores state)."""
            v = w
            for t in range(len(imgp)):
                d = v // p3[imgp[t]] % 3
                if d == 1:
                    b = img2[t]
                    v = lo[v % H * H + b % H] + hi[v // H * H + b // H]
                elif d == 2:
                    b = img1[t]
                    v = lo[v % H * H + b % H] + hi[v // H * H + b // H]
            if v == 0:
                return False
            p = 0
            while v // p3[p] % 3 == 0:
                p += 1
            if v // p3[p] % 3 == 2:
                v = lo[v % H * H + v % H] + hi[v // H * H + v // H]
            imgp.append(p)
            img1.append(v)
            img2.append(lo[v % H * H + v % H] + hi[v // H * H + v // H])
            old = len(span)
            z2 = lo[z % H * H + z % H] + hi[z // H * H + z // H]
            w2 = lo[w % H * H + w % H] + hi[w // H * H + w // H]
            known[z] = w
            known[z2] = w2
            span.append(z)
            span.append(z2)
            for idx in range(old):
                s = span[idx]
                ks = known[s]
                u = lo[s % H * H + z % H] + hi[s // H * H + z // H]
                known[u] = lo[ks % H * H + w % H] + hi[ks // H * H + w // H]
                span.append(u)
                u = lo[s % H * H + z2 % H] + hi[s // H * H + z2 // H]
                known[u] = lo[ks % H * H + w2 % H] + hi[ks // H * H + w2 // H]
                span.append(u)
            # cascade over every span point not yet processed in this branch
            i = old
            while i < len(span):
                x = span[i]
                i += 1
                y = TF[known[x]]
                acc = 0
                k = 0
                while y:
                    d = y % 3
                    if d:
                        b = inv_nf[k] if d == 1 else inv_nf2[k]
                        acc = lo[acc % H * H + b % H] + hi[acc // H * H + b // H]
                    y //= 3
                    k += 1
                t = Gp[x]
                kt = known[t]
                if kt >= 0:
                    if kt != acc:
                        return False
                    continue
                # derived pair (t, acc): image-echelon check, then extend
                v = acc
                for tt in range(len(imgp)):
                    d = v // p3[imgp[tt]] % 3
                    if d == 1:
                        b = img2[tt]
                        v = lo[v % H * H + b % H] + hi[v // H * H + b // H]
                    elif d == 2:
                        b = img1[tt]
                        v = lo[v % H * H + b % H] + hi[v // H * H + b // H]
                if v == 0:
                    return False
                p = 0
                while v // p3[p] % 3 == 0:
                    p += 1
                if v // p3[p] % 3 == 2:
                    v = lo[v % H * H + v % H] + hi[v // H * H + v // H]
                imgp.append(p)
                img1.append(v)
                img2.append(lo[v % H * H + v % H] + hi[v // H * H + v // H])
                old2 = len(span)
                t2 = lo[t % H * H + t % H] + hi[t // H * H + t // H]
                a2 = lo[acc % H * H + acc % H] + hi[acc // H * H + acc // H]
                known[t] = acc
                known[t2] = a2
                span.append(t)
                span.append(t2)
                for idx in range(old2):
                    s = span[idx]
                    ks = known[s]
                    u = lo[s % H * H + t % H] + hi[s // H * H + t // H]
                    known[u] = lo[ks % H * H + acc % H] + hi[ks // H * H + acc // H]
                    span.append(u)
                    u = lo[s % H * H + t2 % H] + hi[s // H * H + t2 // H]
                    known[u] = lo[ks % H * H + a2 % H] + hi[ks // H * H + a2 // H]
                    span.append(u)
            return True

        def leaf():
            inv_known = [0] * q
            for x in range(1, q):
                inv_known[known[x]] = x
            l1_cols = []
            for k in range(nloc):
                t1 = gf3linalg.apply_map(ctx, inv_nf, p3[k])
                l1_cols.append(gf3linalg.apply_map(ctx, self.ng_cols, inv_known[t1]))
            l2_cols = [known[b] for b in p3]
            # cascade constraints imply exact replay; assert to guard the engine
            l1t = gf3linalg.map_table(ctx, l1_cols)
            l2t = np.array(known, dtype=np.int64)
            l2t[0] = 0
            if not np.array_equal(l1t[np.asarray(self.TF)[l2t]], self.TGa):
                raise EquivalenceError("internal error: leaf failed witness replay")
            return on_witness(l1_cols, l2_cols, known)

        def dfs():
            if len(span) == q - 1:
                return leaf()
            z0 = 1
            while known[z0] >= 0:
                z0 += 1
            for w in range(1, q):
                sl, il = len(span), len(imgp)
                if assign(z0, w):
                    if not dfs():
                        return False
                for i2 in range(sl, len(span)):
                    known[span[i2]] = -1
                del span[sl:]
                del imgp[il:]
                del img1[il:]
                del img2[il:]
            return True

        for v1 in range(1, q):
            if half:
                tv = v1
                while tv % 3 == 0:
                    tv //= 3
                if tv % 3 != 1:
                    continue
            cols = _combo_cols(ctx, self.SF, v1)
            inv_cols = gf3linalg.invert_map(ctx, cols)
            for k in range(nloc):
                inv_nf[k] = inv_cols[k]
                inv_nf2[k] = ctx.add(inv_cols[k], inv_cols[k])
            self.inv_nf = inv_nf
            stop = False
            if assign(1, v1):
                stop = not dfs()  # dfs() is False only when on_witness said stop
            for i2 in range(len(span)):
                known[span[i2]] = -1
            del span[:]
            del imgp[:]
            del img1[:]
            del img2[:]
            if stop:
                return


def linear_equivalent(F, G, validate=True):
    """Witness (L1, L2) with L1 o F o L2 = G, or None if inequivalent.

    Complete over the assignment tree: a None answer certifies that no pair
    of linear permutations satisfies the relation.
    """
    if F.ctx is not G.ctx:
        raise EquivalenceError("operands live over different field contexts")
    if validate:
        _require_planar_do(F, "first operand")
        _require_planar_do(G, "second operand")
    F = canonicalize(F)
    G = canonicalize(G)
    if np.array_equal(F.table(), G.table()):
        ident = LinearMap.identity(F.ctx)
        return ident, ident
    found = []

    def grab(l1_cols, l2_cols, known):
        found.append((LinearMap(F.ctx, l1_cols), LinearMap(F.ctx, l2_cols)))
        return False  # stop at the first witness

    _Search(F, G).run(grab)
    return found[0] if found else None


def self_equivalences(F, limit=None, validate=True):
    """All linear self-equivalences (L1, L2) with L1 o F o L2 = F.

    The search visits one of each mirror pair (L1, +-L2); the mirror is
    emitted here (F is even, so both members replay identically)."""
    if validate:
        _require_planar_do(F, "operand")
    F = canonicalize(F)
    ctx = F.ctx
    out = []

    def grab(l1_cols, l2_cols, known):
        out.append((LinearMap(ctx, l1_cols), LinearMap(ctx, l2_cols)))
        out.append((LinearMap(ctx, l1_cols), LinearMap(ctx, [ctx.neg(c) for c in l2_cols])))
        return limit is None or len(out) < limit

    _Search(F, F).run(grab)
    return out


class OrbitData:
    """Partition of the nonzero codes under the L2 part of EQ(F, F)."""

    def __init__(self, ctx, orbits, group_order=None):
        self.ctx = ctx
        self.orbits = [tuple(sorted(o)) for o in orbits]
        self.orbits.sort(key=lambda o: (len(o), min(ctx.log_table[c] for c in o)))
        self.group_order = group_order

    def multiset(self):
        return tuple(sorted(Counter(len(o) for o in self.orbits).items()))

    def representatives(self):
        logs = [min(int(self.ctx.log_table[c]) for c in o) for o in self.orbits]
        return sorted(logs)

    def orbit_of(self, x):
        for o in self.orbits:
            if x in o:
                return o
        raise KeyError(x)


def multiset_text(ms):
    if ms is None:
        return "-"
    return ",".join(f"{size}^{mult}" if mult > 1 else f"{size}" for size, mult in ms)


def parse_multiset(text):
    text = text.strip()
    if text == "-":
        return None
    out = Counter()
    for piece in text.split(","):
        if "^" in piece:
            size, mult = piece.split("^")
            out[int(size)] += int(mult)
        else:
            out[int(piece)] += 1
    return tuple(sorted(out.items()))


def right_orbits(F, long_running=False):
    """Orbit partition and size multiset of the right self-equivalence orbits.

    Monomials short-circuit: the scalar maps x -> cx are always L2 parts of
    self-equivalences of c x^d (with L1 a matching scalar), and they act
    transitively, so the partition is the single orbit of all nonzero codes.
    Everything else runs the complete self-equivalence enumeration, with a
    union-find over every witness's L2 graph.
    """
    ctx = F.ctx
    q = ctx.q
    if F.is_monomial():
        return OrbitData(ctx, [list(range(1, q))])
    if not F.is_do():
        raise EquivalenceError("right orbits need a DO polynomial or a monomial")
    if ctx.n > ORBIT_DEFAULT_MAX_N and not long_running:
        raise EquivalenceError(
            f"orbit enumeration at n={ctx.n} is gated; pass long_running=True"
        )
    _require_planar_do(F, "operand")
    F = canonicalize(F)
    parent = list(range(q))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    leaves = [0]
    neg = ctx.neg

    def on_witness(l1_cols, l2_cols, known):
        # union the witness graph and its mirror's (x -> -L2(x))
        leaves[0] += 1
        for x in range(1, q):
            y = known[x]
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[rx] = ry
            ry2 = find(neg(y))
            rx = find(x)
            if rx != ry2:
                parent[rx] = ry2
        return True

    _Search(F, F).run(on_witness)
    groups = {}
    for x in range(1, q):
        groups.setdefault(find(x), []).append(x)
    return OrbitData(ctx, list(groups.values()), group_order=2 * leaves[0])


# -- invariant profiles ------------------------------------------------------


class InvariantProfile:
    """Cheap linear invariants used to pre-filter equivalence tests."""

    def __init__(self, do_flag, degree, nuclei_orders, orbit_multiset):
        self.do_flag = do_flag
        self.degree = degree
        self.nuclei_orders = nuclei_orders  # (|N|, |Nm|) or None for non-DO
        self.orbit_multiset = orbit_multiset  # tuple of (size, mult) or None

    def compatible(self, other):
        """Equality on the fields both sides know; unknown is a wildcard."""
        if self.do_flag != other.do_flag or self.degree != other.degree:
            return False
        for mine, theirs in (
            (self.nuclei_orders, other.nuclei_orders),
            (self.orbit_multiset, other.orbit_multiset),
        ):
            if mine is not None and theirs is not None and mine != theirs:
                return False
        return True

    def __repr__(self):
        return (
            f"InvariantProfile(do={self.do_flag}, deg={self.degree}, "
            f"nuclei={self.nuclei_orders}, orbits={multiset_text(self.orbit_multiset)})"
        )


def invariant_profile(F, with_orbits="auto", long_running=False):
    """Assemble (DO flag, degree, nuclei, orbit multiset) for a planar F.

    Nuclei and orbits are computed for DO inputs; monomials always get the
    single-orbit multiset.  with_orbits: True / False / "auto" (skip above
    the enumeration gate).
    """
    from . import semifield

    ctx = F.ctx
    do_flag = F.is_do()
    degree = F.algebraic_degree()
    nuclei_orders = None
    if do_flag:
        S = semifield.unitalize(semifield.presemifield_from(F), 1)
        nuclei_orders = semifield.nuclei(S).orders()
    ms = None
    if F.is_monomial():
        ms = ((ctx.q - 1, 1),)
    elif do_flag:
        want = with_orbits is True or (
            with_orbits == "auto" and (ctx.n <= ORBIT_DEFAULT_MAX_N or long_running)
        )
        if want:
            ms = right_orbits(F, long_running=long_running).multiset()
    return InvariantProfile(do_flag, degree, nuclei_orders, ms)


# -- catalogs ----------------------------------------------------------------


class ClassRecord:
    def __init__(self, class_id, fn, families=(), nuclei_orders=None, orbit_multiset=None, splits="No"):
        self.id = class_id
        self.fn = fn
        self.families = tuple(families)
        self.nuclei_orders = nuclei_orders
        self.orbit_multiset = orbit_multiset
        self.splits = splits

    def merge_families(self, tags):
        merged = list(self.families)
        for t in tags:
            if t and t not in merged:
                merged.append(t)
        self.families = tuple(merged)

    def to_line(self):
        if self.nuclei_orders is None:
            nn, nm = "NA", "NA"
        else:
            nn, nm = str(self.nuclei_orders[0]), str(self.nuclei_orders[1])
        return " | ".join(
            [
                self.id,
                str(self.fn.ctx.n),
                format_fn(self.fn),
                ",".join(self.families) if self.families else "-",
                nn,
                nm,
                multiset_text(self.orbit_multiset),
                self.splits,
            ]
        )


class Catalog:
    """Registry of pairwise inequivalent CCZ-class representatives."""

    def __init__(self, ctx, records=None):
        self.ctx = ctx
        self.records = list(records or [])

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def get(self, class_id):
        for r in self.records:
            if r.id == class_id:
                return r
        raise KeyError(class_id)

    def next_id(self):
        used = set()
        for r in self.records:
            head, _, tail = r.id.partition(".")
            if head == str(self.ctx.n) and tail.isdigit():
                used.add(int(tail))
        k = 1
        while k in used:
            k += 1
        return f"{self.ctx.n}.{k}"

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for r in self.records:
                fh.write(r.to_line() + "\n")

    @classmethod
    def load(cls, path, ctx=None):
        records = []
        with open(path, encoding="utf-8") as fh:
            for raw in fh:
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                parts = [p.strip() for p in line.split("|")]
                if len(parts) != 8:
                    raise EquivalenceError(f"bad catalog line: {line!r}")
                cid, n_text, fn_text, fams, nn, nm, ms, splits = parts
                n = int(n_text)
                if ctx is None:
                    ctx = make_field(n)
                if n != ctx.n:
                    raise EquivalenceError(f"catalog line for n={n} in an n={ctx.n} catalog")
                fn = parse_fn(ctx, fn_text)
                families = () if fams in ("-", "") else tuple(fams.split(","))
                nuclei_orders = None if nn == "NA" else (int(nn), int(nm))
                records.append(
                    ClassRecord(cid, fn, families, nuclei_orders, parse_multiset(ms), splits)
                )
        if ctx is None:
            raise EquivalenceError("empty catalog and no field context given")
        return cls(ctx, records)


# -- classification ----------------------------------------------------------


class Candidate:
    def __init__(self, fn, family=None, declared_key=None):
        self.fn = fn
        self.family = family
        self.declared_key = declared_key or (family or format_fn(fn))


def _monomial_exponent(fn):
    return fn.terms[0][1] if fn.is_monomial() else None


def classify(candidates, seed=None, policy="witness", with_orbits="auto", long_running=False):
    """Fold candidates into a catalog of pairwise inequivalent classes.

    Gate order per candidate: monomial-vs-monomial cyclotomic test first,
    then DO flag / degree / nuclei / orbit multiset, witness search last.
    policy="declared" replaces the witness stage by declared-identity
    matching (used for odd n >= 7, where the table's non-monomial entries
    are known-distinct and no search is required).
    Deterministic given candidate order.
    """
    if not candidates and seed is None:
        raise EquivalenceError("nothing to classify")
    ctx = candidates[0].fn.ctx if candidates else seed.ctx
    cat = Catalog(ctx, list(seed.records) if seed else [])
    profiles = {}
    declared = {}
    matches = []

    def profile_of(rec_or_fn, key):
        if key not in profiles:
            profiles[key] = invariant_profile(
                rec_or_fn, with_orbits=with_orbits, long_running=long_running
            )
        return profiles[key]

    for cand in candidates:
        fn = canonicalize(cand.fn)
        d = _monomial_exponent(fn)
        matched = None
        for rec in cat.records:
            e = _monomial_exponent(rec.fn)
            if d is not None and e is not None:
                if cyclotomic_equivalent(d, e, ctx.n):
                    matched = rec
                    break
                continue
            if policy == "declared":
                if declared.get(rec.id) == cand.declared_key:
                    matched = rec
                    break
                continue
            pc = profile_of(fn, ("cand", fn.key()))
            pr = profile_of(rec.fn, ("rec", rec.id))
            if not pc.compatible(pr):
                continue
            if linear_equivalent(fn, rec.fn, validate=False) is not None:
                matched = rec
                break
        if matched is None:
            rec = ClassRecord(cat.next_id(), fn, families=(cand.family,) if cand.family else ())
            if fn.is_do():
                p = profile_of(fn, ("cand", fn.key()))
                rec.nuclei_orders = p.nuclei_orders
                rec.orbit_multiset = p.orbit_multiset
            elif fn.is_monomial():
                rec.nuclei_orders = None
                rec.orbit_multiset = ((ctx.q - 1, 1),)
                rec.splits = "NA"
            declared[rec.id] = cand.declared_key
            cat.records.append(rec)
            matches.append((cand, rec.id, "new"))
        else:
            matched.merge_families([cand.family] if cand.family else [])
            matches.append((cand, matched.id, "matched"))
    return cat, matches
