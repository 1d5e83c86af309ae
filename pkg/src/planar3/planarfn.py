"""Sparse univariate functions over GF(3^n): parsing, algebraic degree,
DO detection, derivatives, planarity tests, cyclotomic equivalence.

A function is a term list [(coeff, exponent)] with distinct exponents in
[1, q-1), plus a lazily built value table of q output codes.  Two planarity
tests are provided: the general derivative test and the fast rank test on the
bilinear slices of a DO polynomial (they must agree on DO inputs; the test
suite enforces that).  Monomials get an O(q) shortcut: D_a x^d is a scaled
reparametrization of D_1 x^d, so one direction decides all of them.
"""

import functools
import re
import warnings

import numpy as np

from . import gf3linalg
from .field3 import FieldError, make_field

LONG_RUNNING_GENERAL_N = 10  # general planarity loop is gated from here up


class ParseError(ValueError):
    pass


def base3_digit_sum(e):
    s = 0
    while e:
        s += e % 3
        e //= 3
    return s


def is_quadratic_exponent(e):
    # exactly the exponents 3^j + 3^i (including i = j)
    return e > 0 and base3_digit_sum(e) == 2


def quadratic_exponents(n):
    """All distinct 3^j + 3^i, 0 <= i <= j < n, ascending."""
    return sorted({3**j + 3**i for j in range(n) for i in range(j + 1)})


class PlanarFn:
    """Immutable sparse function over GF(3^n).

    terms: tuple of (coeff code, exponent), descending exponents, no zero
    coefficients, no repeated exponents.  The value table is cached on first
    use and shared after that.
    """

    def __init__(self, ctx, terms, table=None):
        self.ctx = ctx
        self.terms = tuple(sorted(terms, key=lambda t: -t[1]))
        self._table = table
        self._slices = None

    @classmethod
    def from_terms(cls, ctx, terms, reduce_exponents=False):
        """Build from (coeff, exponent) pairs; combines repeats, drops zeros.

        Constant terms are dropped with a warning (adding a constant never
        changes any property studied here), linear terms are kept: callers
        that need EA-normal form run canonicalize().
        """
        acc = {}
        for c, e in terms:
            if e < 0:
                raise ParseError(f"negative exponent {e}")
            if e >= ctx.q - 1:
                if not reduce_exponents:
                    raise ParseError(f"exponent {e} >= q-1 without reduction enabled")
                e = e % (ctx.q - 1)
                if e == 0:
                    raise ParseError("exponent reduced to 0; x^(q-1) is not representable")
            if e == 0:
                if c:
                    warnings.warn("constant term dropped (preserves all studied properties)")
                continue
            acc[e] = ctx.add(acc.get(e, 0), c)
        return cls(ctx, [(c, e) for e, c in acc.items() if c])

    @classmethod
    def from_table(cls, ctx, table):
        """Wrap a value table; term list is recovered by DO interpolation."""
        table = np.asarray(table, dtype=np.int64)
        terms = interpolate_do_terms(ctx, table)
        return cls(ctx, terms, table=table)

    def table(self):
        if self._table is None:
            self._table = eval_table(self.ctx, self.terms)
        return self._table

    def __call__(self, x):
        return int(self.table()[x])

    def is_zero(self):
        return not self.terms

    def is_monomial(self):
        return len(self.terms) == 1

    def algebraic_degree(self):
        if not self.terms:
            raise ValueError("algebraic degree of the zero function is undefined")
        return max(base3_digit_sum(e) for _, e in self.terms)

    def is_do(self):
        return bool(self.terms) and all(is_quadratic_exponent(e) for _, e in self.terms)

    def slices(self):
        """Stacked basis slice matrices, shape (n, n, n) uint8.

        slices[k] is the matrix of x -> B(x, b_k) for basis direction
        b_k = alpha^k, where B(x, a) = F(x+a) - F(x) - F(a) + F(0).
        """
        if self._slices is None:
            self._slices = bilinear_slices(self.ctx, self.table())
        return self._slices

    def key(self):
        return (self.ctx.n, self.terms) if self.terms else (self.ctx.n, tuple(self.table()))

    def __eq__(self, other):
        if not isinstance(other, PlanarFn):
            return NotImplemented
        if self.ctx.n != other.ctx.n:
            return False
        if self.terms and other.terms:
            return self.terms == other.terms
        return bool(np.array_equal(self.table(), other.table()))

    def __hash__(self):
        return hash((self.ctx.n, self.terms))

    def __repr__(self):
        return f"PlanarFn(n={self.ctx.n}, {format_fn(self)!r})"


# -- evaluation -------------------------------------------------------------


def eval_table(ctx, terms):
    q = ctx.q
    out = np.zeros(q, dtype=np.int64)
    if not terms:
        return out
    logs = ctx.log_table[1:]
    acc = np.zeros(q - 1, dtype=np.int64)
    for c, e in terms:
        lc = ctx.log_table[c]
        acc = ctx.vadd(acc, ctx.exp_table[(logs * e + lc) % (q - 1)])
    out[1:] = acc
    return out


def derivative_table(ctx, table, a):
    """Table of D_a F(x) = F(x+a) - F(x)."""
    if a == 0:
        raise ValueError("derivative direction must be nonzero")
    xs = np.arange(ctx.q, dtype=np.int64)
    return ctx.vsub(table[ctx.vadd(xs, a)], table)


def bilinear_slices(ctx, table):
    n = ctx.n
    f0 = int(table[0])
    S = np.zeros((n, n, n), dtype=np.uint8)
    for k in range(n):
        bk = 3**k
        cols = []
        for i in range(n):
            bi = 3**i
            v = ctx.add(int(table[ctx.add(bi, bk)]), ctx.neg(int(table[bi])))
            v = ctx.add(v, ctx.neg(int(table[bk])))
            v = ctx.add(v, f0)
            cols.append(v)
        S[k] = gf3linalg.mat_from_cols(ctx, cols)
    return S


# -- planarity --------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _half_directions(n):
    """Digit matrix of one representative per {a, -a} pair of directions."""
    q = 3**n
    codes = np.arange(1, q, dtype=np.int64)
    digs = np.zeros((q - 1, n), dtype=np.uint8)
    t = codes.copy()
    for k in range(n):
        digs[:, k] = t % 3
        t //= 3
    first = np.argmax(digs != 0, axis=1)
    keep = digs[np.arange(q - 1), first] == 1
    return digs[keep]


def _derivative_is_bijective(ctx, table, a):
    d = derivative_table(ctx, table, a)
    seen = np.zeros(ctx.q, dtype=bool)
    seen[d] = True
    return bool(seen.all())


def is_planar_monomial(ctx, d):
    """Planarity of x^d: D_a x^d (x) = a^d * D_1 x^d (x/a), so a=1 decides."""
    table = eval_table(ctx, ((1, d),))
    return _derivative_is_bijective(ctx, table, 1)


def is_planar_general(fn, long_running=False):
    """Every-direction derivative bijectivity; O(q^2)."""
    ctx = fn.ctx
    if ctx.n >= LONG_RUNNING_GENERAL_N and not long_running:
        raise FieldError(
            f"general planarity test at n={ctx.n} is gated; pass long_running=True"
        )
    table = fn.table()
    for a in range(1, ctx.q):
        if not _derivative_is_bijective(ctx, table, a):
            return False
    return True


def is_planar_do(fn, chunk=512):
    """Rank test: F planar iff every nonzero slice combination is nonsingular.

    The slice of direction a = sum(lam_k b_k) is the same GF(3) combination of
    the basis slices (B is biadditive in a), and the slices of a and -a are
    negatives, so (q-1)/2 representatives suffice.
    """
    if not fn.is_do():
        raise ValueError("rank planarity test requires a DO polynomial")
    ctx = fn.ctx
    S = fn.slices().astype(np.uint8)
    lams = _half_directions(ctx.n)
    for i in range(0, lams.shape[0], chunk):
        block = lams[i : i + chunk]
        mats = np.einsum("ck,kij->cij", block, S) % 3
        if not gf3linalg.batched_nonsingular(mats).all():
            return False
    return True


def is_planar(fn, long_running=False):
    """Dispatch: monomial shortcut, DO rank test, else the general loop."""
    if fn.is_zero():
        return False
    if fn.is_monomial() and fn.terms[0][0] != 0:
        c, d = fn.terms[0]
        return is_planar_monomial(fn.ctx, d)  # nonzero scaling never matters
    if fn.is_do():
        return is_planar_do(fn)
    return is_planar_general(fn, long_running=long_running)


# -- equivalence helpers ----------------------------------------------------


def cyclotomic_equivalent(d, e, n):
    """CCZ-equivalence of x^d and x^e over GF(3^n), decided on exponents:
    d = 3^i * e  or  d = 3^i * e^(-1) (mod 3^n - 1) for some i."""
    m = 3**n - 1
    if not (0 < d < m and 0 < e < m):
        raise ValueError("exponents must be in (0, 3^n - 1)")
    orbit = set()
    t = e
    for _ in range(n):
        orbit.add(t)
        t = t * 3 % m
    try:
        t = pow(e, -1, m)
        for _ in range(n):
            orbit.add(t)
            t = t * 3 % m
    except ValueError:
        pass
    return d in orbit


def canonicalize(fn):
    """EA-normal DO form: drop constant and linear (exponent 3^k) parts.

    For planar DO polynomials all the studied equivalences coincide, so this
    is a class-preserving normalization.
    """
    kept = []
    dropped = False
    for c, e in fn.terms:
        if e == 1 or base3_digit_sum(e) == 1:
            dropped = True
            continue
        kept.append((c, e))
    if dropped:
        warnings.warn("linear part dropped during canonicalization")
        return PlanarFn(fn.ctx, kept)
    return fn


# -- DO interpolation (table -> sparse form) --------------------------------


def interpolate_do_terms(ctx, table):
    """Recover the unique DO term list of a DO-valued table.

    Coefficient of x^e is -sum_{c != 0} F(c) c^(-e); only quadratic exponents
    are extracted, then the sparse form is verified against the table.
    """
    q = ctx.q
    nz = np.arange(1, q, dtype=np.int64)
    fvals = table[1:]
    fl = ctx.log_table[fvals]
    cl = ctx.log_table[nz]
    terms = []
    for e in quadratic_exponents(ctx.n):
        ll = (fl + (-e * cl) % (q - 1)) % (q - 1)
        vals = np.where(fvals == 0, 0, ctx.exp_table[ll])
        # digit-wise sum mod 3, then negate
        acc = 0
        v = vals
        for k in range(ctx.n):
            acc += int((v // 3**k % 3).sum() % 3) * 3**k
        coeff = ctx.neg(acc)
        if coeff:
            terms.append((coeff, e))
    if not np.array_equal(eval_table(ctx, terms), np.asarray(table)):
        raise ValueError("table is not a DO polynomial with zero constant term")
    return terms


# -- text form --------------------------------------------------------------

_TERM_RE = re.compile(
    r"^(?:(?P<coeff>g\^\d+|g|\d+)\*)?x\^(?P<exp>\d+)$|^(?P<const>g\^\d+|g|\d+)$"
)


def parse_fn(ctx, text, reduce_exponents=False):
    """Parse `fn := term ('+' term)*` with
    `term := [coeff '*'] 'x' '^' exp | coeff`, `coeff := decimal | g^k | g`."""
    text = text.strip()
    if not text:
        raise ParseError("empty function text")
    terms = []
    seen = set()
    for raw in text.split("+"):
        piece = re.sub(r"\s+", "", raw)
        if not piece:
            raise ParseError("empty term (stray '+')")
        m = _TERM_RE.match(piece)
        if not m:
            raise ParseError(f"malformed term {raw.strip()!r}")
        if m.group("const") is not None:
            terms.append((ctx.parse_element(m.group("const")), 0))
            continue
        coeff = ctx.parse_element(m.group("coeff")) if m.group("coeff") else 1
        e = int(m.group("exp"))
        if e >= ctx.q - 1 and not reduce_exponents:
            raise ParseError(f"exponent {e} >= q-1 = {ctx.q - 1} without reduction enabled")
        e_red = e % (ctx.q - 1) if e >= ctx.q - 1 else e
        if e_red in seen:
            raise ParseError(f"duplicate exponent {e_red}")
        seen.add(e_red)
        terms.append((coeff, e))
    return PlanarFn.from_terms(ctx, terms, reduce_exponents=reduce_exponents)


def format_fn(fn):
    """Canonical text: descending exponents, coefficient omitted when 1,
    otherwise emitted as g^k."""
    if not fn.terms:
        return "0"
    parts = []
    for c, e in fn.terms:
        if c == 1:
            parts.append(f"x^{e}")
        else:
            parts.append(f"{fn.ctx.format_element(c)}*x^{e}")
    return " + ".join(parts)


def parse_fn_file(ctx_or_none, text):
    """File form: a `n=<int>` context line followed by the function text."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not lines:
        raise ParseError("empty function file")
    m = re.fullmatch(r"n\s*=\s*(\d+)", lines[0])
    if m:
        ctx = make_field(int(m.group(1)))
        body = " + ".join(lines[1:])
    else:
        if ctx_or_none is None:
            raise ParseError("function file lacks an n=<int> context line")
        ctx = ctx_or_none
        body = " + ".join(lines)
    return parse_fn(ctx, body)
