"""Sparse exact linear algebra over the rationals.

Vectors are sparse maps {basis index -> nonzero coefficient}.  The engine
keeps persistent vectors in integer canonical form (gcd-reduced, first
nonzero coordinate positive, indices increasing) with the squared norm
carried separately, so normalization never enters the linear algebra --
that is what guarantees every reported coefficient is a single signed
radical.

Gaussian elimination supports two pivot strategies ('first' and 'minbits');
all consumers go through canonical forms (reduced row echelon of the
solution span), so results are bit-identical for either strategy.
"""

from fractions import Fraction
from math import gcd

PIVOT_STRATEGIES = ("first", "minbits")

# Process-wide default consulted when callers pass pivot=None; the CLI's
# --pivot option swaps it to demonstrate strategy-independence of results.
DEFAULT_PIVOT = "first"


class SparseVec(dict):
    """{index: coefficient} with no zero entries, indices increasing.

    A dict subclass so the hot paths pay no wrapper overhead.  Use svec()
    to build one in canonical iteration order.
    """

    __slots__ = ()


def svec(entries):
    """Canonical SparseVec from a mapping or iterable of (index, coeff)."""
    items = entries.items() if hasattr(entries, "items") else entries
    v = SparseVec()
    for i, c in sorted(items):
        if c:
            v[i] = c
    return v


def dot(v, w):
    """Exact inner product (all coordinates real, no conjugation)."""
    if len(w) < len(v):
        v, w = w, v
    s = 0
    for i, c in v.items():
        d = w.get(i)
        if d is not None:
            s += c * d
    return s


def norm2(v):
    return sum(c * c for c in v.values())


def add_scaled(v, w, c):
    """v + c*w as a new vector (zero entries pruned)."""
    out = dict(v)
    for i, d in w.items():
        x = out.get(i, 0) + c * d
        if x:
            out[i] = x
        elif i in out:
            del out[i]
    return out


def scale(v, c):
    if not c:
        return {}
    return {i: c * x for i, x in v.items()}


def combine(terms):
    """Linear combination sum(c * v for c, v in terms)."""
    out = {}
    for c, v in terms:
        if not c:
            continue
        for i, d in v.items():
            x = out.get(i, 0) + c * d
            if x:
                out[i] = x
            elif i in out:
                del out[i]
    return out


def _int_reduce(v):
    """Clear denominators and divide by the common gcd; returns a new dict."""
    if not v:
        return {}
    mult = 1
    for c in v.values():
        if isinstance(c, Fraction):
            d = c.denominator
            mult = mult * d // gcd(mult, d)
    g = 0
    items = []
    for i, c in v.items():
        if not c:
            continue
        n = int(c * mult)
        items.append((i, n))
        g = gcd(g, n)
    if not items:
        return {}
    return {i: n // g for i, n in items}


def canonical(v):
    """Integer canonical direction: gcd-reduced, first nonzero positive."""
    w = _int_reduce(v)
    if not w:
        return svec({})
    lead = w[min(w)]
    if lead < 0:
        w = {i: -c for i, c in w.items()}
    return svec(w)


def vec_eq(v, w):
    if len(v) != len(w):
        return False
    for i, c in v.items():
        if w.get(i) != c:
            return False
    return True


class SparseOp:
    """A sparse linear operator: column vectors on demand.

    Built either from an explicit {input index: column vector} map or from
    a column function (used for generators on big tensor spaces, where
    materializing all columns would be wasteful).
    """

    __slots__ = ("columns", "_colfn")

    def __init__(self, columns=None, colfn=None):
        self.columns = dict(columns) if columns is not None else {}
        self._colfn = colfn

    def col(self, i):
        c = self.columns.get(i)
        if c is None:
            if self._colfn is None:
                return {}
            c = self._colfn(i)
            self.columns[i] = c
        return c


def apply(op, v):
    """Exact matrix-vector product, zero entries pruned."""
    out = {}
    col = op.col
    for i, c in v.items():
        for j, a in col(i).items():
            x = out.get(j, 0) + c * a
            if x:
                out[j] = x
            elif j in out:
                del out[j]
    return out


def apply_many(ops, v):
    """Apply a list of ops in sequence (ops[0] first)."""
    for op in ops:
        v = apply(op, v)
        if not v:
            break
    return v


def gs_insert(basis, v):
    """Orthogonalize v against an orthogonal integer basis [(vec, norm2)].

    Returns the canonical remainder (or None if dependent).  Integer
    update  r <- n2_b * r - <r,b> * b  with gcd reduction each step keeps
    everything in Z.
    """
    r = _int_reduce(v)
    for b, n2 in basis:
        d = dot(r, b)
        if d:
            r = add_scaled(scale(r, n2), b, -d)
            r = _int_reduce(r)
        if not r:
            return None
    if not r:
        return None
    return canonical(r)


def orthogonalize(vs):
    """Classical Gram-Schmidt without normalization.

    Returns mutually orthogonal integer vectors spanning span(vs), each
    with its exact squared norm; dependent inputs are dropped.
    """
    basis = []
    for v in vs:
        r = gs_insert(basis, v)
        if r is not None:
            basis.append((r, norm2(r)))
    return basis


def project_onto(v, basis):
    """Projection of v onto the span of an ORTHOGONAL basis [(vec, norm2)].

    Exact rational combination; returned un-canonicalized (caller decides).
    """
    terms = []
    for b, n2 in basis:
        d = dot(v, b)
        if d:
            terms.append((Fraction(d, n2), b))
    return combine(terms)


def _pivot_row(rows, col, start, strategy):
    """Pick the pivot row index for `col` among rows[start:]; None if all zero."""
    best = None
    best_size = None
    for r in range(start, len(rows)):
        x = rows[r][col]
        if not x:
            continue
        if strategy == "first":
            return r
        size = abs(x.numerator).bit_length() + x.denominator.bit_length()
        if best is None or size < best_size:
            best, best_size = r, size
    return best


def rref(rows, width, pivot=None):
    """Reduced row echelon form of dense Fraction rows; returns (rows, pivots).

    The RREF of a span is unique, so the pivot strategy affects only the
    arithmetic path, never the result.
    """
    if pivot is None:
        pivot = DEFAULT_PIVOT
    assert pivot in PIVOT_STRATEGIES, pivot
    rows = [list(map(Fraction, r)) for r in rows]
    pivots = []
    r0 = 0
    for c in range(width):
        p = _pivot_row(rows, c, r0, pivot)
        if p is None:
            continue
        rows[r0], rows[p] = rows[p], rows[r0]
        inv = 1 / rows[r0][c]
        rows[r0] = [x * inv for x in rows[r0]]
        for r in range(len(rows)):
            if r != r0 and rows[r][c]:
                f = rows[r][c]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[r0])]
        pivots.append(c)
        r0 += 1
        if r0 == len(rows):
            break
    return rows[:r0], pivots


def null_space_dense(rows, width, pivot=None):
    """Canonical basis of {x : M x = 0} for dense Fraction rows M.

    Returned as the unique RREF basis of the null span (row-reduced over
    the free-variable pattern), one dense Fraction vector per basis row.
    """
    red, pivots = rref(rows, width, pivot)
    pivset = set(pivots)
    free = [c for c in range(width) if c not in pivset]
    basis = []
    for f in free:
        x = [Fraction(0)] * width
        x[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            x[pc] = -red[r][f]
        basis.append(x)
    # x-vectors above are already the canonical complement basis (each free
    # column appears in exactly one of them with coefficient 1)
    return basis


def joint_null_space(ops, restricted_to, pivot=None):
    """Rational basis of {v in span(restricted_to) : op v = 0 for all ops}.

    restricted_to must be linearly independent.  The result is canonical
    (independent of pivot strategy and of the internal row order): the
    RREF basis of the solution span in restricted_to coordinates, each
    vector integer-canonicalized.
    """
    if not ops:
        return [svec(v) for v in restricted_to]
    k = len(restricted_to)
    if k == 0:
        return []
    rows = []
    for op in ops:
        images = [apply(op, b) for b in restricted_to]
        support = sorted(set().union(*[im.keys() for im in images])) if images else []
        for j in support:
            rows.append([Fraction(im.get(j, 0)) for im in images])
    if not rows:
        return [svec(v) for v in restricted_to]
    coeffs = null_space_dense(rows, k, pivot)
    out = []
    for x in coeffs:
        v = combine([(c, restricted_to[i]) for i, c in enumerate(x) if c])
        out.append(canonical(v))
    return out


class ExactKernel:
    """Bundle of the numeric primitives the decomposition engine uses.

    The float verification oracle provides an object with the same
    attributes backed by double precision (see oracle.py); the engine is
    written against this interface only.
    """

    name = "exact"

    dot = staticmethod(dot)
    norm2 = staticmethod(norm2)
    add_scaled = staticmethod(add_scaled)
    scale = staticmethod(scale)
    combine = staticmethod(combine)
    canonical = staticmethod(canonical)
    apply = staticmethod(apply)
    gs_insert = staticmethod(gs_insert)
    orthogonalize = staticmethod(orthogonalize)
    project_onto = staticmethod(project_onto)
    joint_null_space = staticmethod(joint_null_space)

    @staticmethod
    def is_zero_scalar(x):
        return not x

    @staticmethod
    def is_positive(x):
        return x > 0

    @staticmethod
    def ratio(a, b):
        return Fraction(a) / Fraction(b)

    @staticmethod
    def coeff_fraction(x):
        """Exact coordinate for building explicit combinations."""
        return Fraction(x)


EXACT = ExactKernel()
