"""Highest-weight decomposition and coupling engine.

Everything runs on unnormalized integer vectors; each basis state carries a
separately tracked squared norm and the one square root per coefficient is
taken only at reporting time (scalar_factors).  Irreps are filled by the
classic recursion: extract a highest-weight vector, transport it downward
with lowering operators level by level along the reduction chain, and fix
signs at each level by the nonnegativity convention (baird_fix) or by
explicit reference matrix elements (fix_anchor_phases).

Tensor products are resolved in "pair coordinates": vectors indexed by pairs
of already-built factor states, with the factor norms supplying a diagonal
metric.  New irreps are born as joint null spaces of the raising operators
inside one weight class at a time, degenerate copies are separated by
exchange symmetry or by ordered overlaps with the uncoupled families, and
each block is then filled by the same transport recursion.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from functools import lru_cache
from itertools import product as _iproduct
from threading import Lock, RLock

from . import sparse_linalg as sl
from .exact_arith import rational_sqrt
from .irrep_catalog import (
    UnknownIrrep,
    _normalize_label,
    irrep,
    mu_spin,
    mu_u1,
)
from .sparse_linalg import SparseOp, joint_null_space
from .tensor_rep import FUND, build_space, generator, product_embedding


class IncompleteDecomposition(RuntimeError):
    """A weight class could not be exhausted; indicates an engine bug."""


class PhaseObstruction(RuntimeError):
    """No sign assignment satisfies the nonnegativity convention."""


class ZeroAnchor(RuntimeError):
    """A reference matrix element that must be nonzero vanished."""


class InconsistentXi(RuntimeError):
    """Exchange signs disagree between corresponding coefficients."""


# ---------------------------------------------------------------------------
# reduction-chain ladder stacks


def _kadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _ksub(a, b):
    return tuple(x - y for x, y in zip(a, b))


class ChainStack:
    """Ladder-operator ids of one reduction chain, level by level.

    levels[k] lists the ladder ids of the algebra acting at depth k; the last
    level is empty (single states).  Class keys are net letter counts,
    projected to (flavor counts..., 2*J_z) for the spin-flavor chains.
    `hvec` is a linear functional that strictly decreases under every
    lowering, so processing classes in descending (h, lex) order always sees
    feeder states before their transport targets.
    """

    __slots__ = ("n", "n_f", "spinful", "levels", "hvec", "_shift")

    def __init__(self, n, n_f, spinful, levels, hvec):
        self.n = n
        self.n_f = n_f
        self.spinful = spinful
        self.levels = levels
        self.hvec = hvec
        width = n_f + 1 if spinful else n
        shifts = {}
        for lads in levels:
            for lid in lads:
                shifts[lid] = self._lower_shift(lid, width)
        for i in range(1, n + 1):
            shifts[("D", i)] = (0,) * width
        self._shift = shifts

    def _lower_shift(self, lid, width):
        d = [0] * width
        kind = lid[0]
        if kind == "S":
            d[-1] = -2
        elif kind == "F":
            f = lid[1]
            d[f - 1] -= 1
            d[f] += 1
        elif not self.spinful:
            i = lid[1]
            d[i - 1] -= 1
            d[i] += 1
        else:
            i, m = lid[1], self.n_f
            if i == m:
                d[0] += 1
                d[m - 1] -= 1
                d[-1] = -2
            else:
                q = i if i < m else i - m
                d[q - 1] -= 1
                d[q] += 1
        return tuple(d)

    def shift(self, lid):
        return self._shift[lid]

    def hdot(self, key):
        return sum(w * k for w, k in zip(self.hvec, key))

    def sort_key(self, key):
        return (self.hdot(key), key)

    def heap_token(self, key):
        return (-self.hdot(key), tuple(-x for x in key), key)

    def project(self, net):
        """Net letter counts -> class key (identity for the plain chains)."""
        if not self.spinful:
            return net
        m = self.n_f
        f = tuple(net[i] + net[i + m] for i in range(m))
        return f + (sum(net[:m]) - sum(net[m:]),)


def _eids(lo, hi):
    return tuple(("E", i) for i in range(lo, hi))


@lru_cache(maxsize=None)
def stack_for(n):
    if n == 8:
        levels = (
            _eids(1, 8),
            (("F", 1), ("F", 2), ("F", 3), ("S",)),
            (("F", 1), ("F", 2), ("S",)),
            (("F", 1), ("S",)),
            (),
        )
        return ChainStack(8, 4, True, levels, (8, 4, 2, 1, 4))
    if n == 6:
        levels = (
            _eids(1, 6),
            (("F", 1), ("F", 2), ("S",)),
            (("F", 1), ("S",)),
            (),
        )
        return ChainStack(6, 3, True, levels, (4, 2, 1, 2))
    if n in (2, 3, 4):
        levels = tuple(_eids(1, n - k) for k in range(n - 1)) + ((),)
        return ChainStack(n, n, False, levels, tuple(2 ** (n - 1 - i) for i in range(n)))
    raise ValueError(f"no reduction chain for SU({n})")


# ---------------------------------------------------------------------------
# weight multiplicities (Gelfand-Tsetlin interlacing recursion)


@lru_cache(maxsize=None)
def _wm(rows, r):
    """Weight multiplicities of the SU(r) irrep `rows`, box-count coordinates."""
    top = list(rows) + [0] * (r - len(rows))
    if r == 1:
        return {(top[0],): 1}
    total = sum(top)
    out = {}
    for sub in _iproduct(*(range(top[i + 1], top[i] + 1) for i in range(r - 1))):
        k = total - sum(sub)
        subrows = sub
        while subrows and subrows[-1] == 0:
            subrows = subrows[:-1]
        for w, m in _wm(subrows, r - 1).items():
            key = w + (k,)
            out[key] = out.get(key, 0) + m
    return out


def _rows_from_net(net):
    """Net count tuple of a highest weight -> (diagram rows, base offset)."""
    base = min(net) if net else 0
    rows = tuple(x - base for x in net)
    for i in range(len(rows) - 1):
        if rows[i] < rows[i + 1]:
            raise ValueError(f"{net!r} is not a highest weight")
    while rows and rows[-1] == 0:
        rows = rows[:-1]
    return rows, base


def _net_weights(n, net):
    """Weight dict of the SU(n) irrep with highest weight `net`, net coords."""
    rows, base = _rows_from_net(net)
    return {tuple(x + base for x in w): m for w, m in _wm(rows, n).items()}


def _level_weights(stack, k, key):
    """Weights (stack grain) of the level-k block whose top key is `key`."""
    if not stack.levels[k]:
        return {key: 1}
    if stack.spinful:
        nact = stack.n_f + 1 - k
        fpart, frozen, j2 = key[:nact], key[nact:stack.n_f], key[stack.n_f]
        out = {}
        for w, m in _net_weights(nact, fpart).items():
            base = w + frozen
            for jz in range(-j2, j2 + 1, 2):
                kk = base + (jz,)
                out[kk] = out.get(kk, 0) + m
        return out
    nact = stack.n - k
    frozen = key[nact:]
    return {w + frozen: m for w, m in _net_weights(nact, key[:nact]).items()}


def _convolve(d1, d2):
    out = {}
    for k1, m1 in d1.items():
        for k2, m2 in d2.items():
            kk = _kadd(k1, k2)
            out[kk] = out.get(kk, 0) + m1 * m2
    return out


def _peel(stack, k, mult):
    """Greedy series extraction at level k: repeatedly remove the block with
    the highest remaining key.  Returns [(top_key, multiplicity)] in order."""
    d = {kk: v for kk, v in mult.items() if v}
    out = []
    while d:
        m = max(d, key=stack.sort_key)
        c = d[m]
        for kk, vv in _level_weights(stack, k, m).items():
            nv = d.get(kk, 0) - c * vv
            if nv < 0:
                raise IncompleteDecomposition(f"weight bookkeeping failed at {kk!r}")
            if nv:
                d[kk] = nv
            else:
                d.pop(kk, None)
        out.append((m, c))
    return out


def _peel_fine(n, mult):
    """Series extraction at exact net-count grain (full-group level)."""
    d = {kk: v for kk, v in mult.items() if v}
    out = []
    while d:
        m = max(d)
        c = d[m]
        for kk, vv in _net_weights(n, m).items():
            nv = d.get(kk, 0) - c * vv
            if nv < 0:
                raise IncompleteDecomposition(f"weight bookkeeping failed at {kk!r}")
            if nv:
                d[kk] = nv
            else:
                d.pop(kk, None)
        out.append((m, c))
    return out


# ---------------------------------------------------------------------------
# workspaces: ladder action on words and on factor-state pairs


class WordWorkspace:
    """Ladder action on the words of one tensor space (unit metric)."""

    __slots__ = ("stack", "space", "emb", "_ops", "_nets")

    def __init__(self, stack, space):
        self.stack = stack
        self.space = space
        self.emb = product_embedding(stack.n_f) if stack.spinful else None
        self._ops = {}
        self._nets = {}

    def op(self, lid, up):
        cached = self._ops.get((lid, up))
        if cached is not None:
            return cached
        kind = lid[0]
        if kind == "E":
            i = lid[1]
            op = generator(self.space, i + 1, i) if up else generator(self.space, i, i + 1)
        elif kind == "F":
            f = lid[1]
            if up:
                op = self.emb.flavor_generator(self.space, f + 1, f)
            else:
                op = self.emb.flavor_generator(self.space, f, f + 1)
        elif kind == "S":
            if up:
                op = self.emb.spin_generator(self.space, -1, +1)
            else:
                op = self.emb.spin_generator(self.space, +1, -1)
        else:  # ("D", i): diagonal generator
            op = generator(self.space, lid[1], lid[1])
        self._ops[(lid, up)] = op
        return op

    def apply(self, lid, up, v):
        return sl.apply(self.op(lid, up), v)

    def dot(self, v, w):
        return sl.dot(v, w)

    def norm2(self, v):
        return sl.norm2(v)

    def net(self, b):
        cached = self._nets.get(b)
        if cached is None:
            counts = [0] * self.space.n
            for letter, kind in zip(self.space.word(b), self.space.factors):
                counts[letter - 1] += 1 if kind == FUND else -1
            cached = self._nets[b] = tuple(counts)
        return cached

    def fine_key(self, v):
        return self.net(min(v))

    def key_of(self, v):
        return self.stack.project(self.net(min(v)))


class PairWorkspace:
    """Ladder action on products of two built factor blocks.

    Vectors are dicts over composite indices a*dim2 + b of factor-state
    pairs; the inner product carries the factor norms as a diagonal metric.
    """

    __slots__ = ("stack", "rep1", "rep2", "d2")

    def __init__(self, stack, rep1, rep2):
        self.stack = stack
        self.rep1 = rep1
        self.rep2 = rep2
        self.d2 = rep2.dim

    def pair(self, a, b):
        return a * self.d2 + b

    def key_of_pair(self, p):
        a, b = divmod(p, self.d2)
        return _kadd(self.rep1.keys[a], self.rep2.keys[b])

    def key_of(self, v):
        return self.key_of_pair(min(v))

    def apply(self, lid, up, v):
        out = {}
        d2 = self.d2
        r1, r2 = self.rep1, self.rep2
        for p, c in v.items():
            a, b = divmod(p, d2)
            for a2, e in r1.mat_col(lid, up, a).items():
                q = a2 * d2 + b
                ce = out.get(q, 0) + c * e
                if ce:
                    out[q] = ce
                else:
                    out.pop(q, None)
            for b2, e in r2.mat_col(lid, up, b).items():
                q = a * d2 + b2
                ce = out.get(q, 0) + c * e
                if ce:
                    out[q] = ce
                else:
                    out.pop(q, None)
        return out

    def diag_apply(self, weights, v):
        """Apply sum_i weights[i-1] * E^i_i."""
        out = {}
        for i, wt in enumerate(weights, start=1):
            if not wt:
                continue
            for q, c in self.apply(("D", i), False, v).items():
                ce = out.get(q, 0) + wt * c
                if ce:
                    out[q] = ce
                else:
                    out.pop(q, None)
        return out

    def dot(self, v, w):
        if len(w) < len(v):
            v, w = w, v
        n1, n2 = self.rep1.n2s, self.rep2.n2s
        d2 = self.d2
        tot = 0
        for p, c in v.items():
            cw = w.get(p)
            if cw:
                a, b = divmod(p, d2)
                tot += c * cw * n1[a] * n2[b]
        return tot

    def norm2(self, v):
        n1, n2 = self.rep1.n2s, self.rep2.n2s
        d2 = self.d2
        tot = 0
        for p, c in v.items():
            a, b = divmod(p, d2)
            tot += c * c * n1[a] * n2[b]
        return tot

    def class_pairs(self, key, v1, v2):
        out = []
        d2 = self.d2
        cm2 = v2.class_map()
        for k1, idxs1 in v1.class_map().items():
            idxs2 = cm2.get(_ksub(key, k1))
            if idxs2:
                for a in idxs1:
                    base = a * d2
                    out.extend(base + b for b in idxs2)
        out.sort()
        return out

    def swap(self, v):
        """Exchange the two factors (valid when both are the same block)."""
        d2 = self.d2
        out = {}
        for p, c in v.items():
            a, b = divmod(p, d2)
            out[b * d2 + a] = c
        return out


# ---------------------------------------------------------------------------
# block storage


class BlockStore:
    __slots__ = ("states", "n2s", "keys")

    def __init__(self):
        self.states = []
        self.n2s = []
        self.keys = []

    def append(self, vec, n2, key):
        self.states.append(vec)
        self.n2s.append(n2)
        self.keys.append(key)


class Block:
    """A filled irrep block: a contiguous run of states in a store, with the
    next level's slices as children."""

    __slots__ = (
        "store",
        "level",
        "top_key",
        "lo",
        "hi",
        "subs",
        "sigma",
        "gamma",
        "parity",
        "fine_key",
        "anchor_ref",
        "_cmap",
    )

    def __init__(self, store, level, top_key, lo, hi, subs):
        self.store = store
        self.level = level
        self.top_key = top_key
        self.lo = lo
        self.hi = hi
        self.subs = subs
        self.sigma = None
        self.gamma = None
        self.parity = None
        self.fine_key = None
        self.anchor_ref = None
        self._cmap = None

    @property
    def dim(self):
        return self.hi - self.lo

    def class_map(self):
        if self._cmap is None:
            m = {}
            keys = self.store.keys
            for i in range(self.lo, self.hi):
                m.setdefault(keys[i], []).append(i)
            self._cmap = m
        return self._cmap

    def top_state(self):
        return self.store.states[self.lo]

    def state(self, t):
        return self.store.states[self.lo + t]

    def norm2(self, t):
        return self.store.n2s[self.lo + t]

    def key(self, t):
        return self.store.keys[self.lo + t]

    def __repr__(self):
        return f"Block(level={self.level}, top={self.top_key}, dim={self.dim})"


def _negate(v):
    return {p: -c for p, c in v.items()}


def _gs_residual(ws, w, members):
    """Component of w orthogonal to `members` [(vec, norm2)...], rescaled to
    coprime integers WITHOUT the leading-sign flip (transport signs matter)."""
    r = w
    for vec, n2 in members:
        c = ws.dot(r, vec)
        if c:
            r = sl._int_reduce(sl.add_scaled(sl.scale(r, n2), vec, -c))
            if not r:
                return None
    r = sl._int_reduce(r)
    return r or None


def _orth(ws, vecs):
    """Metric Gram-Schmidt; returns [(vec, norm2)] dropping dependent vectors."""
    out = []
    for v in vecs:
        r = _gs_residual(ws, v, out)
        if r is not None:
            out.append((r, ws.norm2(r)))
    return out


def _project_span(ws, v, basis):
    """Metric projection of v onto the span of an orthogonal basis."""
    acc = {}
    for vec, n2 in basis:
        c = ws.dot(v, vec)
        if c:
            acc = sl.add_scaled(acc, vec, Fraction(c) / n2)
    return sl._int_reduce(acc)


# ---------------------------------------------------------------------------
# the transport fill


def _fill(stack, k, ws, top, store):
    """Fill the level-k block generated by `top` (assumed annihilated by the
    level-k raisings): recursively fill its first slice, then locate each
    further slice top by lowering transports and Gram-Schmidt residuals,
    processing weight classes from the top down."""
    top = sl._int_reduce(top)
    if not top:
        raise IncompleteDecomposition("vanishing block top")
    lads = stack.levels[k]
    lo = len(store.states)
    key0 = ws.key_of(top)
    if not lads:
        store.append(dict(top), ws.norm2(top), key0)
        return Block(store, k, key0, lo, lo + 1, ())
    for lid in stack.levels[k + 1]:
        if ws.apply(lid, True, top):
            raise IncompleteDecomposition("slice top survives a sub-chain raising")
    if stack.spinful and k == 0:
        expected = {}
        for net, m in _net_weights(stack.n, ws.fine_key(top)).items():
            kk = stack.project(net)
            expected[kk] = expected.get(kk, 0) + m
    else:
        expected = dict(_level_weights(stack, k, key0))
    remaining = expected
    classes = {}
    heap = []
    queued = set()
    shifts = [stack.shift(lid) for lid in lads]

    def register(blk):
        for i in range(blk.lo, blk.hi):
            kk = store.keys[i]
            classes.setdefault(kk, []).append(i)
            left = remaining.get(kk, 0) - 1
            if left < 0:
                raise IncompleteDecomposition(f"weight surplus at {kk!r}")
            remaining[kk] = left
            for sh in shifts:
                t = _kadd(kk, sh)
                if t not in queued:
                    queued.add(t)
                    heapq.heappush(heap, stack.heap_token(t))

    subs = [_fill(stack, k + 1, ws, top, store)]
    register(subs[0])
    while heap:
        m = heapq.heappop(heap)[2]
        cands = []
        for li, sh in enumerate(shifts):
            for i in classes.get(_ksub(m, sh), ()):
                cands.append((i, li))
        cands.sort()
        for i, li in cands:
            w = ws.apply(lads[li], False, store.states[i])
            if not w:
                continue
            members = [(store.states[j], store.n2s[j]) for j in classes.get(m, ())]
            r = _gs_residual(ws, w, members)
            if r is None:
                continue
            if remaining.get(m, 0) == 0:
                raise IncompleteDecomposition(f"extra state transported into {m!r}")
            sub = _fill(stack, k + 1, ws, r, store)
            register(sub)
            subs.append(sub)
        if remaining.get(m, 0):
            raise IncompleteDecomposition(f"class {m!r} short {remaining[m]} state(s)")
    left = [kk for kk, v in remaining.items() if v]
    if left:
        raise IncompleteDecomposition(f"unreached classes {left!r}")
    blk = Block(store, k, key0, lo, len(store.states), tuple(subs))
    _baird_level(stack, k, ws, store, blk, classes)
    return blk


def _baird_level(stack, k, ws, store, blk, classes):
    """Flip whole slices so every cross-slice lowering element is >= 0.

    Skipped across the spin-flavor slices of a spinful chain's top level:
    there the nonnegativity convention is unattainable in general and the
    relative slice signs are fixed by reference matrix elements instead."""
    subs = blk.subs
    if len(subs) <= 1:
        return
    if stack.spinful and k == 0:
        return
    post = set(stack.levels[k + 1])
    cross = [lid for lid in stack.levels[k] if lid not in post]
    if not cross:
        return
    owner = {}
    for pos, sub in enumerate(subs):
        for i in range(sub.lo, sub.hi):
            owner[i] = pos
    cshifts = [stack.shift(lid) for lid in cross]

    def first_sign(apos, bpos):
        a, b = subs[apos], subs[bpos]
        bmap = b.class_map()
        for i in range(a.lo, a.hi):
            kk = store.keys[i]
            for li, lid in enumerate(cross):
                tb = bmap.get(_kadd(kk, cshifts[li]))
                if not tb:
                    continue
                w = ws.apply(lid, False, store.states[i])
                if not w:
                    continue
                for j in tb:
                    c = ws.dot(w, store.states[j])
                    if c:
                        return 1 if c > 0 else -1
        return 0

    fixed = [0]
    unfixed = list(range(1, len(subs)))
    while unfixed:
        progress = False
        for bpos in list(unfixed):
            s = 0
            for apos in fixed:
                s = first_sign(apos, bpos)
                if s:
                    break
            if s:
                if s < 0:
                    for i in range(subs[bpos].lo, subs[bpos].hi):
                        store.states[i] = _negate(store.states[i])
                fixed.append(bpos)
                unfixed.remove(bpos)
                progress = True
        if not progress:
            raise PhaseObstruction(f"slice sign graph disconnected at level {k}")
    for i in range(blk.lo, blk.hi):
        kk = store.keys[i]
        for li, lid in enumerate(cross):
            tgt = [j for j in classes.get(_kadd(kk, cshifts[li]), ()) if owner[j] != owner[i]]
            if not tgt:
                continue
            w = ws.apply(lid, False, store.states[i])
            for j in tgt:
                if ws.dot(w, store.states[j]) < 0:
                    raise PhaseObstruction(f"negative cross-slice element at level {k}")


# ---------------------------------------------------------------------------
# canonical factor representations


_REALIZATION = {
    (8, "63"): ("AF", (2, 1, 1, 1, 1, 1, 1)),
    (8, "120"): ("FFF", (3,)),
    (6, "35"): ("AF", (2, 1, 1, 1, 1)),
    (6, "56"): ("FFF", (3,)),
    (4, "15"): ("AF", (2, 1, 1)),
    (4, "20"): ("FFF", (2, 1)),
    (4, "20′"): ("FFF", (3,)),
    (4, "1"): ("AF", ()),
    (3, "3"): ("F", (1,)),
    (3, "3*"): ("A", (1, 1)),
    (3, "6"): ("FF", (2,)),
    (3, "8"): ("AF", (2, 1)),
    (3, "10"): ("FFF", (3,)),
    (3, "1"): ("AF", ()),
    (2, "1"): ("AF", ()),
}

# Slice order of the shipped multiplet tables (rows run from the highest
# particle to the lowest): identity = (flavor label, 2J) or (label, charge).
_CTX_ORDER = {
    (8, "63"): (("15", 2), ("1", 2), ("15", 0)),
    (8, "120"): (("20′", 3), ("20", 1)),
    (6, "35"): (("8", 2), ("1", 2), ("8", 0)),
    (6, "56"): (("10", 3), ("8", 1)),
    (4, "15"): (("8", 0), ("3*", 1), ("3", -1), ("1", 0)),
    (4, "20"): (("8", 0), ("6", 1), ("3*", 1), ("3", 2)),
    (4, "20′"): (("10", 0), ("6", 1), ("3", 2), ("1", 3)),
    (3, "8"): (("3", 0), ("2", -1), ("2", 1), ("1", 0)),
    (3, "10"): (("4", 0), ("3", 1), ("2", 2), ("1", 3)),
    (3, "6"): (("3", 0), ("2", 1), ("1", 2)),
    (3, "3"): (("2", 0), ("1", 1)),
    (3, "3*"): (("2", 0), ("1", -1)),
}

# Reference matrix elements fixing the relative slice signs of the factor
# representations: (bra slice, bra key, generator (i, j), ket slice, ket key);
# the element <bra| E^i_j |ket> is made strictly positive by flipping the bra
# slice.  The ket slices (vector/decuplet rows) keep the fill's sign.
_ANCHORS = {
    (8, "63"): (
        ((("15", 0), (1, -1, 0, 0, 0)), (1, 5), (("15", 2), (1, -1, 0, 0, 2))),
        ((("1", 2), (0, 0, 0, 0, 2)), (1, 2), (("15", 2), (1, -1, 0, 0, 2))),
    ),
    (8, "120"): (
        ((("20", 1), (2, 0, 1, 0, 1)), (1, 5), (("20′", 3), (2, 0, 1, 0, 3))),
    ),
    (6, "35"): (
        ((("8", 0), (1, -1, 0, 0)), (1, 4), (("8", 2), (1, -1, 0, 2))),
        ((("1", 2), (0, 0, 0, 2)), (1, 2), (("8", 2), (1, -1, 0, 2))),
    ),
    (6, "56"): (
        ((("8", 1), (2, 0, 1, 1)), (1, 4), (("10", 3), (2, 0, 1, 3))),
    ),
}


def slice_identity(stack, blk):
    """(flavor display label, tag) of a level-1 slice: tag is 2J for the
    spin-flavor chains and the frozen U(1) count for the plain chains."""
    key = blk.top_key
    if stack.spinful:
        rows, _ = _rows_from_net(key[: stack.n_f])
        return (irrep(stack.n_f, rows).display_label, key[stack.n_f])
    if stack.n == 2:
        return ("1", key[1])
    rows, _ = _rows_from_net(key[: stack.n - 1])
    return (irrep(stack.n - 1, rows).display_label, key[stack.n - 1])


class FactorRep:
    """A factor irrep built once in its own word space, with cached rational
    matrices of every ladder operator restricted to the block."""

    __slots__ = (
        "n",
        "label",
        "irrep",
        "stack",
        "space",
        "ws",
        "block",
        "store",
        "states",
        "n2s",
        "keys",
        "dim",
        "fine_top",
        "fine_mult",
        "ctx_perm",
        "_mats",
        "_isos",
        "_lock",
    )

    def __init__(self, n, label, rep_id, stack, space, ws, block, fine_top):
        self.n = n
        self.label = label
        self.irrep = rep_id
        self.stack = stack
        self.space = space
        self.ws = ws
        self.block = block
        self.store = block.store
        self.states = block.store.states
        self.n2s = block.store.n2s
        self.keys = block.store.keys
        self.dim = block.dim
        self.fine_top = fine_top
        self.fine_mult = _net_weights(n, fine_top)
        order = _CTX_ORDER.get((n, label))
        if order is None:
            self.ctx_perm = None
        else:
            ids = [slice_identity(stack, s) for s in block.subs]
            if sorted(ids, key=repr) != sorted(order, key=repr):
                raise IncompleteDecomposition(f"slice content of {label} unexpected: {ids!r}")
            self.ctx_perm = tuple(ids.index(want) for want in order)
        self._mats = {}
        self._isos = {}
        self._lock = Lock()

    def mat_col(self, lid, up, a):
        key = (lid, up, a)
        col = self._mats.get(key)
        if col is None:
            with self._lock:
                col = self._mats.get(key)
                if col is None:
                    col = self._mat_col(lid, up, a)
                    self._mats[key] = col
        return col

    def _mat_col(self, lid, up, a):
        w = self.ws.apply(lid, up, self.states[a])
        if not w:
            return {}
        sh = self.stack.shift(lid)
        tk = _ksub(self.keys[a], sh) if up else _kadd(self.keys[a], sh)
        col = {}
        check = 0
        for a2 in self.block.class_map().get(tk, ()):
            c = sl.dot(w, self.states[a2])
            if c:
                col[a2] = Fraction(c) / self.n2s[a2]
                check += Fraction(c * c) / self.n2s[a2]
        if check != sl.norm2(w):
            raise IncompleteDecomposition("factor block not closed under a ladder")
        return col

    def __repr__(self):
        return f"FactorRep(SU({self.n}) {self.label})"


def _apply_anchor_fixes(stack, ws, store, block, anchors):
    ids = [slice_identity(stack, s) for s in block.subs]

    def locate(slice_id, key):
        sub = block.subs[ids.index(slice_id)]
        hits = [i for i in range(sub.lo, sub.hi) if store.keys[i] == key]
        if len(hits) != 1:
            raise IncompleteDecomposition(f"reference state not unique at {key!r}")
        return sub, hits[0]

    for (bra_id, bra_key), (gi, gj), (ket_id, ket_key) in anchors:
        bra_sub, bra_i = locate(bra_id, bra_key)
        _, ket_i = locate(ket_id, ket_key)
        moved = sl.apply(generator(ws.space, gi, gj), store.states[ket_i])
        el = sl.dot(moved, store.states[bra_i])
        if el == 0:
            raise ZeroAnchor(f"reference element {bra_id}|E^{gi}_{gj}|{ket_id} vanishes")
        if el < 0:
            for i in range(bra_sub.lo, bra_sub.hi):
                store.states[i] = _negate(store.states[i])


_REP_CACHE = {}
_REP_LOCK = Lock()


def standard_rep(n, label):
    """Memoized canonical construction of a factor irrep in its word space."""
    key = (n, _normalize_label(str(label)))
    rep = _REP_CACHE.get(key)
    if rep is not None:
        return rep
    with _REP_LOCK:
        rep = _REP_CACHE.get(key)
        if rep is None:
            rep = _build_rep(n, key[1])
            _REP_CACHE[key] = rep
    return rep


def _build_rep(n, label):
    spec = _REALIZATION.get((n, label))
    if spec is None:
        if n == 2 and label.isdigit() and int(label) >= 2:
            spec = ("F" * (int(label) - 1), (int(label) - 1,))
        else:
            raise UnknownIrrep(f"no canonical realization for SU({n}) {label!r}")
    factors, rows = spec
    stack = stack_for(n)
    space = build_space(n, factors)
    ws = WordWorkspace(stack, space)
    net_total = factors.count("F") - factors.count("A")
    shift = Fraction(net_total - sum(rows), n)
    if shift.denominator != 1:
        raise IncompleteDecomposition(f"realization mismatch for {label}")
    padded = tuple(rows) + (0,) * (n - len(rows))
    hw_net = tuple(r + int(shift) for r in padded)
    span = [{b: 1} for b in range(space.dimension) if ws.net(b) == hw_net]
    raisings = [ws.op(lid, True) for lid in stack.levels[0]]
    tops = joint_null_space(raisings, span)
    if not tops or (len(tops) > 1 and (n, label) != (4, "20")):
        raise IncompleteDecomposition(f"highest-weight space of {label} has dim {len(tops)}")
    store = BlockStore()
    block = _fill(stack, 0, ws, dict(tops[0]), store)
    anchors = _ANCHORS.get((n, label))
    if anchors:
        _apply_anchor_fixes(stack, ws, store, block, anchors)
    rep_id = irrep(n, rows)
    return FactorRep(n, label, rep_id, stack, space, ws, block, hw_net)


# ---------------------------------------------------------------------------
# coupling


class CouplingContext:
    """Enumeration order of uncoupled slice pairs for overlap anchoring.

    `major` = 1 orders pairs by the first factor's slice (the shipped table
    order for the factor representations), = 2 by the second factor's; the
    same major is reused at every depth of the recursion.
    """

    __slots__ = ("order1", "order2", "major")

    def __init__(self, order1=None, order2=None, major=1):
        self.order1 = order1
        self.order2 = order2
        self.major = major

    def pairs(self, n1, n2):
        o1 = self.order1 if self.order1 is not None else range(n1)
        o2 = self.order2 if self.order2 is not None else range(n2)
        if self.major == 1:
            return [(i, j) for i in o1 for j in o2]
        return [(i, j) for j in o2 for i in o1]

    def sub(self):
        if self.order1 is None and self.order2 is None:
            return self
        return CouplingContext(None, None, self.major)


def coupling_context(rep1, rep2, attend_second=False):
    return CouplingContext(rep1.ctx_perm, rep2.ctx_perm, 2 if attend_second else 1)


# ---------------------------------------------------------------------------
# uncoupled families: canonical standard products carried onto slice pairs


_PROD_CACHE = {}
_TENSOR_CACHE = {}
_PROD_LOCK = RLock()


def standard_product(n, lab1, lab2):
    """Memoized canonical coupling of two standard factor irreps."""
    key = (n, _normalize_label(str(lab1)), _normalize_label(str(lab2)))
    prod = _PROD_CACHE.get(key)
    if prod is not None:
        return prod
    with _PROD_LOCK:
        prod = _PROD_CACHE.get(key)
        if prod is None:
            prod = CoupledProduct(standard_rep(n, lab1), standard_rep(n, lab2))
            _PROD_CACHE[key] = prod
    return prod


class TensorWorkspace:
    """Ladder action on flavor (x) spin state pairs of two standard reps.

    Vectors are dicts over a*dim_s + b with the factor-norm metric; the
    flavor ladders act on the first index only and the spin ladder on the
    second, so a spin-flavor slice can be rebuilt with its own fill agenda."""

    __slots__ = ("fl", "sp", "d2")

    def __init__(self, fl, sp):
        self.fl = fl
        self.sp = sp
        self.d2 = sp.dim

    def key_of_pair(self, q):
        a, b = divmod(q, self.d2)
        ks = self.sp.keys[b]
        return self.fl.keys[a] + (ks[0] - ks[1],)

    def key_of(self, v):
        return self.key_of_pair(min(v))

    def apply(self, lid, up, v):
        out = {}
        d2 = self.d2
        spin = lid[0] == "S"
        for q, c in v.items():
            a, b = divmod(q, d2)
            if spin:
                col = self.sp.mat_col(("E", 1), up, b)
                for b2, e in col.items():
                    qq = a * d2 + b2
                    ce = out.get(qq, 0) + c * e
                    if ce:
                        out[qq] = ce
                    else:
                        out.pop(qq, None)
            else:
                col = self.fl.mat_col(("E", lid[1]), up, a)
                for a2, e in col.items():
                    qq = a2 * d2 + b
                    ce = out.get(qq, 0) + c * e
                    if ce:
                        out[qq] = ce
                    else:
                        out.pop(qq, None)
        return out

    def dot(self, v, w):
        if len(w) < len(v):
            v, w = w, v
        nf, ns = self.fl.n2s, self.sp.n2s
        d2 = self.d2
        tot = 0
        for q, c in v.items():
            cw = w.get(q)
            if cw:
                a, b = divmod(q, d2)
                tot += c * cw * nf[a] * ns[b]
        return tot

    def norm2(self, v):
        nf, ns = self.fl.n2s, self.sp.n2s
        d2 = self.d2
        tot = 0
        for q, c in v.items():
            a, b = divmod(q, d2)
            tot += c * c * nf[a] * ns[b]
        return tot


class TensorRep:
    """A flavor (x) spin irrep pair refilled under the spin-flavor agenda, so
    its states align positionally with any realized slice of that content."""

    __slots__ = ("ws", "block", "store", "d2", "_exp")

    def __init__(self, stack, fl, sp):
        self.ws = TensorWorkspace(fl, sp)
        self.d2 = sp.dim
        self.store = BlockStore()
        self.block = _fill(stack, 1, self.ws, {0: 1}, self.store)
        self._exp = {}

    def expand(self, q):
        """Coefficients of the tensor basis state q over the fill states."""
        exp = self._exp.get(q)
        if exp is None:
            blk = self.block
            key = self.ws.key_of_pair(q)
            mq = self.ws.norm2({q: 1})
            exp = {}
            for t in blk.class_map().get(key, ()):
                c = self.store.states[t].get(q)
                if c:
                    exp[t - blk.lo] = Fraction(c * mq, self.store.n2s[t])
            self._exp[q] = exp
        return exp


def _tensor_rep(stack, flab, j2):
    key = (stack.n, flab, j2)
    tr = _TENSOR_CACHE.get(key)
    if tr is None:
        with _PROD_LOCK:
            tr = _TENSOR_CACHE.get(key)
            if tr is None:
                fl = standard_rep(stack.n_f, flab)
                sp = standard_rep(2, str(j2 + 1))
                tr = TensorRep(stack, fl, sp)
                _TENSOR_CACHE[key] = tr
    return tr


def _slice_iso(rep, pos, sub):
    """Positional carry-over from the standard construction of a slice's
    content onto the slice itself: (abstract rep, store positions, scales).

    Both bases run the same fill agenda from matched tops (the class keys
    differ by a uniform shift that leaves the agenda order intact), so state
    t of one realizes state t of the other and the norm ratio
    A_t*N_0/(N_t*A_0) is the square of the rational returned in scales[t]."""
    iso = rep._isos.get(pos)
    if iso is not None:
        return iso
    stack = rep.stack
    lab, tag = slice_identity(stack, sub)
    if stack.spinful:
        absr = _tensor_rep(stack, lab, tag)
        width = stack.n_f
    else:
        absr = standard_rep(stack.n - 1, lab)
        width = stack.n - 1
    ablock = absr.block
    if ablock.dim != sub.dim:
        raise IncompleteDecomposition(f"slice content mismatch for {lab}")
    akeys = [ablock.key(t) for t in range(ablock.dim)]
    skeys = [sub.key(t) for t in range(sub.dim)]
    tail = len(akeys[0]) - width
    frozen = skeys[0][width + tail :]
    diff = sum(skeys[0][:width]) - sum(akeys[0][:width])
    if diff % width:
        raise IncompleteDecomposition(f"slice key shift mismatch for {lab}")
    shift = diff // width
    used = [False] * sub.dim
    local = []
    for t in range(ablock.dim):
        want = tuple(x + shift for x in akeys[t][:width]) + akeys[t][width:]
        for u in range(sub.dim):
            if used[u]:
                continue
            ku = skeys[u]
            if ku[: width + tail] == want and ku[width + tail :] == frozen:
                used[u] = True
                local.append(u)
                break
        else:
            raise IncompleteDecomposition(f"unmatched slice state in {lab}")
    base = rep.block.lo
    a0 = ablock.norm2(0)
    n0 = sub.norm2(local[0])
    positions = []
    scales = []
    for t in range(ablock.dim):
        u = local[t]
        r = Fraction(ablock.norm2(t) * n0, sub.norm2(u) * a0)
        scales.append(rational_sqrt(r))
        positions.append(sub.lo - base + u)
    iso = (absr, tuple(positions), tuple(scales))
    rep._isos[pos] = iso
    return iso


def _family_tops(stack, pw, i, j, s1, s2):
    """Highest-weight vectors of every family irrep of one slice pair, as
    carried-over canonical product states: [(vector, gamma label)]."""
    if stack.spinful:
        return _spin_family_tops(stack, pw, i, j, s1, s2)
    lab1, _ = slice_identity(stack, s1)
    lab2, _ = slice_identity(stack, s2)
    sp = standard_product(stack.n - 1, lab1, lab2)
    _, pos1, sc1 = _slice_iso(pw.rep1, i, s1)
    _, pos2, sc2 = _slice_iso(pw.rep2, j, s2)
    d2 = pw.d2
    ds = sp.pw.d2
    tops = []
    for blk in sp.blocks:
        out = {}
        for p, c in blk.top_state().items():
            a, b = divmod(p, ds)
            out[pos1[a] * d2 + pos2[b]] = Fraction(c) * sc1[a] * sc2[b]
        tops.append((sl._int_reduce(out), blk.sigma))
    return tops


def _spin_family_tops(stack, pw, i, j, s1, s2):
    """Family tops of a spin-flavor slice pair: the flavor and spin parts
    couple independently, expanded over the tensor fill states and carried
    onto the realized slices."""
    lab1, j21 = slice_identity(stack, s1)
    lab2, j22 = slice_identity(stack, s2)
    pf = standard_product(stack.n_f, lab1, lab2)
    ps = standard_product(2, str(j21 + 1), str(j22 + 1))
    t1, pos1, sc1 = _slice_iso(pw.rep1, i, s1)
    t2, pos2, sc2 = _slice_iso(pw.rep2, j, s2)
    d2 = pw.d2
    tops = []
    for bf in pf.blocks:
        vf = bf.top_state()
        for bs in ps.blocks:
            vs = bs.top_state()
            acc = {}
            for p, cf in vf.items():
                a, b = divmod(p, pf.pw.d2)
                for q, cs in vs.items():
                    al, be = divmod(q, ps.pw.d2)
                    cc = Fraction(cf) * cs
                    for z1, x1 in t1.expand(a * t1.d2 + al).items():
                        for z2, x2 in t2.expand(b * t2.d2 + be).items():
                            kk = (z1, z2)
                            cv = acc.get(kk, 0) + cc * x1 * x2
                            if cv:
                                acc[kk] = cv
                            else:
                                acc.pop(kk, None)
            out = {}
            for (z1, z2), c in acc.items():
                out[pos1[z1] * d2 + pos2[z2]] = c * sc1[z1] * sc2[z2]
            tops.append((sl._int_reduce(out), bf.sigma))
    return tops


def _indep(pw, vecs):
    return [v for v, _ in _orth(pw, vecs)]


def _split_eigen(pw, H, apply_fn):
    """Split span(H) into +1/-1 eigenspaces of an involution."""
    plus, minus = [], []
    for v in H:
        sv = apply_fn(v)
        p = sl._int_reduce({q: v.get(q, 0) + sv.get(q, 0) for q in set(v) | set(sv)})
        m = sl._int_reduce({q: v.get(q, 0) - sv.get(q, 0) for q in set(v) | set(sv)})
        if p:
            plus.append(p)
        if m:
            minus.append(m)
    return _indep(pw, plus), _indep(pw, minus)


def _cartan_split(pw, H, entries):
    """Separate same-class births whose full-group weights differ (only the
    spin-flavor top level can merge distinct highest weights in one class)."""
    basis = _orth(pw, H)
    n = pw.stack.n
    base = 2 * max(abs(x) for net, _ in entries for x in net) + 2
    weights = [base ** i for i in range(n)]
    tshift = Fraction(sum(entries[0][0]), n)
    lam = {net: sum(w * (x - tshift) for w, x in zip(weights, net)) for net, _ in entries}
    parts = []
    for net, mult in entries:
        vs = []
        for vec, _ in basis:
            w = vec
            for net2, _ in entries:
                if net2 == net or not w:
                    continue
                dw = pw.diag_apply(weights, w)
                w = sl._int_reduce(sl.add_scaled(dw, w, -lam[net2]))
            if w:
                vs.append(w)
        vs = _indep(pw, vs)
        if len(vs) != mult:
            raise IncompleteDecomposition("diagonal split failed to separate births")
        parts.append((net, vs))
    return parts


def _anchor_sign(pw, vec, anchors):
    """Make the overlap with the first nonvanishing reference positive."""
    for fb in anchors:
        c = pw.dot(vec, fb.top_state())
        if c:
            return (vec if c > 0 else _negate(vec)), fb
    raise ZeroAnchor("no reference overlap at a birth class")


def _resolve_copies(pw, v1, v2, H, anchors):
    """Resolve degenerate births: returns [(top, sigma, parity, anchor_ref)].

    Identical factors split by exchange parity (symmetric copy first);
    genuine multiplicities in asymmetric products are separated by ordered
    overlaps with the uncoupled families (Gram-Schmidt of projections)."""
    same = v1 is v2 and pw.rep1 is pw.rep2
    if len(H) == 1 and not same:
        top, ref = _anchor_sign(pw, H[0], anchors)
        return [(top, None, None, ref)]
    if same:
        plus, minus = _split_eigen(pw, H, pw.swap)
        out = []
        for vecs, par in ((plus, 1), (minus, -1)):
            for vec in vecs:
                top, ref = _anchor_sign(pw, vec, anchors)
                out.append((top, None, par, ref))
        if len(out) != len(H):
            raise IncompleteDecomposition("exchange split lost a copy")
        if len(out) > 1:
            if len(out) > 2:
                raise IncompleteDecomposition("unexpected triple degeneracy under exchange")
            out = [(t, s, p, r) for (t, _, p, r), s in zip(out, ("s", "a"))]
        return out
    basis = _orth(pw, H)
    chosen = []
    refs = []
    for fb in anchors:
        if len(chosen) == len(H):
            break
        proj = _project_span(pw, fb.top_state(), basis)
        if not proj:
            continue
        r = _gs_residual(pw, proj, chosen)
        if r is None:
            continue
        if pw.dot(r, fb.top_state()) <= 0:
            raise PhaseObstruction("ordered-overlap copy lost its positive anchor")
        chosen.append((r, pw.norm2(r)))
        refs.append(fb)
    if len(chosen) != len(H):
        raise ZeroAnchor("not enough reference overlaps to separate copies")
    return [
        (vec, "sab"[pos], None, refs[pos]) for pos, (vec, _) in enumerate(chosen)
    ]


def _conventional_subs(stack, blk):
    """Indices of the slices that can carry a plain-chain block's sign
    convention: the largest sub-chain irreps in the branching (dimension
    ties are kept and checked for agreement by the caller)."""
    dims = []
    for s in blk.subs:
        label = slice_identity(stack, s)[0]
        dims.append(int("".join(ch for ch in label if ch.isdigit())))
    best = max(dims)
    return [i for i, d in enumerate(dims) if d == best]


def _first_overlap(pw, sub, anchor_at):
    """First uncoupled family with nonzero overlap at a slice, and its sign."""
    for fb in anchor_at.get(sub.top_key, ()):
        d = pw.dot(sub.state(0), fb.top_state())
        if d:
            return fb, (1 if d > 0 else -1)
    raise ZeroAnchor("no reference overlap at the conventional slice")


def _orient_block(stack, pw, blk, anchor_at):
    """Give a filled plain-chain block its conventional overall sign: positive
    overlap with the first uncoupled family seen at the conventional slice."""
    cands = _conventional_subs(stack, blk)
    ref, sign = _first_overlap(pw, blk.subs[cands[0]], anchor_at)
    for i in cands[1:]:
        if _first_overlap(pw, blk.subs[i], anchor_at)[1] != sign:
            raise PhaseObstruction("tied sign-convention slices disagree")
    if sign < 0:
        store = blk.store
        for i in range(blk.lo, blk.hi):
            store.states[i] = {q: -c for q, c in store.states[i].items()}
    return ref


def _resolve_pure(stack, k, pw, v1, v2, H, anchor_at, store):
    """Fill and orient the plain-chain blocks born from the span H.

    Lone births fill directly; identical factors split by exchange parity
    (symmetric copy first).  Genuine multiplicities in asymmetric products
    are ordered and phased at the conventional slice: probe fills expose each
    copy's overlap with the ordered uncoupled families there, and the copies
    are the Gram-Schmidt sequence of those projections."""
    same = v1 is v2 and pw.rep1 is pw.rep2
    out = []
    if len(H) == 1 or same:
        seq = [(h, None) for h in H]
        if same:
            plus, minus = _split_eigen(pw, H, pw.swap)
            seq = [(v, 1) for v in plus] + [(v, -1) for v in minus]
            if len(seq) != len(H):
                raise IncompleteDecomposition("exchange split lost a copy")
            if len(seq) > 2:
                raise IncompleteDecomposition("unexpected triple degeneracy under exchange")
        for top, par in seq:
            blk = _fill(stack, k, pw, top, store)
            blk.parity = par
            blk.anchor_ref = _orient_block(stack, pw, blk, anchor_at)
            out.append(blk)
        if len(out) > 1:
            for blk, s in zip(out, ("s", "a")):
                blk.sigma = s
        return out
    basis = _indep(pw, H)
    probes = [_fill(stack, k, pw, h, BlockStore()) for h in basis]
    layout = [s.top_key for s in probes[0].subs]
    for pb in probes[1:]:
        if [s.top_key for s in pb.subs] != layout:
            raise IncompleteDecomposition("probe fills disagree on slice layout")
    sidx = _conventional_subs(stack, probes[0])[0]
    # Scales aligning raw integer fills with normalized copies: the products
    # norm2(slice top) * norm2(block top) fall in one square class.
    weights = []
    base = None
    for pb in probes:
        prod_n2 = Fraction(pb.subs[sidx].norm2(0)) * pb.norm2(0)
        if base is None:
            base = prod_n2
            weights.append(Fraction(1))
        else:
            weights.append(rational_sqrt(base / prod_n2))
    chosen = []
    refs = []
    for fb in anchor_at.get(layout[sidx], ()):
        if len(chosen) == len(H):
            break
        acc = {}
        for j, pb in enumerate(probes):
            d = pw.dot(pb.subs[sidx].state(0), fb.top_state())
            if d:
                acc = sl.add_scaled(acc, basis[j], d * weights[j])
        proj = sl._int_reduce(acc)
        if not proj:
            continue
        r = _gs_residual(pw, proj, chosen)
        if r is None:
            continue
        if pw.dot(r, proj) <= 0:
            raise PhaseObstruction("ordered-overlap copy lost its positive anchor")
        chosen.append((r, pw.norm2(r)))
        refs.append(fb)
    if len(chosen) != len(H):
        raise ZeroAnchor("not enough reference overlaps to separate copies")
    for pos, (top, _) in enumerate(chosen):
        blk = _fill(stack, k, pw, top, store)
        blk.sigma = "sab"[pos]
        blk.anchor_ref = refs[pos]
        out.append(blk)
    return out


def _fill_sf(stack, pw, top, mkey, fine, anchor_at, store):
    """Top-level block fill for the spin-flavor chains: slices are located by
    transport but re-anchored (scale-up sign from the context order), and no
    cross-slice sign pass runs — coupled bases keep the anchored phases."""
    top = sl._int_reduce(top)
    proj = {}
    for net, m in _net_weights(stack.n, fine).items():
        kk = stack.project(net)
        proj[kk] = proj.get(kk, 0) + m
    btop = dict(_peel(stack, 1, proj))
    remaining = dict(proj)
    classes = {}
    heap = []
    queued = set()
    lads = stack.levels[0]
    shifts = [stack.shift(lid) for lid in lads]
    lo = len(store.states)

    def register(blk):
        for i in range(blk.lo, blk.hi):
            kk = store.keys[i]
            classes.setdefault(kk, []).append(i)
            left = remaining.get(kk, 0) - 1
            if left < 0:
                raise IncompleteDecomposition(f"weight surplus at {kk!r}")
            remaining[kk] = left
            for sh in shifts:
                t = _kadd(kk, sh)
                if t not in queued:
                    queued.add(t)
                    heapq.heappush(heap, stack.heap_token(t))

    if btop.get(mkey) != 1:
        raise IncompleteDecomposition("block top class is not simple")
    first = _fill(stack, 1, pw, top, store)
    subs = [first]
    register(first)
    while heap:
        m = heapq.heappop(heap)[2]
        need = btop.get(m, 0)
        if not need:
            if remaining.get(m, 0):
                raise IncompleteDecomposition(f"class {m!r} missing states, no slice top")
            continue
        cands = []
        for li, sh in enumerate(shifts):
            for i in classes.get(_ksub(m, sh), ()):
                cands.append((i, li))
        cands.sort()
        span = []
        for i, li in cands:
            if len(span) == need:
                break
            w = pw.apply(lads[li], False, store.states[i])
            if not w:
                continue
            members = [(store.states[j], store.n2s[j]) for j in classes.get(m, ())]
            members.extend(span)
            r = _gs_residual(pw, w, members)
            if r is not None:
                span.append((r, pw.norm2(r)))
        if len(span) != need:
            raise IncompleteDecomposition(f"found {len(span)}/{need} slice tops at {m!r}")
        chosen = []
        refs = []
        for fb in anchor_at.get(m, ()):
            if len(chosen) == need:
                break
            proj_a = _project_span(pw, fb.top_state(), span)
            if not proj_a:
                continue
            r = _gs_residual(pw, proj_a, chosen)
            if r is None:
                continue
            if pw.dot(r, fb.top_state()) <= 0:
                raise PhaseObstruction("slice anchor lost positivity")
            chosen.append((r, pw.norm2(r)))
            refs.append(fb)
        if len(chosen) != need:
            raise ZeroAnchor(f"could not anchor {need} slice(s) at {m!r}")
        for pos, (r, _) in enumerate(chosen):
            sub = _fill(stack, 1, pw, r, store)
            sub.gamma = None if need == 1 else "sab"[pos]
            sub.anchor_ref = refs[pos]
            register(sub)
            subs.append(sub)
    left = [kk for kk, v in remaining.items() if v]
    if left:
        raise IncompleteDecomposition(f"unreached classes {left!r}")
    return Block(store, 0, mkey, lo, len(store.states), tuple(subs))


def _couple(stack, k, v1, v2, pw, ctx):
    """Resolve the level-k product of two blocks into level-k blocks.

    Returns (blocks, families) where families maps each ordered slice pair
    (i, j) to the uncoupled basis anchored against: the canonical standard
    product of the two slice contents carried onto the pair (or, when the
    sub-chain is su(2) or trivial, the directly resolved sub-coupling).
    Identical factors keep only pairs with i at or before j in table order;
    the dropped mirrors never carry new overlap information."""
    lads = stack.levels[k]
    store = BlockStore()
    if not lads:
        vec = {pw.pair(v1.lo, v2.lo): 1}
        key = pw.key_of(vec)
        store.append(vec, pw.norm2(vec), key)
        return [Block(store, k, key, 0, 1, ())], {}
    pairs = ctx.pairs(len(v1.subs), len(v2.subs))
    if k == 0 and pw.rep1 is pw.rep2:
        o1 = ctx.order1 if ctx.order1 is not None else tuple(range(len(v1.subs)))
        rank = {s: p for p, s in enumerate(o1)}
        pairs = [(i, j) for (i, j) in pairs if rank[i] <= rank[j]]
    fams = {}
    if len(stack.levels[k + 1]) > 1:
        for (i, j) in pairs:
            fstore = BlockStore()
            built = []
            for ttop, glabel in _family_tops(stack, pw, i, j, v1.subs[i], v2.subs[j]):
                fb = _fill(stack, k + 1, pw, ttop, fstore)
                fb.sigma = glabel
                built.append(fb)
            fams[(i, j)] = built
    else:
        sub_ctx = ctx.sub()
        for (i, j) in pairs:
            fams[(i, j)], _ = _couple(stack, k + 1, v1.subs[i], v2.subs[j], pw, sub_ctx)
    anchor_at = {}
    for (i, j) in pairs:
        for fb in fams[(i, j)]:
            anchor_at.setdefault(fb.top_key, []).append(fb)
    spin_top = stack.spinful and k == 0
    if spin_top:
        conv = _convolve(pw.rep1.fine_mult, pw.rep2.fine_mult)
        series = [(stack.project(net), net, m) for net, m in _peel_fine(stack.n, conv)]
    else:
        conv = _convolve(
            _level_weights(stack, k, v1.top_key), _level_weights(stack, k, v2.top_key)
        )
        series = [(mk, None, m) for mk, m in _peel(stack, k, conv)]
    grouped = {}
    order = []
    for mk, net, m in series:
        if mk not in grouped:
            grouped[mk] = []
            order.append(mk)
        grouped[mk].append((net, m))
    blocks = []
    for mk in order:
        entries = grouped[mk]
        span = [{p: 1} for p in pw.class_pairs(mk, v1, v2)]
        ops = [
            SparseOp(colfn=(lambda p, l=lid: pw.apply(l, True, {p: 1}))) for lid in lads
        ]
        H = [dict(h) for h in joint_null_space(ops, span)]
        if len(H) != sum(m for _, m in entries):
            raise IncompleteDecomposition(
                f"null space at {mk!r} has dim {len(H)}, series wants "
                f"{sum(m for _, m in entries)}"
            )
        if len(entries) == 1:
            parts = [(entries[0][0], H)]
        else:
            parts = _cartan_split(pw, H, entries)
        anchors = anchor_at.get(mk, ())
        for (net, hvecs), (_, mult) in zip(parts, entries):
            if len(hvecs) != mult:
                raise IncompleteDecomposition("split multiplicity mismatch")
            if not spin_top and stack.levels[k + 1]:
                for blk in _resolve_pure(stack, k, pw, v1, v2, hvecs, anchor_at, store):
                    blk.fine_key = mk
                    blocks.append(blk)
                continue
            copies = _resolve_copies(pw, v1, v2, hvecs, anchors)
            for top, sigma, parity, ref in copies:
                if spin_top:
                    blk = _fill_sf(stack, pw, top, mk, net, anchor_at, store)
                    blk.subs[0].anchor_ref = ref
                else:
                    blk = _fill(stack, k, pw, top, store)
                blk.sigma = sigma
                blk.parity = parity
                blk.fine_key = net if spin_top else mk
                blk.anchor_ref = ref
                blocks.append(blk)
    return blocks, fams


class CoupledProduct:
    """A fully resolved R1 x R2 product: the coupled blocks, the uncoupled
    slice-pair families, and the exchange data needed for the +-1 signs."""

    __slots__ = ("rep1", "rep2", "stack", "pw", "ctx", "blocks", "fams", "_rev")

    def __init__(self, rep1, rep2, ctx=None):
        if rep1.n != rep2.n:
            raise ValueError("factors live in different groups")
        self.rep1 = rep1
        self.rep2 = rep2
        self.stack = rep1.stack
        self.ctx = ctx if ctx is not None else coupling_context(rep1, rep2)
        self.pw = PairWorkspace(self.stack, rep1, rep2)
        self.blocks, self.fams = _couple(
            self.stack, 0, rep1.block, rep2.block, self.pw, self.ctx
        )
        total = sum(b.dim for b in self.blocks)
        if total != rep1.dim * rep2.dim:
            raise IncompleteDecomposition(
                f"coupled dimensions sum to {total}, expected {rep1.dim * rep2.dim}"
            )
        self._rev = None

    def rep_of(self, blk):
        rows, _ = _rows_from_net(blk.fine_key)
        return irrep(self.stack.n, rows)

    def reversed_product(self):
        """The swapped coupling, resolved the way it would itself be
        tabulated.  A baryon-type first factor keeps the overlap-anchoring
        priority when it moves to second place."""
        if self._rev is None:
            attend = self.stack.spinful and self.rep1.label in ("120", "56")
            self._rev = CoupledProduct(
                self.rep2,
                self.rep1,
                coupling_context(self.rep2, self.rep1, attend_second=attend),
            )
        return self._rev


# ---------------------------------------------------------------------------
# public operations


class MultipletBlock:
    """One irrep block: identity, degeneracy tags, and its basis states as
    (vector, squared norm) pairs in chain order."""

    __slots__ = ("irrep", "gamma", "sigma", "states", "tree", "stack", "ws")

    def __init__(self, rep_id, gamma, sigma, tree, stack, ws):
        self.irrep = rep_id
        self.gamma = gamma
        self.sigma = sigma
        self.tree = tree
        self.stack = stack
        self.ws = ws
        store = tree.store
        self.states = [
            (store.states[i], store.n2s[i]) for i in range(tree.lo, tree.hi)
        ]

    def refresh(self):
        store = self.tree.store
        self.states = [
            (store.states[i], store.n2s[i]) for i in range(self.tree.lo, self.tree.hi)
        ]

    def __repr__(self):
        tag = self.irrep.display_label
        if self.sigma:
            tag += f"_{self.sigma}"
        return f"MultipletBlock({tag}, dim={len(self.states)})"


def decompose_group(space, restrict=None):
    """Complete orthogonal decomposition of a word space (or an invariant
    subspace of it given by weight-homogeneous spanning vectors) into irrep
    blocks, highest remaining weight first."""
    stack = stack_for(space.n)
    ws = WordWorkspace(stack, space)
    if restrict is None:
        basis = [{b: 1} for b in range(space.dimension)]
    else:
        basis = []
        for v in restrict:
            v = sl._int_reduce(v)
            if not v:
                raise ValueError("restriction contains a zero vector")
            nets = {ws.net(b) for b in v}
            if len(nets) != 1:
                raise ValueError("restriction vectors must be weight-homogeneous")
            basis.append(v)
    mult = {}
    by_net = {}
    for v in basis:
        net = ws.fine_key(v)
        mult[net] = mult.get(net, 0) + 1
        by_net.setdefault(net, []).append(v)
    raisings = [ws.op(lid, True) for lid in stack.levels[0]]
    out = []
    total = 0
    for net, copies in _peel_fine(space.n, mult):
        tops = joint_null_space(raisings, by_net[net])
        if len(tops) != copies:
            raise IncompleteDecomposition(
                f"top space at {net!r} has dim {len(tops)}, expected {copies}"
            )
        rows, _ = _rows_from_net(net)
        rep_id = irrep(space.n, rows)
        for top in tops:
            store = BlockStore()
            blk = _fill(stack, 0, ws, dict(top), store)
            blk.fine_key = net
            out.append(MultipletBlock(rep_id, None, None, blk, stack, ws))
            total += blk.dim
    if total != len(basis):
        raise IncompleteDecomposition(f"decomposed {total} of {len(basis)} states")
    return out


def _product_id(stack, sub):
    key = sub.top_key
    if stack.spinful:
        rows, _ = _rows_from_net(key[: stack.n_f])
        return mu_spin(irrep(stack.n_f, rows), key[stack.n_f] + 1)
    if stack.n == 4:
        rows, _ = _rows_from_net(key[:3])
        return mu_u1(irrep(3, rows), key[3])
    if stack.n == 3:
        rows, _ = _rows_from_net(key[:2])
        return mu_u1(irrep(2, rows), Fraction(key[0] + key[1] - 2 * key[2], 3))
    raise ValueError("no product subgroup below SU(3)")


def decompose_product_subgroup(block, embedding=None):
    """Split an irrep block of the big group into its subgroup blocks (the
    level-1 slices of the chain fill), tagging repeated subgroup irreps with
    s/a/b in slice order where no coupling-derived tag is present."""
    tree = block.tree
    stack = block.stack
    if embedding is not None:
        want = 2 * stack.n_f if stack.spinful else stack.n
        if embedding.n != want:
            raise ValueError("embedding does not match the block's chain")
    pids = [_product_id(stack, sub) for sub in tree.subs]
    counts = {}
    for pid in pids:
        counts[pid] = counts.get(pid, 0) + 1
    seen = {}
    out = []
    for sub, pid in zip(tree.subs, pids):
        gamma = sub.gamma
        if gamma is None and counts[pid] > 1:
            pos = seen.get(pid, 0)
            seen[pid] = pos + 1
            gamma = "sab"[pos]
        out.append(MultipletBlock(pid, gamma, None, sub, stack, block.ws))
    return out


def baird_fix(block):
    """Per-state sign pass on a flavor-group block: flip state signs so every
    simple-lowering matrix element is >= 0; returns the same block."""
    tree = block.tree
    store = tree.store
    ws = block.ws
    stack = block.stack
    lads = stack.levels[tree.level]
    idxs = list(range(tree.lo, tree.hi))
    edges = {}

    def element(i, j, lid):
        w = ws.apply(lid, False, store.states[i])
        return ws.dot(w, store.states[j]) if w else 0

    flips = {idxs[0]: 1}
    pending = [idxs[0]]
    while pending:
        nxt = []
        for i in pending:
            for j in idxs:
                if j in flips:
                    continue
                for lid in lads:
                    e = element(i, j, lid) or element(j, i, lid)
                    if e:
                        edges[(i, j)] = e
                        flips[j] = flips[i] * (1 if e > 0 else -1)
                        nxt.append(j)
                        break
        if not nxt and len(flips) < len(idxs):
            raise PhaseObstruction("state sign graph disconnected")
        pending = nxt
    for i, s in flips.items():
        if s < 0:
            store.states[i] = _negate(store.states[i])
    for i in idxs:
        for lid in lads:
            w = ws.apply(lid, False, store.states[i])
            if not w:
                continue
            for j in idxs:
                if ws.dot(w, store.states[j]) < 0:
                    raise PhaseObstruction("no sign assignment satisfies nonnegativity")
    block.refresh()
    return block


def fix_anchor_phases(block, anchors=None):
    """Fix the relative slice signs of a factor-style block by the reference
    matrix elements (defaults to the shipped anchors for its label)."""
    stack = block.stack
    if anchors is None:
        anchors = None
        for (n, label), data in _ANCHORS.items():
            if n == stack.n and irrep(n, _REALIZATION[(n, label)][1]) == block.irrep:
                anchors = data
                break
        if anchors is None:
            raise ZeroAnchor(f"no reference anchors for {block.irrep!r}")
    _apply_anchor_fixes(stack, block.ws, block.tree.store, block.tree, anchors)
    block.refresh()
    return block


def resolve_cg(space, ctx=None):
    """Resolve a composite product into coupled blocks.

    `space` is a CoupledProduct or a (FactorRep, FactorRep) pair; returns one
    MultipletBlock per coupled irrep copy, in extraction order (highest
    weight first, symmetric copy before antisymmetric)."""
    if isinstance(space, CoupledProduct):
        product = space
    else:
        rep1, rep2 = space
        product = CoupledProduct(rep1, rep2, ctx)
    out = []
    for blk in product.blocks:
        mb = MultipletBlock(product.rep_of(blk), None, blk.sigma, blk, product.stack, product.pw)
        out.append(mb)
    return out


def _swapped_partner(product, blk, sub):
    """The (block, slice) of the swapped product matching (blk, sub)."""
    rev = product.reversed_product()
    rid = tuple(blk.fine_key)
    cands = [
        b
        for b in rev.blocks
        if tuple(b.fine_key) == rid and b.sigma == blk.sigma
    ]
    if len(cands) != 1:
        raise InconsistentXi("swapped product has no matching block")
    rblk = cands[0]
    if sub is None:
        return rblk, None
    sid = slice_identity(product.stack, sub)
    subs = [
        s
        for s in rblk.subs
        if slice_identity(rev.stack, s) == sid and s.gamma == sub.gamma
    ]
    if len(subs) != 1:
        raise InconsistentXi("swapped product has no matching slice")
    return rblk, subs[0]


def _xi_of_states(product, rev, sub, rsub):
    d2f, d2r = product.pw.d2, rev.pw.d2
    if sub.dim != rsub.dim:
        raise InconsistentXi("swapped slice has different dimension")
    sign = None
    for t in range(sub.dim):
        v = sub.state(t)
        w = rsub.state(t)
        if sub.norm2(t) != rsub.norm2(t) or len(v) != len(w):
            raise InconsistentXi("swapped state is not a sign multiple")
        mapped = {}
        for p, c in w.items():
            a, b = divmod(p, d2r)
            mapped[b * d2f + a] = c
        if mapped == v:
            s = 1
        elif mapped == _negate(v):
            s = -1
        else:
            raise InconsistentXi("swapped state is not a sign multiple")
        if sign is None:
            sign = s
        elif sign != s:
            raise InconsistentXi("exchange sign varies across chain labels")
    return sign


def exchange_phase(sf_context):
    """The +-1 sign relating a coupled block to its factor-swapped partner.

    `sf_context` is (product, block) or (product, block, slice): identical
    factors give the block's exchange parity; otherwise the swapped product
    is resolved with its own enumeration order and the matching state is
    required to be an exact sign multiple, constant across chain labels
    (and across the whole block when no slice is given)."""
    product, blk = sf_context[0], sf_context[1]
    sub = sf_context[2] if len(sf_context) > 2 else None
    if product.rep1 is product.rep2:
        if blk.parity is None:
            raise InconsistentXi("block has no exchange parity")
        return blk.parity
    rev = product.reversed_product()
    rblk, rsub = _swapped_partner(product, blk, sub)
    if sub is not None:
        return _xi_of_states(product, rev, sub, rsub)
    signs = {
        _xi_of_states(product, rev, s, _swapped_partner(product, blk, s)[1])
        for s in blk.subs
    }
    if len(signs) != 1:
        raise InconsistentXi("exchange sign varies across slices")
    return signs.pop()
