"""Carrier spaces: tensor products of (anti)fundamental SU(n) factors.

Generators act letter by letter (Leibniz rule).  Off-diagonal generators have
integer matrix elements in the word basis — the -1/n trace term only shows up
on the diagonal ones — so decompositions can run in integer arithmetic and
take a single square root at reporting time.
"""

from __future__ import annotations

import threading
from fractions import Fraction

from .irrep_catalog import (
    CHAIN_SU2,
    CHAIN_SU3,
    CHAIN_SU4,
    CHAIN_SU6,
    CHAIN_SU8,
)
from .sparse_linalg import SparseOp, combine

FUND = "F"
ANTIFUND = "A"


class TensorSpace:
    """Tensor product of fundamental/antifundamental SU(n) factors.

    Basis words are tuples of letters in 1..n, one per factor, indexed
    big-endian: index = ((w0-1)*n + (w1-1))*n + ...  Concatenating factor
    lists therefore concatenates index digits, so the composite index of
    (word1, word2) is index1 * dim2 + index2.
    """

    __slots__ = ("n", "factors", "dimension", "_gens", "_lock")

    def __init__(self, n, factors):
        factors = tuple(factors)
        if n < 2:
            raise ValueError("rank must be >= 2")
        if not factors or any(f not in (FUND, ANTIFUND) for f in factors):
            raise ValueError(f"bad factor list {factors!r}")
        self.n = n
        self.factors = factors
        self.dimension = n ** len(factors)
        self._gens = {}
        self._lock = threading.Lock()

    def word(self, index):
        n = self.n
        out = []
        for _ in self.factors:
            out.append(index % n + 1)
            index //= n
        return tuple(reversed(out))

    def index(self, word):
        idx = 0
        for w in word:
            idx = idx * self.n + (w - 1)
        return idx

    def __eq__(self, other):
        return (
            isinstance(other, TensorSpace)
            and self.n == other.n
            and self.factors == other.factors
        )

    def __hash__(self):
        return hash((self.n, self.factors))

    def __repr__(self):
        return f"TensorSpace(SU({self.n}), {''.join(self.factors)})"


def build_space(n, factors):
    return TensorSpace(n, factors)


def _generator_column(space, i, j, b):
    word = space.word(b)
    if i == j:
        net = cnt = 0
        for letter, kind in zip(word, space.factors):
            if kind == FUND:
                net += 1
                if letter == i:
                    cnt += 1
            else:
                net -= 1
                if letter == i:
                    cnt -= 1
        coeff = cnt - Fraction(net, space.n)
        return {b: coeff} if coeff else {}
    col = {}
    for p, (letter, kind) in enumerate(zip(word, space.factors)):
        if kind == FUND:
            if letter == i:
                t = space.index(word[:p] + (j,) + word[p + 1 :])
                col[t] = col.get(t, 0) + 1
        elif letter == j:
            t = space.index(word[:p] + (i,) + word[p + 1 :])
            col[t] = col.get(t, 0) - 1
    return {t: c for t, c in col.items() if c}


def generator(space, i, j):
    """E^i_j as a SparseOp: moves fund letter i to j, antifund letter j to i."""
    if not (1 <= i <= space.n and 1 <= j <= space.n):
        raise ValueError(f"generator index out of range: ({i},{j})")
    with space._lock:
        op = space._gens.get((i, j))
        if op is None:
            op = SparseOp(colfn=lambda b: _generator_column(space, i, j, b))
            space._gens[(i, j)] = op
        return op


def simple_raisings(space):
    # E^{i+1}_i moves letter i+1 -> i, increasing the weight
    return [generator(space, i + 1, i) for i in range(1, space.n)]


def simple_lowerings(space):
    return [generator(space, i, i + 1) for i in range(1, space.n)]


def op_sum(ops):
    ops = list(ops)
    return SparseOp(colfn=lambda b: combine([(1, op.col(b)) for op in ops]))


def weight_of(space, basis_index):
    """Eigenvalues of the diagonal generators on one basis word."""
    word = space.word(basis_index)
    counts = [0] * space.n
    net = 0
    for letter, kind in zip(word, space.factors):
        if kind == FUND:
            counts[letter - 1] += 1
            net += 1
        else:
            counts[letter - 1] -= 1
            net -= 1
    shift = Fraction(net, space.n)
    return tuple(c - shift for c in counts)


class EmbeddingMap:
    """Subgroup embedding: either SU(n_f) x SU(2) inside SU(2 n_f), or the
    chain SU(n-1) x U(1) inside SU(n) on the leading n-1 letters."""

    __slots__ = ("kind", "n", "n_f")

    def __init__(self, kind, n, n_f=None):
        self.kind = kind
        self.n = n
        self.n_f = n_f

    def composite_index(self, f, s):
        """Letter for flavor f with spin s (+1 up, -1 down); up block first."""
        assert self.kind == "product_su" and s in (+1, -1)
        return f if s > 0 else f + self.n_f

    def flavor_generator(self, space, a, b):
        # F^a_b = sum over spins of E^(a,s)_(b,s)
        assert self.kind == "product_su"
        return op_sum(
            generator(space, self.composite_index(a, s), self.composite_index(b, s))
            for s in (+1, -1)
        )

    def spin_generator(self, space, s, t):
        # S^s_t = sum over flavors of E^(f,s)_(f,t)
        assert self.kind == "product_su"
        return op_sum(
            generator(space, self.composite_index(f, s), self.composite_index(f, t))
            for f in range(1, self.n_f + 1)
        )

    def sub_generator(self, space, a, b):
        assert self.kind == "chain_u1" and a < self.n and b < self.n
        return generator(space, a, b)


def product_embedding(n_f):
    if n_f not in (3, 4):
        raise ValueError("flavor rank must be 3 or 4")
    return EmbeddingMap("product_su", 2 * n_f, n_f)


def chain_embedding(n):
    return EmbeddingMap("chain_u1", n)


# hypercharge per flavor letter (u, d, s, c); charm carries none of it
_Y4 = (Fraction(1, 3), Fraction(1, 3), Fraction(-2, 3), Fraction(0))

CHAIN_FOR_RANK = {8: CHAIN_SU8, 6: CHAIN_SU6, 4: CHAIN_SU4, 3: CHAIN_SU3, 2: CHAIN_SU2}


def chain_charges(space, basis_index, chain):
    """Diagonal chain charges (C, Y, I_z, J_z) of one basis word."""
    word = space.word(basis_index)
    n_f = {CHAIN_SU8: 4, CHAIN_SU6: 3, CHAIN_SU4: 4, CHAIN_SU3: 3, CHAIN_SU2: 1}[chain]
    spinful = chain in (CHAIN_SU8, CHAIN_SU6)
    expected_n = 2 * n_f if spinful else (2 if chain == CHAIN_SU2 else n_f)
    if space.n != expected_n:
        raise ValueError(f"space rank {space.n} does not match chain {chain}")
    C = Y = Fraction(0)
    iz2 = jz2 = 0  # twice I_z, twice J_z (kept integral)
    for letter, kind in zip(word, space.factors):
        sgn = 1 if kind == FUND else -1
        if chain == CHAIN_SU2:
            jz2 += sgn * (1 if letter == 1 else -1)
            continue
        f = (letter - 1) % n_f + 1
        if spinful:
            jz2 += sgn * (1 if letter <= n_f else -1)
        if f == 4:
            C += sgn
        else:
            Y += sgn * _Y4[f - 1]
        if f == 1:
            iz2 += sgn
        elif f == 2:
            iz2 -= sgn
    return C, Y, Fraction(iz2, 2), Fraction(jz2, 2)
