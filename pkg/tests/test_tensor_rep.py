"""Generator action, weights, embeddings, and chain charges on word spaces."""

import random
from fractions import Fraction

import pytest

from liecg.irrep_catalog import CHAIN_SU2, CHAIN_SU3, CHAIN_SU4, CHAIN_SU8
from liecg.sparse_linalg import apply, combine, vec_eq
from liecg.tensor_rep import (
    ANTIFUND,
    FUND,
    build_space,
    chain_charges,
    generator,
    product_embedding,
    simple_raisings,
    weight_of,
)


def basis_vec(space, word):
    return {space.index(word): 1}


def test_build_space_examples():
    assert build_space(8, [ANTIFUND, FUND]).dimension == 64
    assert build_space(8, [FUND, FUND, FUND]).dimension == 512
    assert build_space(2, [FUND]).dimension == 2
    with pytest.raises(ValueError):
        build_space(8, [])
    with pytest.raises(ValueError):
        build_space(1, [FUND])


def test_word_index_round_trip():
    space = build_space(3, [FUND, ANTIFUND, FUND])
    for idx in range(space.dimension):
        assert space.index(space.word(idx)) == idx
    # big-endian: concatenated words concatenate index digits
    assert space.index((2, 3, 1)) == ((2 - 1) * 3 + (3 - 1)) * 3 + (1 - 1)


def test_diagonal_generator_values():
    fund = build_space(3, [FUND])
    assert apply(generator(fund, 1, 1), basis_vec(fund, (1,))) == {
        0: Fraction(2, 3)}
    anti = build_space(3, [ANTIFUND])
    assert apply(generator(anti, 1, 1), basis_vec(anti, (1,))) == {
        0: Fraction(-2, 3)}


def test_off_diagonal_action_is_integer():
    space = build_space(4, [ANTIFUND, FUND, FUND])
    rng = random.Random(7)
    for _ in range(40):
        i, j = rng.sample(range(1, 5), 2)
        col = generator(space, i, j).col(rng.randrange(space.dimension))
        assert all(isinstance(c, int) for c in col.values())


@pytest.mark.parametrize(
    "n,factors",
    [(8, [ANTIFUND, FUND]), (3, [FUND, FUND]), (4, [FUND, FUND, FUND])],
)
def test_commutator_relations(n, factors):
    # [E^i_j, E^k_l] = delta(i,l) E^k_j - delta(k,j) E^i_l on sampled words
    space = build_space(n, factors)
    rng = random.Random(42)
    for _ in range(50):
        i, j, k, l = (rng.randrange(1, n + 1) for _ in range(4))
        v = basis_vec(space, space.word(rng.randrange(space.dimension)))
        eij, ekl = generator(space, i, j), generator(space, k, l)
        lhs = combine([(1, apply(eij, apply(ekl, v))),
                       (-1, apply(ekl, apply(eij, v)))])
        rhs = combine([
            (1 if i == l else 0, apply(generator(space, k, j), v)),
            (-1 if k == j else 0, apply(generator(space, i, l), v)),
        ])
        assert vec_eq(lhs, rhs), (i, j, k, l)


def test_weight_examples():
    fund2 = build_space(2, [FUND])
    assert weight_of(fund2, 0) == (Fraction(1, 2), Fraction(-1, 2))
    anti2 = build_space(2, [ANTIFUND])
    assert weight_of(anti2, 0) == (Fraction(-1, 2), Fraction(1, 2))
    cube = build_space(8, [FUND] * 3)
    w = weight_of(cube, cube.index((1, 1, 1)))
    assert w == (Fraction(21, 8),) + (Fraction(-3, 8),) * 7


def test_weights_sum_to_zero_and_match_diagonal_action():
    space = build_space(4, [ANTIFUND, FUND, FUND])
    rng = random.Random(3)
    for _ in range(25):
        b = rng.randrange(space.dimension)
        w = weight_of(space, b)
        assert sum(w) == 0
        for k in range(1, 5):
            col = apply(generator(space, k, k), {b: 1})
            assert col == ({b: w[k - 1]} if w[k - 1] else {})


def test_adjoint_highest_weight_word():
    space = build_space(8, [ANTIFUND, FUND])
    hw = basis_vec(space, (8, 1))
    for op in simple_raisings(space):
        assert apply(op, hw) == {}
    assert weight_of(space, space.index((8, 1))) == (
        1, 0, 0, 0, 0, 0, 0, -1)


def test_casimir_on_adjoint_highest_weight():
    # sum over i,j of E^i_j E^j_i acts as 2n on the adjoint
    space = build_space(8, [ANTIFUND, FUND])
    v = basis_vec(space, (8, 1))
    total = combine(
        [(1, apply(generator(space, i, j), apply(generator(space, j, i), v)))
         for i in range(1, 9) for j in range(1, 9)]
    )
    assert vec_eq(total, {space.index((8, 1)): 16})


def test_product_embedding_index_order():
    emb = product_embedding(4)
    ups = [emb.composite_index(f, +1) for f in range(1, 5)]
    downs = [emb.composite_index(f, -1) for f in range(1, 5)]
    assert ups == [1, 2, 3, 4] and downs == [5, 6, 7, 8]
    with pytest.raises(ValueError):
        product_embedding(5)


def test_embedded_flavor_and_spin_commute():
    emb = product_embedding(4)
    space = build_space(8, [ANTIFUND, FUND])
    rng = random.Random(11)
    for _ in range(15):
        a, b = rng.randrange(1, 5), rng.randrange(1, 5)
        s, t = rng.sample((+1, -1), 2)
        F = emb.flavor_generator(space, a, b)
        S = emb.spin_generator(space, s, t)
        v = basis_vec(space, space.word(rng.randrange(space.dimension)))
        assert vec_eq(apply(F, apply(S, v)), apply(S, apply(F, v)))


def test_embedded_flavor_algebra_closes():
    emb = product_embedding(3)
    space = build_space(6, [FUND, FUND, FUND])
    rng = random.Random(5)
    for _ in range(15):
        a, b, c, d = (rng.randrange(1, 4) for _ in range(4))
        Fab = emb.flavor_generator(space, a, b)
        Fcd = emb.flavor_generator(space, c, d)
        v = basis_vec(space, space.word(rng.randrange(space.dimension)))
        lhs = combine([(1, apply(Fab, apply(Fcd, v))),
                       (-1, apply(Fcd, apply(Fab, v)))])
        rhs = combine([
            (1 if a == d else 0, apply(emb.flavor_generator(space, c, b), v)),
            (-1 if c == b else 0, apply(emb.flavor_generator(space, a, d), v)),
        ])
        assert vec_eq(lhs, rhs)


def test_chain_charges_meson_words():
    space = build_space(8, [ANTIFUND, FUND])
    # anti-d with spin up, u with spin up: the I_z = +1 pion-type word
    C, Y, iz, jz = chain_charges(space, space.index((2, 1)), CHAIN_SU8)
    assert (C, Y, iz, jz) == (0, 0, 1, 0)
    # anti-d spin up, c spin down: charmed, hypercharge -1/3
    C, Y, iz, jz = chain_charges(space, space.index((2, 8)), CHAIN_SU8)
    assert (C, Y, iz, jz) == (1, Fraction(-1, 3), Fraction(1, 2), -1)


def test_chain_charges_baryon_words():
    space = build_space(8, [FUND] * 3)
    C, Y, iz, jz = chain_charges(space, space.index((4, 4, 4)), CHAIN_SU8)
    assert (C, Y, iz, jz) == (3, 0, 0, Fraction(3, 2))
    C, Y, iz, jz = chain_charges(space, space.index((1, 1, 4)), CHAIN_SU8)
    assert (C, Y, iz, jz) == (1, Fraction(2, 3), 1, Fraction(3, 2))


def test_chain_charges_flavor_levels():
    su4 = build_space(4, [ANTIFUND, FUND])
    assert chain_charges(su4, su4.index((2, 4)), CHAIN_SU4) == (
        1, Fraction(-1, 3), Fraction(1, 2), 0)
    su3 = build_space(3, [ANTIFUND, FUND])
    assert chain_charges(su3, su3.index((3, 1)), CHAIN_SU3) == (
        0, 1, Fraction(1, 2), 0)
    spin = build_space(2, [FUND, FUND])
    assert chain_charges(spin, spin.index((1, 1)), CHAIN_SU2) == (0, 0, 0, 1)
    with pytest.raises(ValueError):
        chain_charges(su4, 0, CHAIN_SU8)
