"""Diagram arithmetic against an independent dimension formula and shipped data."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from liecg.irrep_catalog import (
    CHAIN_SU4,
    CHAIN_SU6,
    CHAIN_SU8,
    UnknownIrrep,
    UnlabeledDiagram,
    YoungDiagram,
    _TABLE1,
    conjugate,
    dimension,
    display_label,
    expected_reduction,
    highest_weight,
    irrep,
    irrep_from_label,
    mu_spin,
    mu_u1,
)


def weyl_dimension(n, rows):
    # product over i<j of (l_i - l_j + j - i)/(j - i); independent of hooks
    lam = list(rows) + [0] * (n - len(rows))
    num = den = 1
    for i in range(n):
        for j in range(i + 1, n):
            num *= lam[i] - lam[j] + j - i
            den *= j - i
    assert num % den == 0
    return num // den


def partitions_up_to(max_boxes, max_rows):
    """All partitions with at most max_boxes boxes and max_rows rows."""
    out = [()]
    def grow(prefix, remaining, cap):
        for part in range(min(cap, remaining), 0, -1):
            rows = prefix + (part,)
            out.append(rows)
            if len(rows) < max_rows:
                grow(rows, remaining - part, part)
    grow((), max_boxes, max_boxes)
    return out


def strip_decorations(label):
    return int(label.rstrip("*′″"))


def test_dimension_examples():
    assert dimension(YoungDiagram(8, (2, 1, 1, 1, 1, 1, 1))) == 63
    assert dimension(YoungDiagram(8, (1,))) == 8
    assert dimension(YoungDiagram(8, (4, 2, 1, 1, 1, 1, 1))) == 4752
    assert dimension(YoungDiagram(3, (2, 1))) == 8


def test_catalog_labels_round_trip():
    for n, table in _TABLE1.items():
        for rows, label in table.items():
            d = YoungDiagram(n, rows)
            assert display_label(d) == label
            assert dimension(d) == strip_decorations(label)
            assert irrep_from_label(n, label).diagram == d


def test_dimension_matches_weyl_formula():
    for n in (2, 3, 4, 6, 8):
        for rows in partitions_up_to(6, n):
            d = YoungDiagram(n, rows)
            assert dimension(d) == weyl_dimension(n, d.rows)


def test_conjugate_examples():
    assert conjugate(YoungDiagram(4, (3, 1))) == YoungDiagram(4, (3, 3, 2))
    assert conjugate(YoungDiagram(3, (2, 1))) == YoungDiagram(3, (2, 1))
    assert conjugate(YoungDiagram(3, (1,))) == YoungDiagram(3, (1, 1))


def test_conjugate_preserves_dimension():
    for n in (3, 4, 6, 8):
        for rows in partitions_up_to(6, n):
            d = YoungDiagram(n, rows)
            assert dimension(conjugate(d)) == dimension(d)


@st.composite
def diagrams(draw):
    n = draw(st.integers(min_value=2, max_value=8))
    rows = []
    cap = draw(st.integers(min_value=0, max_value=5))
    for _ in range(draw(st.integers(min_value=0, max_value=n))):
        if cap == 0:
            break
        cap = draw(st.integers(min_value=1, max_value=cap))
        rows.append(cap)
    return YoungDiagram(n, rows)


@given(diagrams())
def test_conjugate_is_an_involution(d):
    assert conjugate(conjugate(d)) == d


@given(diagrams())
def test_highest_weight_sums_to_zero(d):
    assert sum(highest_weight(d)) == 0


def test_full_columns_are_stripped():
    assert YoungDiagram(4, (3, 3, 3, 3)).rows == ()
    assert YoungDiagram(2, (2, 1)).rows == (1,)
    assert dimension(YoungDiagram(4, (4, 3, 3, 3))) == 4


def test_highest_weight_examples():
    assert highest_weight(YoungDiagram(2, (1,))) == (Fraction(1, 2), Fraction(-1, 2))
    assert highest_weight(YoungDiagram(5, ())) == (0, 0, 0, 0, 0)
    assert highest_weight(YoungDiagram(8, (2, 1, 1, 1, 1, 1, 1))) == (
        1, 0, 0, 0, 0, 0, 0, -1)


def test_display_label_examples():
    assert display_label(YoungDiagram(4, (2, 2))) == "20″"
    assert display_label(YoungDiagram(8, (3, 3, 2, 2, 2, 2, 2))) == "945*"
    assert display_label(YoungDiagram(3, (3, 2))) == "15*"


def test_display_label_derived_partner():
    # conjugate of a starred catalog entry inherits the bare name
    assert display_label(YoungDiagram(3, (4, 3))) == "24"
    assert conjugate(YoungDiagram(3, (4, 1))) == YoungDiagram(3, (4, 3))


def test_display_label_refuses_collisions():
    with pytest.raises(UnlabeledDiagram):
        display_label(YoungDiagram(4, (2, 2, 1)))  # dim 20, conjugate of 20
    with pytest.raises(UnlabeledDiagram):
        display_label(YoungDiagram(4, (3, 3, 3)))  # dim 20, conjugate of 20'


def test_irrep_from_label_ascii_primes():
    assert irrep_from_label(4, "20'").diagram.rows == (3,)
    assert irrep_from_label(4, "20''").diagram.rows == (2, 2)
    assert irrep_from_label(3, "15'").diagram.rows == (4,)
    assert irrep_from_label(2, "5").diagram.rows == (4,)
    assert irrep_from_label(6, "1").diagram.rows == ()
    with pytest.raises(UnknownIrrep):
        irrep_from_label(4, "999")


def test_irrep_identity_is_canonical():
    assert irrep(4, (3, 3, 3, 3)) is irrep(4, ())
    assert irrep(8, (2, 1, 1, 1, 1, 1, 1)).dimension == 63


def test_product_irrep_ids():
    mu = mu_spin(irrep_from_label(4, "15"), 3)
    assert mu.display_label == "15_3"
    assert mu == mu_spin(irrep(4, (2, 1, 1)), 3)
    nu = mu_u1(irrep_from_label(3, "8"), Fraction(1, 3))
    assert nu.display_label == "8(1/3)"
    with pytest.raises(ValueError):
        mu_u1(irrep_from_label(3, "8"), Fraction(1, 2))


def test_expected_reduction_smallest_rows():
    r63 = expected_reduction(irrep_from_label(8, "63"), CHAIN_SU8)
    labels = [(mu.display_label, g) for mu, g in r63]
    assert labels == [("1_3", None), ("15_1", None), ("15_3", None)]
    r120 = expected_reduction(irrep_from_label(8, "120"), CHAIN_SU8)
    assert [(mu.display_label, g) for mu, g in r120] == [
        ("20_2", None), ("20′_4", None)]


def test_expected_reduction_degenerate_rows():
    r1134 = expected_reduction(irrep_from_label(6, "1134"), CHAIN_SU6)
    assert len(r1134) == 23
    tagged = [(mu.display_label, g) for mu, g in r1134 if g == "b"]
    assert tagged == [("8_2", "b"), ("8_4", "b")]
    r4752 = expected_reduction(irrep_from_label(8, "4752"), CHAIN_SU8)
    assert len(r4752) == 26


def test_expected_reduction_unknown():
    with pytest.raises(UnknownIrrep):
        expected_reduction(irrep_from_label(8, "8"), CHAIN_SU8)
    with pytest.raises(UnknownIrrep):
        expected_reduction(irrep_from_label(8, "63"), CHAIN_SU4)


def test_reduction_rows_sum_to_dimension():
    for group_rank, chain in ((8, CHAIN_SU8), (6, CHAIN_SU6)):
        for rows, label in _TABLE1[group_rank].items():
            R = irrep(group_rank, rows)
            try:
                content = expected_reduction(R, chain)
            except UnknownIrrep:
                continue
            total = sum(mu.flavor.dimension * mu.tag for mu, _ in content)
            assert total == R.dimension, label


def test_equal_dimension_weight_ordering():
    trio = [irrep_from_label(4, lab) for lab in ("20", "20'", "20''")]
    ordered = sorted(trio, key=lambda r: r.weight_sort_key(), reverse=True)
    assert [r.display_label for r in ordered] == ["20′", "20", "20″"]
