from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from liecg import sparse_linalg as sl


def F(a, b=1):
    return Fraction(a, b)


small_vecs = st.dictionaries(
    st.integers(min_value=0, max_value=7),
    st.builds(F, st.integers(min_value=-9, max_value=9).filter(bool), st.integers(min_value=1, max_value=9)),
    max_size=6,
)


def test_dot_examples():
    assert sl.dot(sl.svec({0: 1}), sl.svec({1: 1})) == 0
    assert sl.dot(sl.svec({0: F(1, 2), 3: 2}), sl.svec({3: F(1, 4)})) == F(1, 2)
    v = sl.svec({0: F(3, 5), 1: F(4, 5)})
    assert sl.dot(v, v) == 1


def test_svec_canonical_order_and_pruning():
    v = sl.svec({5: 1, 2: 0, 1: -3})
    assert list(v.keys()) == [1, 5]
    assert 2 not in v


def test_apply_explicit_columns():
    # a 2x2 nilpotent: e(0) = 0, e(1) = |0>
    op = sl.SparseOp(columns={1: {0: 1}})
    assert sl.apply(op, sl.svec({1: F(2)})) == {0: F(2)}
    assert sl.apply(op, sl.svec({0: 5})) == {}
    # linearity on a random-ish combination
    assert sl.apply(op, sl.svec({0: 3, 1: -2})) == {0: -2}


def test_apply_lazy_column_function():
    op = sl.SparseOp(colfn=lambda i: {i + 1: 1})
    assert sl.apply(op, sl.svec({3: 4})) == {4: 4}
    assert 3 in op.columns  # memoized


def test_orthogonalize_examples():
    out = sl.orthogonalize([{0: 1}, {0: 1, 1: 1}])
    assert out == [({0: 1}, 1), ({1: 1}, 1)]
    out = sl.orthogonalize([{0: 1, 1: 1}, {0: 2, 1: 2}])
    assert len(out) == 1 and out[0][1] == 2
    out = sl.orthogonalize([{0: 1, 1: 2}, {1: 5}])
    assert len(out) == 2
    assert sl.dot(out[0][0], out[1][0]) == 0
    for v, n2 in out:
        assert sl.norm2(v) == n2


@settings(max_examples=300)
@given(st.lists(small_vecs, max_size=5))
def test_orthogonalize_properties(vs):
    out = sl.orthogonalize(vs)
    for i, (v, n2) in enumerate(out):
        assert n2 == sl.norm2(v) > 0
        for w, _ in out[i + 1 :]:
            assert sl.dot(v, w) == 0
    # spanning: every input reduces to zero against the output basis
    for v in vs:
        assert sl.gs_insert(out, v) is None


@settings(max_examples=200)
@given(small_vecs, small_vecs, st.builds(F, st.integers(-5, 5), st.integers(1, 5)))
def test_apply_linearity(v, w, a):
    op = sl.SparseOp(colfn=lambda i: {(i * 3) % 8: 1, (i + 2) % 8: F(-1, 2)})
    lhs = sl.apply(op, sl.svec(sl.add_scaled(w, v, a)))
    rhs = sl.add_scaled(sl.apply(op, sl.svec(w)), sl.apply(op, sl.svec(v)), a)
    assert sl.vec_eq(lhs, rhs)


def test_joint_null_space_su2_singlet():
    # E acting on fund x fund of SU(2): raising both factors.
    # words |11>=0 |12>=1 |21>=2 |22>=3; raising turns letter 2 into 1.
    cols = {1: {0: 1}, 2: {0: 1}, 3: {1: 1, 2: 1}}
    op = sl.SparseOp(columns=cols)
    null = sl.joint_null_space([op], [{1: 1}, {2: 1}])
    assert len(null) == 1
    v = null[0]
    assert v == {1: 1, 2: -1} or v == {1: -1, 2: 1}
    # canonical: first nonzero coordinate positive
    assert v[min(v)] > 0


def test_joint_null_space_trivial_cases():
    vs = [sl.svec({0: 1}), sl.svec({1: 1})]
    assert sl.joint_null_space([], vs) == vs
    ident = sl.SparseOp(colfn=lambda i: {i: 1})
    assert sl.joint_null_space([ident], vs) == []


@settings(max_examples=150, deadline=None)
@given(
    st.lists(st.lists(st.integers(-4, 4), min_size=4, max_size=4), min_size=1, max_size=5),
)
def test_null_space_matches_sympy(mat):
    rows = [[Fraction(x) for x in r] for r in mat]
    got = sl.null_space_dense(rows, 4)
    m = sympy.Matrix(mat)
    want = m.nullspace()
    assert len(got) == len(want)
    for x in got:
        assert all(sum(r[i] * x[i] for i in range(4)) == 0 for r in rows)
    # same span: sympy's basis reduces to zero against ours
    if got:
        basis = sl.orthogonalize([{i: c for i, c in enumerate(x) if c} for x in got])
        for w in want:
            vec = {i: Fraction(w[i]) for i in range(4) if w[i]}
            assert sl.gs_insert(basis, vec) is None


def test_null_space_pivot_strategies_identical():
    rows = [
        [F(2), F(4), F(-2), F(0)],
        [F(1), F(2), F(-1), F(0)],
        [F(0), F(3), F(3), F(6)],
    ]
    a = sl.null_space_dense(rows, 4, pivot="first")
    b = sl.null_space_dense(rows, 4, pivot="minbits")
    assert a == b
    with pytest.raises(AssertionError):
        sl.rref(rows, 4, pivot="nonsense")


def test_joint_null_space_pivot_invariance_bigger():
    ops = [
        sl.SparseOp(columns={0: {0: 2, 2: 1}, 1: {0: 4, 2: 2}, 2: {1: 1}, 3: {1: 2}}),
        sl.SparseOp(columns={0: {5: 1}, 1: {5: 2}, 2: {5: 0}, 3: {}}),
    ]
    basis = [{0: 1}, {1: 1}, {2: 1}, {3: 1}]
    a = sl.joint_null_space(ops, basis, pivot="first")
    b = sl.joint_null_space(ops, basis, pivot="minbits")
    assert a == b
    for v in a:
        for op in ops:
            assert sl.apply(op, v) == {}


def test_canonical():
    v = sl.canonical({3: F(-2, 3), 5: F(4, 3)})
    assert v == {3: 1, 5: -2}
    assert sl.canonical({}) == {}
    assert sl.canonical({2: F(0)}) == {}


def test_project_onto():
    basis = sl.orthogonalize([{0: 1, 1: 1}, {0: 1, 1: -1, 2: 2}])
    p = sl.project_onto({0: 1}, basis)
    # projection stays in span, difference orthogonal to span
    diff = sl.add_scaled({0: 1}, p, -1)
    for b, _ in basis:
        assert sl.dot(diff, b) == 0
    assert sl.gs_insert(basis, p) is None
