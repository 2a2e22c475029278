import numpy as np
import pytest
from hypothesis import given, strategies as st

from polylift.errors import BadArity, DimensionMismatch, SingularScale
from polylift.laurent import LaurentPoly
from polylift.polymat import (LiftingStep, PolyMatrix, StepKind, corner_is_monomial, det,
                              invert_step, matmul, polyphase_apply, realize_step,
                              step_inverse_matrix)
from helpers import matrix_at, poly_matrices, polys, value_at

P = LaurentPoly
Z = P.monomial(1)
M = PolyMatrix.from_rows


def circle(k, seed=0):
    return np.exp(2j * np.pi * np.random.default_rng(seed).uniform(size=k))


@st.composite
def steps(draw, n):
    kind = draw(st.sampled_from(["lower", "upper", "scale", "shift"]))
    if kind == "scale":
        return LiftingStep.scale(draw(st.complex_numbers(min_magnitude=0.2, max_magnitude=5)))
    if kind == "shift":
        return LiftingStep.shift(draw(st.integers(-3, 3)))
    offset = draw(st.integers(1, n - 1))
    params = [draw(polys(max_len=3)) for _ in range(n - offset)]
    return LiftingStep(kind, params, offset)


# -- matmul / det -----------------------------------------------------------------

def test_matmul_examples():
    a = M([[1, 3], [Z, P([1, 3])]])
    assert matmul(PolyMatrix.identity(2), a) == a
    low = realize_step(LiftingStep.lower([P([2, 1])]), 2)
    assert matmul(low, step_inverse_matrix(LiftingStep.lower([P([2, 1])]), 2)) \
        == PolyMatrix.identity(2)
    prod = matmul(M([[1, 0], [Z, 1]]), M([[1, 3], [0, 1]]))
    assert prod.max_diff(a) == 0
    for z in circle(3):
        np.testing.assert_allclose(matrix_at(prod, z), [[1, 3], [z, 3 * z + 1]], atol=1e-14)


def test_matmul_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        matmul(PolyMatrix.identity(2), PolyMatrix.identity(3))


def test_det_examples():
    assert det(PolyMatrix.identity(3)) == P.constant(1)
    assert det(M([[1, P([0, 2, 5])], [0, 1]])) == P.constant(1)
    assert det(M([[1, 3], [Z, P([1, 3])]])) == P.constant(1)


@given(st.integers(2, 4).flatmap(poly_matrices), st.sampled_from(circle(5, seed=1)))
def test_det_matches_numpy(a, z):
    val = matrix_at(a, z)
    bound = 1e-10 * max(1, np.abs(val).max() ** a.n)
    assert abs(value_at(det(a), z) - np.linalg.det(val)) <= bound


pairs = st.integers(2, 3).flatmap(lambda n: st.tuples(poly_matrices(n), poly_matrices(n)))


@given(pairs)
def test_matmul_matches_pointwise_product(ab):
    a, b = ab
    z = circle(1, seed=2)[0]
    np.testing.assert_allclose(matrix_at(matmul(a, b), z), matrix_at(a, z) @ matrix_at(b, z),
                               atol=1e-10)


# -- lifting steps --------------------------------------------------------------------

def test_realize_examples():
    assert realize_step(LiftingStep.lower([P()]), 2) == PolyMatrix.identity(2)
    assert realize_step(LiftingStep.upper([Z]), 2) == M([[1, Z], [0, 1]])
    assert realize_step(LiftingStep.lower([Z, 1]), 3) == M([[1, 0, 0], [Z, 1, 0], [0, 1, 1]])
    assert realize_step(LiftingStep.scale(2), 3) == PolyMatrix.diagonal([2, 0.5, 1])
    assert realize_step(LiftingStep.shift(-2), 2) == PolyMatrix.diagonal([P.monomial(-2)] * 2)


def test_realize_offset_places_entries_on_pth_diagonal():
    m = realize_step(LiftingStep.lower([Z, 3], offset=2), 4)
    assert m[2, 0] == Z and m[3, 1] == P.constant(3) and m[1, 0].is_zero


def test_realize_arity():
    with pytest.raises(BadArity):
        realize_step(LiftingStep.upper([Z]), 3)


def test_invert_examples():
    inv = invert_step(LiftingStep.upper([3]))
    assert inv == LiftingStep.upper([-3])
    assert invert_step(LiftingStep.scale(2)) == LiftingStep.scale(0.5)
    assert invert_step(LiftingStep.shift(4)) == LiftingStep.shift(-4)
    got = step_inverse_matrix(LiftingStep.lower([Z, 1]), 3)
    assert got == M([[1, 0, 0], [-Z, 1, 0], [Z, -1, 1]])


def test_invert_zero_scale():
    with pytest.raises(SingularScale):
        invert_step(LiftingStep(StepKind.SCALE, 0))


@given(st.integers(2, 4).flatmap(lambda n: st.tuples(st.just(n), steps(n))))
def test_step_determinant(ns):
    n, s = ns
    want = P.monomial(n * s.params) if s.kind is StepKind.SHIFT else P.constant(1)
    assert det(realize_step(s, n)).max_diff(want) <= 1e-12


@given(st.integers(2, 4).flatmap(lambda n: st.tuples(st.just(n), steps(n))))
def test_step_times_inverse_is_identity(ns):
    n, s = ns
    prod = matmul(realize_step(s, n), step_inverse_matrix(s, n))
    assert prod.max_diff(PolyMatrix.identity(n)) <= 1e-12 * max(1, prod.max_abs())


# -- polyphase action -----------------------------------------------------------------

def test_polyphase_examples():
    assert polyphase_apply(PolyMatrix.identity(2)) == [P.constant(1), Z]
    assert polyphase_apply(M([[0, 1], [1, 0]])) == [Z, P.constant(1)]
    f = polyphase_apply(M([[1, 3], [Z, P([1, 3])]]))
    assert f == [P([1, 3]), P([0, 1, 1, 3])]


@given(pairs)
def test_polyphase_action_is_associative(ab):
    a, b = ab
    n = a.n
    fab, fb = polyphase_apply(matmul(a, b)), polyphase_apply(b)
    for z in circle(8, seed=4):
        lhs = np.array([value_at(f, z) for f in fab])
        rhs = matrix_at(a, z ** n) @ np.array([value_at(f, z) for f in fb])
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_corner_monomial_diagnostic():
    assert corner_is_monomial(M([[Z, 1], [P([1, 1]), P([1, 1])]]))
    assert not corner_is_monomial(M([[P([1, 1]), 1], [1, P([0, 1, 1])]]))
