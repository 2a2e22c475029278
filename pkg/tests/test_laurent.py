import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from polylift.errors import DivisionByZero, NotOrdinary, OffCircle, ZeroPolynomial
from polylift.laurent import (NEG_INF, LaurentPoly, add, divrem, eval, laurent_divrem, mul,
                              normalize_monomial, zero_tol)
from helpers import polys, unit_points, value_at

P = LaurentPoly
Z = P.monomial(1)


def random_circle(rng, k=3):
    return np.exp(2j * np.pi * rng.uniform(size=k))


# -- construction ---------------------------------------------------------------

def test_normalization_strips_zero_ends():
    p = P([0, 0, 1, 2, 0], 3)
    assert p.min_exp == 5 and list(p.coeffs) == [1, 2]
    assert p.degree() == 6


def test_zero_polynomial_is_canonical():
    z = P([0, 0])
    assert z.is_zero and z.min_exp == 0 and z.coeffs.size == 0
    assert z.degree() == NEG_INF


def test_zero_tolerance_is_configurable():
    with zero_tol(1e-3):
        assert P([1e-4, 1]).min_exp == 1
    assert P([1e-4, 1]).min_exp == 0


# -- add / mul ------------------------------------------------------------------

def test_add_examples():
    assert add(P([1, 1]), P()) == P([1, 1])
    assert add(Z, -Z).is_zero
    a, b = P([1, 2]), P([0, 3, 1])
    s = add(a, b)
    assert s == P([1, 5, 1])
    for z in random_circle(np.random.default_rng(0)):
        assert abs(value_at(s, z) - value_at(a, z) - value_at(b, z)) < 1e-12


def test_mul_examples():
    assert mul(P([1, 1]), P.constant(1)) == P([1, 1])
    assert mul(P.monomial(-1), Z) == P.constant(1)
    prod = mul(P([1, 1]), P([1, -1]))
    assert prod == P([1, 0, -1])
    for z in random_circle(np.random.default_rng(1)):
        assert abs(value_at(prod, z) - (1 + z) * (1 - z)) < 1e-12


@given(polys(), polys())
def test_mul_matches_convolution(a, b):
    p = mul(a, b)
    np.testing.assert_allclose(p.dense(a.min_exp + b.min_exp, int(a.degree() + b.degree())),
                               np.convolve(a.coeffs, b.coeffs), atol=1e-12)


@given(polys(), polys(), polys())
def test_mul_commutative_associative(a, b, c):
    assert mul(a, b).max_diff(mul(b, a)) <= 1e-12
    assert mul(mul(a, b), c).max_diff(mul(a, mul(b, c))) <= 1e-12 * max(
        1, mul(mul(a, b), c).max_abs())


@given(polys(), polys(), unit_points)
def test_eval_is_multiplicative(a, b, z):
    assert abs(eval(mul(a, b), z) - eval(a, z) * eval(b, z)) <= 1e-10


# -- divrem ---------------------------------------------------------------------

def test_divrem_examples():
    q, r = divrem(P([1, 0, 1]), Z)
    assert q == Z and r == P.constant(1)
    g = P([2, 1j, 3])
    q, r = divrem(g, g)
    assert q.max_diff(P.constant(1)) < 1e-15 and r.is_zero
    f, g = P([5, 2, 0, 1]), P([1, 0, 1])
    q, r = divrem(f, g)
    assert q.max_diff(Z) < 1e-15 and r.max_diff(P([5, 1])) < 1e-15
    assert (f - g * q).max_diff(r) < 1e-15


def test_divrem_matches_polydiv():
    rng = np.random.default_rng(3)
    f = rng.normal(size=7) + 1j * rng.normal(size=7)
    g = rng.normal(size=4) + 1j * rng.normal(size=4)
    q, r = divrem(P(f), P(g))
    qr, rr = np.polydiv(f[::-1], g[::-1])
    np.testing.assert_allclose(q.dense(0, 3), qr[::-1], atol=1e-12)
    np.testing.assert_allclose(r.dense(0, 2), np.pad(rr[::-1], (0, 3 - rr.size)), atol=1e-12)


def test_divrem_errors():
    with pytest.raises(DivisionByZero):
        divrem(P([1, 2]), P())
    with pytest.raises(NotOrdinary):
        divrem(P([1, 2], -1), P([1]))
    with pytest.raises(NotOrdinary):
        divrem(P([1, 2]), P([1, 1], -2))


@given(polys(ordinary=True, max_len=8), polys(ordinary=True, max_len=4))
def test_divrem_identity(f, g):
    assume(abs(g.leading()) > 0.1)
    q, r = divrem(f, g)
    scale = max(1.0, f.max_abs(), (g * q).max_abs())
    assert (g * q + r).max_diff(f) <= 1e-12 * scale
    assert r.degree() < g.degree()


@given(polys(max_len=8), polys(max_len=4))
def test_laurent_divrem_width_decreases(f, g):
    assume(abs(g.leading()) > 0.1 and abs(g.coeffs[0]) > 0.1)
    q, r = laurent_divrem(f, g)
    assert (g * q + r).max_diff(f) <= 1e-10 * max(1.0, (g * q).max_abs())
    assert r.is_zero or r.width() < g.width()


# -- eval / normalize_monomial ----------------------------------------------------

def test_eval_examples():
    assert eval(P.constant(1), 1j) == 1
    assert eval(Z, -1) == -1
    assert eval(P([1, 1, 1]), 1) == 3


def test_eval_off_circle():
    with pytest.raises(OffCircle):
        eval(Z, 1.1)


@given(polys(), unit_points)
def test_eval_matches_term_sum(p, z):
    assert abs(eval(p, z) - value_at(p, z)) <= 1e-10


def test_normalize_monomial_examples():
    assert normalize_monomial(P.monomial(3)) == (3, P.constant(1))
    assert normalize_monomial(P([1, 1], -1)) == (-1, P([1, 1]))
    l, q = normalize_monomial(P([2, 0, 1], 2))
    assert (l, q) == (2, P([2, 0, 1]))
    assert q.shift(l) == P([2, 0, 1], 2)
    with pytest.raises(ZeroPolynomial):
        normalize_monomial(P())


@given(polys())
def test_normalize_monomial_roundtrip(p):
    l, q = normalize_monomial(p)
    assert q.min_exp == 0 and q.coeff(0) != 0
    assert q.shift(l) == p


@given(polys(), st.integers(2, 4))
def test_upsample_downsample_inverse(p, n):
    for j in range(n):
        assert p.upsample(n, j).downsample(n, j) == p
