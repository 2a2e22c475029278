"""Hypothesis strategies and independent oracles shared by the tests."""

import numpy as np
from hypothesis import strategies as st

from polylift.gridfun import GridMatrix
from polylift.laurent import LaurentPoly
from polylift.polymat import PolyMatrix

finite = dict(allow_nan=False, allow_infinity=False)
coeff = st.complex_numbers(max_magnitude=1.0, **finite).map(
    lambda c: c if abs(c) > 1e-3 else c + 0.5)


@st.composite
def polys(draw, max_len=6, min_exp=(-3, 3), ordinary=False):
    c = draw(st.lists(coeff, min_size=1, max_size=max_len))
    lo = 0 if ordinary else draw(st.integers(*min_exp))
    return LaurentPoly(c, lo)


unit_points = st.floats(0.0, 1.0, **finite).map(lambda t: np.exp(2j * np.pi * t))
seeds = st.integers(0, 2**32 - 1)


def value_at(p, z):
    """Term-by-term sum of a LaurentPoly, independent of the library's evaluator."""
    z = np.asarray(z, dtype=complex)
    return sum(c * z ** (p.min_exp + k) for k, c in enumerate(p.coeffs)) + 0 * z


def matrix_at(a, z):
    """A PolyMatrix evaluated entry by entry at one point."""
    return np.array([[value_at(a[i, j], z) for j in range(a.n)] for i in range(a.n)],
                    dtype=complex)


@st.composite
def poly_matrices(draw, n, max_len=3):
    return PolyMatrix.from_rows([[draw(polys(max_len=max_len, min_exp=(-1, 1)))
                                  for _ in range(n)] for _ in range(n)])


def residual_from_functions(phi, psi, m):
    """Residual rows (S_j* g0) and (S_j* f1), each S_j* a brute-force sum over square roots.

    g0(w) = phi(w^2) and f1(w) = w psi(w^2) live on the 2m grid; entry j at
    z_k averages conj(w^j) h(w) over the two fine points with w^2 = z_k.
    """
    fine = np.exp(2j * np.pi * np.arange(2 * m) / (2 * m))
    g0 = phi(fine ** 2)
    f1 = fine * psi(fine ** 2)
    out = np.zeros((2, 2, m), dtype=complex)
    for k in range(m):
        roots = [k, k + m]
        for j in range(2):
            out[0, j, k] = np.mean([np.conj(fine[r] ** j) * g0[r] for r in roots])
            out[1, j, k] = np.mean([np.conj(fine[r] ** j) * f1[r] for r in roots])
    return GridMatrix(out)
