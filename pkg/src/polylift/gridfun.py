"""Matrix functions sampled on the unit circle and their least-squares lifting steps.

An L-infinity function on the circle is stored by its values at the M-th
roots of unity ``z_k = exp(2 pi i k / M)``; inner products and norms are
discrete means over the grid.  The optimal lower step removes from rows
1..N-1 their pointwise projection onto row 0; the optimal upper step does
the same against the last row.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cuntz import CuntzRep, grid_points, grid_s_adjoint, grid_s_apply
from .errors import DegenerateRow, DimensionMismatch, GridNotDivisible, LengthMismatch
from .laurent import LaurentPoly
from .polymat import PolyMatrix


@dataclass(frozen=True)
class GridFunction:
    """Samples of a function at the M-th roots of unity."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex).reshape(-1)
        if s.size < 1:
            raise LengthMismatch("a grid function needs at least one sample")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def m(self) -> int:
        return self.samples.size

    @classmethod
    def constant(cls, c: complex, m: int) -> GridFunction:
        return cls(np.full(m, c, dtype=complex))

    @classmethod
    def from_poly(cls, p: LaurentPoly, m: int) -> GridFunction:
        return cls(p(grid_points(m)))

    def _other(self, other) -> np.ndarray:
        if isinstance(other, GridFunction):
            if other.m != self.m:
                raise LengthMismatch(f"grid sizes {self.m} and {other.m} differ")
            return other.samples
        return np.asarray(other, dtype=complex)

    def __add__(self, other):
        return GridFunction(self.samples + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.samples - self._other(other))

    def __rsub__(self, other):
        return GridFunction(self._other(other) - self.samples)

    def __mul__(self, other):
        return GridFunction(self.samples * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return GridFunction(self.samples / self._other(other))

    def __neg__(self):
        return GridFunction(-self.samples)

    def conj(self) -> GridFunction:
        return GridFunction(np.conj(self.samples))

    def norm2(self) -> float:
        """Discrete mean of |f|^2, the grid version of the squared L2 norm."""
        return float(np.mean(np.abs(self.samples) ** 2))

    def sup(self) -> float:
        return float(np.abs(self.samples).max())

    def max_diff(self, other) -> float:
        return float(np.abs(self.samples - self._other(other)).max())


@dataclass(frozen=True)
class GridMatrix:
    """An N x N matrix function; ``values[i, j, k]`` is entry (i, j) at z_k."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.ndim != 3 or v.shape[0] != v.shape[1]:
            raise DimensionMismatch(f"expected shape (n, n, m), got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[2]

    @property
    def entries(self) -> list[list[GridFunction]]:
        return [[GridFunction(self.values[i, j]) for j in range(self.n)] for i in range(self.n)]

    def __getitem__(self, ij) -> GridFunction:
        i, j = ij
        return GridFunction(self.values[i, j])

    def row(self, i: int) -> np.ndarray:
        """Row i as an (n, m) array."""
        return self.values[i]

    @classmethod
    def from_entries(cls, rows: Sequence[Sequence[GridFunction]]) -> GridMatrix:
        return cls(np.array([[f.samples for f in row] for row in rows]))

    @classmethod
    def identity(cls, n: int, m: int) -> GridMatrix:
        return cls.constant(np.eye(n), m)

    @classmethod
    def constant(cls, mat, m: int) -> GridMatrix:
        mat = np.asarray(mat, dtype=complex)
        return cls(np.repeat(mat[:, :, None], m, axis=2))

    @classmethod
    def from_poly(cls, a: PolyMatrix, m: int) -> GridMatrix:
        z = grid_points(m)
        return cls(np.array([[a[i, j](z) for j in range(a.n)] for i in range(a.n)]))

    @classmethod
    def from_pointwise(cls, mats: np.ndarray) -> GridMatrix:
        """Build from an (m, n, n) stack of matrices."""
        return cls(np.moveaxis(np.asarray(mats, dtype=complex), 0, 2))

    def pointwise(self) -> np.ndarray:
        """The (m, n, n) stack of matrices."""
        return np.moveaxis(self.values, 2, 0)

    def __matmul__(self, other: GridMatrix) -> GridMatrix:
        if other.m != self.m or other.n != self.n:
            raise DimensionMismatch("grid matrices differ in shape")
        return GridMatrix(np.einsum("ijk,jlk->ilk", self.values, other.values))

    def det(self) -> GridFunction:
        return GridFunction(np.linalg.det(self.pointwise()))

    def is_sl(self, tol: float = 1e-10) -> bool:
        return bool(np.all(np.abs(self.det().samples - 1) <= tol))

    def row_norm_positive(self, i: int = 0, tol: float = 0.0) -> bool:
        return bool(np.all(_row_norm2(self.values[i]) > tol))

    def max_diff(self, other: GridMatrix) -> float:
        return float(np.abs(self.values - other.values).max())

    def off_diagonal(self) -> float:
        """Largest off-diagonal magnitude over the grid."""
        mask = ~np.eye(self.n, dtype=bool)
        return float(np.abs(self.values[mask]).max()) if self.n > 1 else 0.0


def _row_norm2(row: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(row) ** 2, axis=0)


def _projection(onto: np.ndarray, rows: np.ndarray, tol: float) -> np.ndarray:
    """Pointwise coefficients <onto, row_i> / |onto|^2 for each row in ``rows``."""
    denom = _row_norm2(onto)
    if np.any(denom <= tol):
        k = int(np.argmin(denom))
        raise DegenerateRow(f"row norm {denom[k]:.3g} at grid point {k}")
    return np.einsum("jk,ijk->ik", np.conj(onto), rows) / denom


def lower_factor(ls: Sequence[GridFunction], n: int | None = None) -> GridMatrix:
    """I + sum_i L_i E[i, 0]: the first-column lifting matrix."""
    n = n or len(ls) + 1
    m = ls[0].m
    out = np.repeat(np.eye(n, dtype=complex)[:, :, None], m, axis=2)
    for i, f in enumerate(ls, start=1):
        out[i, 0] = f.samples
    return GridMatrix(out)


def upper_factor(us: Sequence[GridFunction], n: int | None = None) -> GridMatrix:
    """I + sum_i U_i E[i, N-1]: the last-column lifting matrix."""
    n = n or len(us) + 1
    m = us[0].m
    out = np.repeat(np.eye(n, dtype=complex)[:, :, None], m, axis=2)
    for i, f in enumerate(us):
        out[i, n - 1] = f.samples
    return GridMatrix(out)


def optimal_lower_nxn(g: GridMatrix, tol: float = 1e-14):
    """Subtract from every row below the first its projection onto row 0.

    Returns ``(Ls, g_new)`` with ``g = lower_factor(Ls) @ g_new`` and every
    row of ``g_new`` after the first pointwise orthogonal to row 0.

    Raises:
        DegenerateRow: row 0 vanishes (to ``tol``) at some grid point.
    """
    if g.n < 2:
        raise DimensionMismatch("need at least two bands")
    v = g.values
    coef = _projection(v[0], v[1:], tol)
    new = v.copy()
    new[1:] -= coef[:, None, :] * v[0][None]
    return [GridFunction(c) for c in coef], GridMatrix(new)


def optimal_upper_nxn(g: GridMatrix, tol: float = 1e-14):
    """Subtract from every row above the last its projection onto the last row.

    This mirrors :func:`optimal_lower_nxn`; for N = 2 it is the optimal
    upper step.  Returns ``(Us, g_new)`` with ``g = upper_factor(Us) @ g_new``.
    """
    if g.n < 2:
        raise DimensionMismatch("need at least two bands")
    v = g.values
    coef = _projection(v[-1], v[:-1], tol)
    new = v.copy()
    new[:-1] -= coef[:, None, :] * v[-1][None]
    return [GridFunction(c) for c in coef], GridMatrix(new)


def optimal_lower_2x2(a: GridMatrix, tol: float = 1e-14):
    """L = (conj(A) C + conj(B) D) / (|A|^2 + |B|^2) and the peeled matrix.

    Returns ``(L, a1)`` where ``a = [[1, 0], [L, 1]] @ a1`` and the rows
    of ``a1`` are orthogonal at every grid point.
    """
    if a.n != 2:
        raise DimensionMismatch("optimal_lower_2x2 needs a 2x2 grid matrix")
    (ell,), a1 = optimal_lower_nxn(a, tol)
    return ell, a1


def optimal_upper_2x2(a: GridMatrix, tol: float = 1e-14):
    """U = (conj(C) A + conj(D) B) / (|C|^2 + |D|^2) and the peeled matrix."""
    if a.n != 2:
        raise DimensionMismatch("optimal_upper_2x2 needs a 2x2 grid matrix")
    (u,), a2 = optimal_upper_nxn(a, tol)
    return u, a2


def norm_objective(parts: Sequence[GridFunction]) -> float:
    """Sum of the discrete squared L2 norms of ``parts``."""
    return float(sum(p.norm2() for p in parts))


def _rows_objective(g: GridMatrix, rows) -> float:
    return norm_objective([g[i, j] for i in rows for j in range(g.n)])


@dataclass
class IterationReport:
    objective: list[float] = field(default_factory=list)
    step_kinds: list[str] = field(default_factory=list)
    off_diagonal: float = 0.0
    converged: bool = False


def iterate_factorization(g: GridMatrix, max_steps: int = 8, tol: float = 1e-10):
    """Alternate optimal lower and upper steps while they pay off.

    A step is kept when it lowers the squared norm of the rows it changes
    by more than ``tol``; the first step that does not stops the run.
    ``report.objective`` holds the squared norm of the whole matrix before
    the first step and after every kept step, so it never increases.

    Returns:
        ``(chain, residual, report)`` where ``chain`` lists
        ``("lower" | "upper", [GridFunction, ...])`` from left to right and
        ``g = factors(chain) @ residual`` pointwise.
    """
    chain = []
    report = IterationReport(objective=[_rows_objective(g, range(g.n))])
    kinds = ("lower", "upper")
    cur = g
    for k in range(max_steps):
        kind = kinds[k % 2]
        if kind == "lower":
            params, nxt = optimal_lower_nxn(cur)
            rows = range(1, g.n)
        else:
            params, nxt = optimal_upper_nxn(cur)
            rows = range(g.n - 1)
        gain = _rows_objective(cur, rows) - _rows_objective(nxt, rows)
        if gain <= tol:
            report.converged = True
            break
        chain.append((kind, params))
        report.step_kinds.append(kind)
        cur = nxt
        report.objective.append(_rows_objective(cur, range(g.n)))
    report.off_diagonal = cur.off_diagonal()
    return chain, cur, report


def chain_product(chain, n: int, m: int) -> GridMatrix:
    """Multiply out the lifting factors of an iteration chain."""
    acc = GridMatrix.identity(n, m)
    for kind, params in chain:
        acc = acc @ (lower_factor(params, n) if kind == "lower" else upper_factor(params, n))
    return acc


@dataclass
class DiagonalCheck:
    is_diagonal: bool
    off_diagonal: float
    phi: GridFunction | None = None
    psi: GridFunction | None = None


def diagonal_termination_check(residual: GridMatrix, rep: CuntzRep | None = None,
                               tol: float = 1e-10) -> DiagonalCheck:
    """Decide whether a 2x2 residual is diag(phi, psi) through its row functions.

    Row 0 holds (S0* g0, S1* g0) and row 1 holds (S0* f1, S1* f1).  Both
    functions are rebuilt on the doubled grid as g0 = sum_j S_j(row0[j])
    and f1 likewise, then split again.  The residual is diagonal when
    S1* g0 and S0* f1 vanish to ``tol``; then g0(z) = phi(z^2) and
    f1(z) = z psi(z^2) with phi = S0* g0 and psi = S1* f1.

    Raises:
        GridNotDivisible: the grid size is odd.
    """
    rep = rep or CuntzRep.monomial(2)
    if residual.n != 2 or rep.n != 2:
        raise DimensionMismatch("the diagonal check is defined for two bands")
    if residual.m % 2:
        raise GridNotDivisible(f"grid size {residual.m} is odd")
    v = residual.values
    g0 = sum(grid_s_apply(rep, j, v[0, j]) for j in range(2))
    f1 = sum(grid_s_apply(rep, j, v[1, j]) for j in range(2))
    off = max(np.abs(grid_s_adjoint(rep, 1, g0)).max(),
              np.abs(grid_s_adjoint(rep, 0, f1)).max())
    if off > tol:
        return DiagonalCheck(False, float(off))
    return DiagonalCheck(True, float(off), GridFunction(grid_s_adjoint(rep, 0, g0)),
                         GridFunction(grid_s_adjoint(rep, 1, f1)))


def random_sl_grid(n: int, m: int, rng: np.random.Generator, n_steps: int = 3,
                   max_degree: int = 2) -> GridMatrix:
    """A random product of polynomial lifting steps sampled on the grid."""
    from .liftfactor import random_sl_matrix

    a, _ = random_sl_matrix(n, n_steps, max_degree, rng)
    return GridMatrix.from_poly(a, m)


def random_su_grid(n: int, m: int, rng: np.random.Generator) -> GridMatrix:
    """Independent Haar-random special unitary matrices at each grid point."""
    z = rng.normal(size=(m, n, n)) + 1j * rng.normal(size=(m, n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    q = q * (d / np.abs(d))[:, None, :]
    q = q / np.linalg.det(q)[:, None, None] ** (1.0 / n)
    return GridMatrix.from_pointwise(q)
