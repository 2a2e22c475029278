"""Square matrices over the Laurent polynomial ring and lifting generators.

A polyphase matrix ``A`` acts on ``b(z) = (1, z, ..., z^{N-1})`` through
``A(z^N) b(z)``; :func:`polyphase_apply` computes that vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .errors import BadArity, DimensionMismatch, SingularScale
from .laurent import NEG_INF, LaurentPoly

Entry = Union[LaurentPoly, complex, float, int]


def _as_poly(x) -> LaurentPoly:
    return LaurentPoly.coerce(x)


@dataclass(frozen=True)
class PolyMatrix:
    entries: tuple[tuple[LaurentPoly, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(_as_poly(e) for e in row) for row in self.entries)
        n = len(rows)
        if n < 1 or any(len(r) != n for r in rows):
            raise DimensionMismatch("PolyMatrix must be square")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Entry]]) -> PolyMatrix:
        return cls(tuple(tuple(r) for r in rows))

    @classmethod
    def identity(cls, n: int) -> PolyMatrix:
        one, zero = LaurentPoly.constant(1.0), LaurentPoly()
        return cls(tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n)))

    @classmethod
    def diagonal(cls, diag: Sequence[Entry]) -> PolyMatrix:
        n = len(diag)
        zero = LaurentPoly()
        return cls(tuple(tuple(_as_poly(diag[i]) if i == j else zero for j in range(n))
                         for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij) -> LaurentPoly:
        i, j = ij
        return self.entries[i][j]

    def __matmul__(self, other: PolyMatrix) -> PolyMatrix:
        return matmul(self, other)

    def scale(self, c) -> PolyMatrix:
        """Multiply every entry by a scalar or a LaurentPoly."""
        return PolyMatrix(tuple(tuple(e * c for e in row) for row in self.entries))

    def max_degree(self):
        return max((e.degree() for row in self.entries for e in row), default=NEG_INF)

    def min_exponent(self) -> int:
        exps = [e.min_exp for row in self.entries for e in row if not e.is_zero]
        return min(exps) if exps else 0

    @property
    def is_ordinary(self) -> bool:
        return all(e.is_ordinary for row in self.entries for e in row)

    def max_abs(self) -> float:
        return max(e.max_abs() for row in self.entries for e in row)

    def evaluate(self, z) -> np.ndarray:
        """Sample the matrix at point(s) z; result has shape z.shape + (n, n)."""
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape + (self.n, self.n), dtype=complex)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                out[..., i, j] = e(z)
        return out

    def max_diff(self, other: PolyMatrix) -> float:
        if other.n != self.n:
            raise DimensionMismatch("matrices differ in size")
        return max(a.max_diff(b) for ra, rb in zip(self.entries, other.entries)
                   for a, b in zip(ra, rb))

    def allclose(self, other: PolyMatrix, tol: float = 1e-12) -> bool:
        return self.max_diff(other) <= tol

    def det(self) -> LaurentPoly:
        return det(self)

    def is_sl(self, tol: float = 1e-10) -> bool:
        """det == 1 up to :func:`sl_threshold`."""
        return det_deviation(self) <= sl_threshold(self, tol)

    def __repr__(self):
        body = ",\n ".join("[" + ", ".join(map(repr, r)) + "]" for r in self.entries)
        return f"PolyMatrix(n={self.n},\n [{body}])"


def matmul(a: PolyMatrix, b: PolyMatrix) -> PolyMatrix:
    if a.n != b.n:
        raise DimensionMismatch(f"cannot multiply {a.n}x{a.n} by {b.n}x{b.n}")
    n = a.n
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = LaurentPoly()
            for k in range(n):
                if a.entries[i][k].is_zero or b.entries[k][j].is_zero:
                    continue
                acc = acc + a.entries[i][k] * b.entries[k][j]
            row.append(acc)
        rows.append(tuple(row))
    return PolyMatrix(tuple(rows))


def det(a: PolyMatrix) -> LaurentPoly:
    """Laplace expansion along rows, memoized on the set of unused columns."""
    n = a.n
    ent = a.entries

    @lru_cache(maxsize=None)
    def minor(row: int, cols: int) -> LaurentPoly:
        if row == n:
            return LaurentPoly.constant(1.0)
        acc = LaurentPoly()
        sign = 1.0
        for j in range(n):
            if not cols >> j & 1:
                continue
            e = ent[row][j]
            if not e.is_zero:
                sub = minor(row + 1, cols & ~(1 << j))
                if not sub.is_zero:
                    acc = acc + (e * sub) * sign
            sign = -sign
        return acc

    return minor(0, (1 << n) - 1)


def det_scale(a: PolyMatrix) -> float:
    """Hadamard-style bound on the coefficients of det(a)."""
    prod = 1.0
    for row in a.entries:
        prod *= sum(float(np.abs(e.coeffs).sum()) for e in row)
    return prod


def sl_threshold(a: PolyMatrix, tol: float) -> float:
    """Allowed |det - 1|: ``tol`` or the rounding noise of the expansion, whichever is larger."""
    return max(tol, 1e-13 * det_scale(a))


def det_deviation(a: PolyMatrix) -> float:
    """Largest coefficient of det(a) - 1."""
    return (det(a) - 1.0).max_abs()


class StepKind(str, Enum):
    LOWER = "lower"
    UPPER = "upper"
    SCALE = "scale"
    SHIFT = "shift"


@dataclass(frozen=True)
class LiftingStep:
    """One elementary factor of a lifting chain.

    ``params`` depends on ``kind``: a tuple of LaurentPoly for LOWER/UPPER,
    the nonzero complex K for SCALE, the integer exponent l for SHIFT.

    A LOWER step with offset p carries N - p polynomials; ``params[k]`` sits
    at matrix position (k + p, k).  An UPPER step puts ``params[k]`` at
    (k, k + p).  With p = 1 these are the bidiagonal generators with ones on
    the diagonal.
    """

    kind: StepKind
    params: object
    offset: int = 1

    def __post_init__(self):
        kind = StepKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind in (StepKind.LOWER, StepKind.UPPER):
            object.__setattr__(self, "params", tuple(_as_poly(p) for p in self.params))
            if self.offset < 1:
                raise BadArity("offset must be >= 1")
        elif kind is StepKind.SCALE:
            object.__setattr__(self, "params", complex(self.params))
        else:
            object.__setattr__(self, "params", int(self.params))

    @classmethod
    def lower(cls, polys: Sequence[Entry], offset: int = 1) -> LiftingStep:
        return cls(StepKind.LOWER, tuple(polys), offset)

    @classmethod
    def upper(cls, polys: Sequence[Entry], offset: int = 1) -> LiftingStep:
        return cls(StepKind.UPPER, tuple(polys), offset)

    @classmethod
    def scale(cls, k: complex) -> LiftingStep:
        return cls(StepKind.SCALE, k)

    @classmethod
    def shift(cls, l: int) -> LiftingStep:
        return cls(StepKind.SHIFT, l)

    @property
    def is_triangular(self) -> bool:
        return self.kind in (StepKind.LOWER, StepKind.UPPER)

    @property
    def size(self) -> int | None:
        """Band count implied by the parameters (None for SCALE/SHIFT)."""
        if self.is_triangular:
            return len(self.params) + self.offset
        return None

    def positions(self):
        """Yield ((row, col), poly) for the off-diagonal nonzero entries."""
        if not self.is_triangular:
            return
        p = self.offset
        for k, poly in enumerate(self.params):
            if poly.is_zero:
                continue
            yield ((k + p, k) if self.kind is StepKind.LOWER else (k, k + p)), poly


def realize_step(s: LiftingStep, n: int) -> PolyMatrix:
    """Explicit n x n matrix of a lifting step."""
    if s.is_triangular:
        if s.size != n:
            raise BadArity(f"{s.kind.value} step with offset {s.offset} needs "
                           f"{n - s.offset} polynomials, got {len(s.params)}")
        rows = [list(r) for r in PolyMatrix.identity(n).entries]
        for (i, j), poly in s.positions():
            rows[i][j] = poly
        return PolyMatrix.from_rows(rows)
    if s.kind is StepKind.SCALE:
        if n < 2:
            raise BadArity("a scale step needs n >= 2")
        if s.params == 0:
            raise SingularScale("scale factor K must be nonzero")
        return PolyMatrix.diagonal([s.params, 1.0 / s.params] + [1.0] * (n - 2))
    return PolyMatrix.diagonal([LaurentPoly.monomial(s.params)] * n)


def _nilpotent_inverse(s: LiftingStep, n: int) -> PolyMatrix:
    # (I + E)^-1 = sum_k (-E)^k, E nilpotent of index <= n
    eye = PolyMatrix.identity(n)
    m = realize_step(s, n)
    neg_e = PolyMatrix(tuple(tuple((eye[i, j] - m[i, j]) for j in range(n)) for i in range(n)))
    acc, power = eye, eye
    for _ in range(n - 1):
        power = matmul(power, neg_e)
        if all(e.is_zero for row in power.entries for e in row):
            break
        acc = PolyMatrix(tuple(tuple(a + b for a, b in zip(ra, rb))
                               for ra, rb in zip(acc.entries, power.entries)))
    return acc


def step_is_self_inverse_form(s: LiftingStep) -> bool:
    """True when E @ E == 0, i.e. the inverse is the step with negated params."""
    if not s.is_triangular:
        return True
    pos = [ij for ij, _ in s.positions()]
    cols = {j for _, j in pos}
    return not any(i in cols for i, _ in pos)


def invert_step(s: LiftingStep) -> Union[LiftingStep, PolyMatrix]:
    """Closed-form inverse.

    Scale and shift steps invert to steps of the same kind.  A triangular
    step whose nilpotent part squares to zero inverts by negation; otherwise
    the inverse carries product terms (e.g. L*M below the subdiagonal) and
    is returned as a general PolyMatrix.
    """
    if s.kind is StepKind.SCALE:
        if s.params == 0:
            raise SingularScale("scale factor K must be nonzero")
        return LiftingStep.scale(1.0 / s.params)
    if s.kind is StepKind.SHIFT:
        return LiftingStep.shift(-s.params)
    if step_is_self_inverse_form(s):
        return LiftingStep(s.kind, tuple(-p for p in s.params), s.offset)
    return _nilpotent_inverse(s, s.size)


def step_inverse_matrix(s: LiftingStep, n: int) -> PolyMatrix:
    inv = invert_step(s)
    if isinstance(inv, PolyMatrix):
        return inv
    return realize_step(inv, n)


def polyphase_apply(a: PolyMatrix) -> list[LaurentPoly]:
    """Components f_i(z) = sum_j A_ij(z^N) z^j."""
    n = a.n
    out = []
    for row in a.entries:
        acc = LaurentPoly()
        for j, e in enumerate(row):
            acc = acc + e.upsample(n, j)
        out.append(acc)
    return out


def corner_is_monomial(a: PolyMatrix) -> bool:
    """Whether A[0,0] or A[1,1] of a 2x2 matrix is a monomial.

    Diagnostic only; products of three or more lifting steps generally fail
    it, so nothing downstream relies on the answer.
    """
    if a.n != 2:
        raise DimensionMismatch("corner check is defined for 2x2 matrices")
    return a[0, 0].is_monomial or a[1, 1].is_monomial
