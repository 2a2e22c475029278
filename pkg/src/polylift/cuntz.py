"""Isometries S_0..S_{N-1} on L^2(T) and their adjoints.

In the monomial representation ``S_j f(z) = z^j f(z^N)``: on coefficient
sequences this is up-sampling by N followed by a delay of j, and ``S_j*``
selects the exponents congruent to j (mod N).  A filtered representation
replaces ``z^j`` by a filter ``m_j(z)``.

Both coefficient-domain and sampled (roots-of-unity grid) versions are
provided; the grid versions evaluate the defining root sums directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BadArity, BadBand, GridNotDivisible, ModeUnsupported
from .laurent import LaurentPoly


@dataclass(frozen=True)
class CuntzRep:
    n: int
    filters: tuple[LaurentPoly, ...] | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("band count must be at least 2")
        if self.filters is not None:
            fs = tuple(LaurentPoly.coerce(f) for f in self.filters)
            if len(fs) != self.n:
                raise BadArity(f"need {self.n} filters, got {len(fs)}")
            object.__setattr__(self, "filters", fs)

    @classmethod
    def monomial(cls, n: int) -> CuntzRep:
        return cls(n)

    @classmethod
    def filtered(cls, filters: Sequence[LaurentPoly]) -> CuntzRep:
        return cls(len(filters), tuple(filters))

    @classmethod
    def haar(cls) -> CuntzRep:
        r = 1 / np.sqrt(2)
        return cls(2, (LaurentPoly([r, r]), LaurentPoly([r, -r])))

    @property
    def mode(self) -> str:
        return "monomial" if self.filters is None else "filtered"

    def filter(self, j: int) -> LaurentPoly:
        self._check(j)
        if self.filters is None:
            return LaurentPoly.monomial(j)
        return self.filters[j]

    def _check(self, j: int) -> None:
        if not 0 <= j < self.n:
            raise BadBand(f"band {j} outside 0..{self.n - 1}")


def s_apply(rep: CuntzRep, j: int, f: LaurentPoly) -> LaurentPoly:
    rep._check(j)
    if rep.filters is None:
        return f.upsample(rep.n, j)
    return rep.filters[j] * f.upsample(rep.n)


def s_adjoint(rep: CuntzRep, j: int, f: LaurentPoly) -> LaurentPoly:
    """Adjoint of :func:`s_apply`.

    Filtered mode correlates with the conjugate filter and keeps every N-th
    coefficient, which is the coefficient form of the root-of-unity average
    (1/N) sum_{w^N = z} conj(m_j(w)) f(w).
    """
    rep._check(j)
    if rep.filters is None:
        return f.downsample(rep.n, j)
    return (rep.filters[j].conj_reflect() * f).downsample(rep.n, 0)


def polyphase_split(rep: CuntzRep, f: LaurentPoly) -> list[LaurentPoly]:
    if rep.filters is not None:
        raise ModeUnsupported("polyphase_split is defined for the monomial representation")
    return [f.downsample(rep.n, j) for j in range(rep.n)]


def reconstruct(rep: CuntzRep, parts: Sequence[LaurentPoly]) -> LaurentPoly:
    """sum_j S_j(parts[j])."""
    if len(parts) != rep.n:
        raise BadArity(f"need {rep.n} components, got {len(parts)}")
    acc = LaurentPoly()
    for j, p in enumerate(parts):
        acc = acc + s_apply(rep, j, LaurentPoly.coerce(p))
    return acc


@dataclass
class RelationReport:
    max_iso_err: float
    max_complete_err: float
    trials: int
    length: int

    def ok(self, tol: float = 0.0) -> bool:
        return self.max_iso_err <= tol and self.max_complete_err <= tol


def verify_relations(rep: CuntzRep, trial_count: int = 10, length: int = 64,
                     seed: int | None = 0) -> RelationReport:
    """Measure how far S_j* S_k is from delta_jk I and sum S_j S_j* from I.

    Errors are max coefficient deviations over random complex vectors.  Bad
    filter systems are reported, not rejected.
    """
    if trial_count < 1:
        raise ValueError("trial_count must be >= 1")
    rng = np.random.default_rng(seed)
    iso = comp = 0.0
    for _ in range(trial_count):
        f = LaurentPoly(rng.standard_normal(length) + 1j * rng.standard_normal(length),
                        tol=0.0)
        for k in range(rep.n):
            sk = s_apply(rep, k, f)
            for j in range(rep.n):
                got = s_adjoint(rep, j, sk)
                want = f if j == k else LaurentPoly()
                iso = max(iso, got.max_diff(want))
        total = LaurentPoly()
        for j in range(rep.n):
            total = total + s_apply(rep, j, s_adjoint(rep, j, f))
        comp = max(comp, total.max_diff(f))
    return RelationReport(iso, comp, trial_count, length)


# -- sampled versions ----------------------------------------------------------

def grid_points(m: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(m) / m)


def _filter_values(rep: CuntzRep, j: int, w: np.ndarray) -> np.ndarray:
    if rep.filters is None:
        return w ** j
    return rep.filters[j](w)


def grid_s_apply(rep: CuntzRep, j: int, samples) -> np.ndarray:
    """S_j on samples over the m-th roots of unity; result lives on the N*m grid.

    For w on the finer grid, w^N is a grid point of the coarse grid, so the
    substitution psi(w^N) is exact.
    """
    rep._check(j)
    psi = np.asarray(samples, dtype=complex)
    m = psi.shape[-1]
    fine = rep.n * m
    w = grid_points(fine)
    idx = np.arange(fine) % m
    return _filter_values(rep, j, w) * psi[..., idx]


def grid_s_adjoint(rep: CuntzRep, j: int, samples) -> np.ndarray:
    """S_j* on samples over the M-th roots of unity; result lives on the M/N grid."""
    rep._check(j)
    f = np.asarray(samples, dtype=complex)
    big = f.shape[-1]
    if big % rep.n:
        raise GridNotDivisible(f"grid size {big} is not divisible by {rep.n}")
    small = big // rep.n
    w = grid_points(big)
    h = np.conj(_filter_values(rep, j, w)) * f
    # roots of z_k are the fine points k + t*small, t = 0..N-1
    return h.reshape(h.shape[:-1] + (rep.n, small)).mean(axis=-2)
