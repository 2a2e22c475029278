"""N-band analysis and synthesis of finite signals through a lifting chain.

A signal is split into its N polyphase components (band j holds samples
j, j+N, j+2N, ...).  Synthesis multiplies the band vector by the chain's
matrix one factor at a time, rightmost factor first, and interleaves the
result; analysis applies the inverse factors in the opposite order, so
each lifting step is "filter one band and add it to another" or its undo.

Polynomial entries act on a band as convolutions: ``z^e`` delays by ``e``
samples.  With the default periodic boundary the delay is circular, which
makes every step exactly invertible and matches multiplication on the
circle sampled at the band length.  The ``"zero"`` boundary drops samples
shifted past either end instead; lifting steps stay invertible because
the undo subtracts the same truncated filter output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BandArityMismatch, DimensionMismatch, LengthMismatch
from .laurent import LaurentPoly
from .liftfactor import LiftingChain, residual_matrix
from .polymat import LiftingStep, PolyMatrix, StepKind

BOUNDARIES = ("periodic", "zero")


@dataclass(frozen=True)
class Signal:
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=complex).reshape(-1))

    @property
    def length(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class BandSet:
    """The N band signals of one analysis, plus the length to restore."""

    bands: tuple[np.ndarray, ...]
    length: int

    @property
    def n(self) -> int:
        return len(self.bands)

    def as_array(self) -> np.ndarray:
        return np.array(self.bands)


def _samples(x) -> np.ndarray:
    return x.samples if isinstance(x, Signal) else np.asarray(x, dtype=complex).reshape(-1)


def split(x, n: int, strict: bool = False) -> BandSet:
    """Polyphase components of ``x``, zero-padding to a multiple of ``n``.

    Raises:
        LengthMismatch: ``strict`` is set and ``n`` does not divide the length.
    """
    s = _samples(x)
    rem = s.size % n
    if rem and strict:
        raise LengthMismatch(f"signal length {s.size} is not a multiple of {n}")
    padded = np.concatenate([s, np.zeros((n - rem) % n, dtype=complex)])
    return BandSet(tuple(padded[j::n].copy() for j in range(n)), s.size)


def merge(b: BandSet) -> Signal:
    """Interleave bands and cut back to the recorded length."""
    arr = b.as_array()
    return Signal(arr.T.reshape(-1)[:b.length])


def _delay(band: np.ndarray, e: int, boundary: str) -> np.ndarray:
    if boundary == "periodic":
        return np.roll(band, e)
    out = np.zeros_like(band)
    size = band.size
    if e >= 0:
        if e < size:
            out[e:] = band[:size - e]
    elif -e < size:
        out[:size + e] = band[-e:]
    return out


def filter_band(p: LaurentPoly, band: np.ndarray, boundary: str = "periodic") -> np.ndarray:
    """Convolve ``band`` with the coefficients of ``p`` (z^e delays by e)."""
    out = np.zeros_like(band, dtype=complex)
    if p.is_zero:
        return out
    for k, c in enumerate(p.coeffs):
        if c != 0:
            out += c * _delay(band, p.min_exp + k, boundary)
    return out


def _check_boundary(boundary: str) -> None:
    if boundary not in BOUNDARIES:
        raise ValueError(f"unknown boundary {boundary!r}; expected one of {BOUNDARIES}")


def apply_step(step: LiftingStep, bands: list[np.ndarray], boundary: str = "periodic",
               inverse: bool = False) -> None:
    """Multiply the band vector by a factor (or its inverse), in place."""
    if step.kind is StepKind.SCALE:
        k = step.params if not inverse else 1.0 / step.params
        bands[0] = bands[0] * k
        bands[1] = bands[1] / k
        return
    if step.kind is StepKind.SHIFT:
        # delays stay circular so that the residual is invertible under any boundary
        l = -step.params if inverse else step.params
        for i in range(len(bands)):
            bands[i] = np.roll(bands[i], l)
        return
    ops = list(step.positions())
    # forward: each target reads sources that have not been updated yet
    lower = step.kind is StepKind.LOWER
    ops.sort(key=lambda o: o[0][0], reverse=lower != inverse)
    sign = -1.0 if inverse else 1.0
    for (t, s), p in ops:
        bands[t] = bands[t] + sign * filter_band(p, bands[s], boundary)


def _residual_steps(chain: LiftingChain) -> list[LiftingStep]:
    out = []
    if chain.scale != 1:
        out.append(LiftingStep.scale(chain.scale))
    if chain.shift:
        out.append(LiftingStep.shift(chain.shift))
    return out


def _factors(chain: LiftingChain) -> list[LiftingStep]:
    expected = residual_matrix(chain.n, chain.shift, chain.scale)
    if chain.residual.max_diff(expected) > 1e-12:
        raise ValueError("the chain residual is not z^l diag(K, 1/K, 1, ...)")
    return list(chain.steps) + _residual_steps(chain)


def apply_chain(chain: LiftingChain, bands: Sequence[np.ndarray], boundary: str = "periodic",
                inverse: bool = False) -> list[np.ndarray]:
    """The chain's matrix (or its inverse) times the band vector, factor by factor."""
    _check_boundary(boundary)
    if len(bands) != chain.n:
        raise BandArityMismatch(f"{len(bands)} bands for a {chain.n}-band chain")
    out = [np.asarray(b, dtype=complex).copy() for b in bands]
    factors = _factors(chain)
    for step in (factors if inverse else reversed(factors)):
        apply_step(step, out, boundary, inverse)
    return out


def analyze(chain: LiftingChain, x, boundary: str = "periodic", strict: bool = False) -> BandSet:
    """Split ``x`` into bands and apply the inverse of the chain's matrix.

    Raises:
        LengthMismatch: ``strict`` is set and the band count does not divide the length.
    """
    parts = split(x, chain.n, strict)
    return BandSet(tuple(apply_chain(chain, parts.bands, boundary, inverse=True)), parts.length)


def synthesize(chain: LiftingChain, b: BandSet, boundary: str = "periodic") -> Signal:
    """Apply the chain's matrix to the bands and interleave; inverts :func:`analyze`."""
    if b.n != chain.n:
        raise BandArityMismatch(f"{b.n} bands for a {chain.n}-band chain")
    return merge(BandSet(tuple(apply_chain(chain, b.bands, boundary)), b.length))


def apply_matrix_direct(a: PolyMatrix, x, boundary: str = "periodic") -> BandSet:
    """Unfactored reference: bands_i = sum_j a_ij * split_j.

    With the periodic boundary this equals applying any chain whose product
    is ``a`` step by step.
    """
    _check_boundary(boundary)
    if a.n < 2:
        raise DimensionMismatch("a filter bank needs at least two bands")
    parts = split(x, a.n)
    bands = tuple(sum(filter_band(a[i, j], parts.bands[j], boundary) for j in range(a.n))
                  for i in range(a.n))
    return BandSet(bands, parts.length)


def haar_chain() -> LiftingChain:
    """Chain whose analysis maps (even, odd) to (even + odd, (odd - even) / 2).

    Predict ``d = o - e``, update ``s = e + d / 2`` and rescale by (2, 1/2);
    the synthesis matrix is the inverse, L(1) U(-1/2) diag(1/2, 2).
    """
    steps = (LiftingStep.lower([LaurentPoly.constant(1.0)]),
             LiftingStep.upper([LaurentPoly.constant(-0.5)]))
    return LiftingChain(2, steps, residual_matrix(2, 0, 0.5), 0, 0.5)
