"""Laurent polynomials with complex double coefficients.

A polynomial is stored as the lowest exponent carrying a nonzero coefficient
plus a dense coefficient vector.  Coefficients whose magnitude does not exceed
the zero tolerance are trimmed from both ends on construction, so the stored
form is canonical up to that tolerance.
"""

from __future__ import annotations

import contextlib
from numbers import Number

import numpy as np

from .errors import DivisionByZero, NotOrdinary, OffCircle, ZeroPolynomial

#: degree of the zero polynomial; compares below every integer
NEG_INF = float("-inf")

_ZERO_TOL = 1e-10


def get_zero_tol() -> float:
    return _ZERO_TOL


def set_zero_tol(tol: float) -> None:
    """Change the magnitude at or below which a coefficient counts as zero."""
    global _ZERO_TOL
    if not tol >= 0:
        raise ValueError("zero tolerance must be non-negative")
    _ZERO_TOL = float(tol)


@contextlib.contextmanager
def zero_tol(tol: float):
    old = _ZERO_TOL
    set_zero_tol(tol)
    try:
        yield
    finally:
        set_zero_tol(old)


def _trim(c: np.ndarray, thresh: float) -> tuple[np.ndarray, int]:
    """Strip end entries with |c| <= thresh; return (core, offset of first kept)."""
    nz = np.flatnonzero(np.abs(c) > thresh)
    if nz.size == 0:
        return c[:0], 0
    return c[nz[0]: nz[-1] + 1], int(nz[0])


class LaurentPoly:
    """Finitely supported sum of c_k z^k over integer k.

    ``coeffs[k]`` is the coefficient of ``z**(min_exp + k)``.  Instances are
    immutable and hashable.
    """

    __slots__ = ("min_exp", "coeffs")

    def __init__(self, coeffs=(), min_exp: int = 0, *, tol: float | None = None):
        c = np.array(coeffs, dtype=complex).ravel()
        thresh = _ZERO_TOL if tol is None else tol
        c, off = _trim(c, thresh)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "min_exp", int(min_exp) + off if c.size else 0)

    def __setattr__(self, name, value):
        raise AttributeError("LaurentPoly is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls) -> LaurentPoly:
        return cls()

    @classmethod
    def constant(cls, c) -> LaurentPoly:
        return cls([c])

    @classmethod
    def monomial(cls, exp: int, c=1.0) -> LaurentPoly:
        return cls([c], exp)

    @classmethod
    def from_dict(cls, terms: dict[int, complex]) -> LaurentPoly:
        if not terms:
            return cls()
        lo, hi = min(terms), max(terms)
        c = np.zeros(hi - lo + 1, dtype=complex)
        for e, v in terms.items():
            c[e - lo] += v
        return cls(c, lo)

    @classmethod
    def coerce(cls, x) -> LaurentPoly:
        if isinstance(x, LaurentPoly):
            return x
        if isinstance(x, (Number, np.number)):
            return cls([x])
        raise TypeError(f"cannot interpret {type(x).__name__} as a LaurentPoly")

    # -- shape --------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 0

    def degree(self):
        """Highest exponent, or ``NEG_INF`` for the zero polynomial."""
        if self.is_zero:
            return NEG_INF
        return self.min_exp + self.coeffs.size - 1

    def width(self):
        """degree - min_exp; the Euclidean size in the Laurent ring."""
        if self.is_zero:
            return NEG_INF
        return self.coeffs.size - 1

    @property
    def is_ordinary(self) -> bool:
        return self.min_exp >= 0

    @property
    def is_monomial(self) -> bool:
        return self.coeffs.size == 1

    def leading(self) -> complex:
        if self.is_zero:
            return 0j
        return complex(self.coeffs[-1])

    def coeff(self, exp: int) -> complex:
        k = exp - self.min_exp
        if 0 <= k < self.coeffs.size:
            return complex(self.coeffs[k])
        return 0j

    def max_abs(self) -> float:
        return float(np.abs(self.coeffs).max()) if self.coeffs.size else 0.0

    def dense(self, lo: int, hi: int) -> np.ndarray:
        """Coefficients of exponents lo..hi inclusive (zero filled)."""
        out = np.zeros(max(hi - lo + 1, 0), dtype=complex)
        if self.is_zero or out.size == 0:
            return out
        a = max(lo, self.min_exp)
        b = min(hi, self.degree())
        if a <= b:
            out[a - lo: b - lo + 1] = self.coeffs[a - self.min_exp: b - self.min_exp + 1]
        return out

    def trimmed(self, thresh: float) -> LaurentPoly:
        """Drop end coefficients with magnitude <= thresh."""
        c, off = _trim(self.coeffs, thresh)
        return LaurentPoly(c, self.min_exp + off, tol=0.0)

    def truncate_above(self, exp) -> LaurentPoly:
        """Keep only the terms with exponent <= exp."""
        if self.is_zero or exp >= self.degree():
            return self
        if exp < self.min_exp:
            return LaurentPoly()
        return LaurentPoly(self.coeffs[: int(exp) - self.min_exp + 1], self.min_exp)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        try:
            other = LaurentPoly.coerce(other)
        except TypeError:
            return NotImplemented
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(-self.coeffs, self.min_exp, tol=0.0)

    def __sub__(self, other):
        try:
            other = LaurentPoly.coerce(other)
        except TypeError:
            return NotImplemented
        return add(self, -other)

    def __rsub__(self, other):
        return LaurentPoly.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (Number, np.number)):
            return LaurentPoly(self.coeffs * other, self.min_exp)
        if isinstance(other, LaurentPoly):
            return mul(self, other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (Number, np.number)):
            if other == 0:
                raise DivisionByZero("division of a LaurentPoly by zero")
            return LaurentPoly(self.coeffs / other, self.min_exp)
        if isinstance(other, LaurentPoly) and other.is_monomial:
            return LaurentPoly(self.coeffs / other.coeffs[0], self.min_exp - other.min_exp)
        return NotImplemented

    def shift(self, k: int) -> LaurentPoly:
        """Multiply by z**k."""
        if self.is_zero:
            return self
        return LaurentPoly(self.coeffs, self.min_exp + k, tol=0.0)

    def upsample(self, n: int, phase: int = 0) -> LaurentPoly:
        """z**phase * p(z**n): coefficient at exponent e moves to n*e + phase."""
        if self.is_zero:
            return self
        c = np.zeros(n * (self.coeffs.size - 1) + 1, dtype=complex)
        c[::n] = self.coeffs
        return LaurentPoly(c, n * self.min_exp + phase, tol=0.0)

    def downsample(self, n: int, phase: int = 0) -> LaurentPoly:
        """Keep exponents e = n*k + phase and re-index them to k."""
        if self.is_zero:
            return self
        # first exponent >= min_exp congruent to phase (mod n); floor semantics
        first = self.min_exp + ((phase - self.min_exp) % n)
        start = first - self.min_exp
        picked = self.coeffs[start::n]
        if picked.size == 0:
            return LaurentPoly()
        return LaurentPoly(picked, (first - phase) // n)

    def conj_reflect(self) -> LaurentPoly:
        """The polynomial whose values on T are the conjugates of self's."""
        if self.is_zero:
            return self
        return LaurentPoly(np.conj(self.coeffs[::-1]), -self.degree(), tol=0.0)

    # -- evaluation / comparison ---------------------------------------------

    def __call__(self, z):
        return eval_anywhere(self, z)

    def __eq__(self, other):
        if isinstance(other, (Number, np.number)):
            other = LaurentPoly([other])
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.min_exp == other.min_exp and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash((self.min_exp, self.coeffs.tobytes()))

    def max_diff(self, other) -> float:
        """Largest coefficient-wise absolute difference."""
        other = LaurentPoly.coerce(other)
        if self.is_zero and other.is_zero:
            return 0.0
        if self.is_zero:
            lo = other.min_exp
        elif other.is_zero:
            lo = self.min_exp
        else:
            lo = min(self.min_exp, other.min_exp)
        hi = int(max(self.degree(), other.degree()))
        d = self.dense(lo, hi) - other.dense(lo, hi)
        return float(np.abs(d).max()) if d.size else 0.0

    def allclose(self, other, tol: float = 1e-12) -> bool:
        return self.max_diff(other) <= tol

    def __repr__(self):
        if self.is_zero:
            return "LaurentPoly(0)"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            e = self.min_exp + k
            cs = f"{c.real:g}" if c.imag == 0 else f"({c.real:g}{c.imag:+g}j)"
            terms.append(cs if e == 0 else f"{cs}*z^{e}")
        return "LaurentPoly(" + " + ".join(terms) + ")"


def add(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    lo = min(a.min_exp, b.min_exp)
    hi = int(max(a.degree(), b.degree()))
    return LaurentPoly(a.dense(lo, hi) + b.dense(lo, hi), lo)


def mul(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    if a.is_zero or b.is_zero:
        return LaurentPoly()
    return LaurentPoly(np.convolve(a.coeffs, b.coeffs), a.min_exp + b.min_exp)


def divrem(f: LaurentPoly, g: LaurentPoly, tol: float | None = None):
    """Euclidean division of ordinary polynomials: f = g*q + r, deg r < deg g.

    Long division in floating point.  Remainder coefficients at or below
    ``tol * max(1, scale)`` are treated as cancelled, where ``scale`` is the
    largest coefficient magnitude that entered the subtraction.

    Raises:
        DivisionByZero: g is the zero polynomial.
        NotOrdinary: f or g has a negative exponent.
    """
    if g.is_zero:
        raise DivisionByZero("divisor is the zero polynomial")
    if not (f.is_ordinary and g.is_ordinary):
        raise NotOrdinary("divrem needs ordinary polynomials; normalize_monomial first")
    tol = _ZERO_TOL if tol is None else tol
    if f.is_zero or f.degree() < g.degree():
        return LaurentPoly(), f
    df, dg = int(f.degree()), int(g.degree())
    r = f.dense(0, df)
    gc = g.dense(0, dg)
    lc = gc[-1]
    q = np.zeros(df - dg + 1, dtype=complex)
    for k in range(df - dg, -1, -1):
        c = r[k + dg] / lc
        q[k] = c
        r[k: k + dg + 1] -= c * gc
        r[k + dg] = 0.0
    scale = max(np.abs(f.coeffs).max(), np.abs(q).max() * np.abs(gc).max())
    thresh = tol * max(1.0, scale)
    rc, off = _trim(r[:dg], thresh)
    return LaurentPoly(q), LaurentPoly(rc, off, tol=0.0)


def quot(f: LaurentPoly, g: LaurentPoly) -> LaurentPoly:
    return divrem(f, g)[0]


def rem(f: LaurentPoly, g: LaurentPoly) -> LaurentPoly:
    return divrem(f, g)[1]


def eval_anywhere(p: LaurentPoly, z):
    """Evaluate at arbitrary nonzero complex points (scalar or array)."""
    z = np.asarray(z, dtype=complex)
    if p.is_zero:
        out = np.zeros_like(z)
    else:
        out = np.polyval(p.coeffs[::-1], z) * z ** p.min_exp
    return complex(out) if out.ndim == 0 else out


def eval(p: LaurentPoly, z, tol: float = 1e-9):  # noqa: A001 - mirrors the operation name
    """Evaluate p at point(s) on the unit circle.

    Raises:
        OffCircle: some |z| differs from 1 by more than ``tol``.
    """
    za = np.asarray(z, dtype=complex)
    if np.any(np.abs(np.abs(za) - 1.0) > tol):
        raise OffCircle("evaluation point is not on the unit circle")
    return eval_anywhere(p, za)


def normalize_monomial(p: LaurentPoly) -> tuple[int, LaurentPoly]:
    """Split p = z**l * q with q ordinary and q(0) != 0."""
    if p.is_zero:
        raise ZeroPolynomial("the zero polynomial has no monomial factor")
    return p.min_exp, LaurentPoly(p.coeffs, 0, tol=0.0)


def laurent_divrem(f: LaurentPoly, g: LaurentPoly, tol: float | None = None):
    """Division in the Laurent ring with width as the Euclidean size.

    Both operands are normalized with :func:`normalize_monomial`, the ordinary
    parts are divided, and the monomial factors restored, so that
    f = g*q + r with width(r) < width(g).
    """
    if g.is_zero:
        raise DivisionByZero("divisor is the zero polynomial")
    if f.is_zero:
        return LaurentPoly(), LaurentPoly()
    a, g0 = normalize_monomial(g)
    b, f0 = normalize_monomial(f)
    q0, r0 = divrem(f0, g0, tol)
    return q0.shift(b - a), r0.shift(b)


def random_poly(rng: np.random.Generator, degree: int, min_exp: int = 0) -> LaurentPoly:
    """Coefficients drawn uniformly from the closed unit disk."""
    k = degree - min_exp + 1
    rad = np.sqrt(rng.uniform(0.0, 1.0, k))
    ang = rng.uniform(0.0, 2 * np.pi, k)
    return LaurentPoly(rad * np.exp(1j * ang), min_exp)
