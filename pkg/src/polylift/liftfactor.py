"""Factor SL_N(pol) matrices into lifting steps with the Euclidean algorithm.

Every peel is a row operation ``row_t -= q * row_s`` on the remaining
factor; the chain stores the elementary matrix with ``+q`` so that

    A = S_1 @ S_2 @ ... @ S_m @ residual

with ``residual = z^l * diag(K, 1/K, 1, ..., 1)``.

Two routes are provided.  :func:`factor_2x2` is the classical alternating
upper/lower Euclid on the first column, checking that the quotient taken
from column 0 also reduces column 1.  :func:`factor_nxn` runs a column-by-
column Euclidean elimination for any N (including 2) using transvections
between arbitrary row pairs, so steps may have offsets larger than one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import as_strided

from .errors import (DimensionMismatch, FactorizationError, InconsistentQuotient,
                     NonTerminating, NotSL)
from .laurent import NEG_INF, LaurentPoly, divrem, laurent_divrem, random_poly
from .polymat import (LiftingStep, PolyMatrix, StepKind, det, matmul,
                      sl_threshold, realize_step, step_inverse_matrix)


@dataclass(frozen=True)
class LiftingChain:
    n: int
    steps: tuple[LiftingStep, ...]
    residual: PolyMatrix
    shift: int = 0
    scale: complex = 1.0

    def product(self) -> PolyMatrix:
        acc = PolyMatrix.identity(self.n)
        for s in self.steps:
            acc = matmul(acc, realize_step(s, self.n))
        return matmul(acc, self.residual)

    @property
    def kinds(self) -> list[str]:
        return [s.kind.value for s in self.steps]


def residual_matrix(n: int, shift: int = 0, scale: complex = 1.0) -> PolyMatrix:
    diag = [LaurentPoly.monomial(shift, scale), LaurentPoly.monomial(shift, 1.0 / scale)]
    diag += [LaurentPoly.monomial(shift)] * (n - 2)
    return PolyMatrix.diagonal(diag)


# -- small helpers -------------------------------------------------------------

def _clean(p: LaurentPoly, scale: float, tol: float) -> LaurentPoly:
    return p.trimmed(tol * max(1.0, scale))


def _sub_mul(a: LaurentPoly, q: LaurentPoly, b: LaurentPoly, tol: float) -> LaurentPoly:
    """a - q*b with cancellation noise removed relative to the operand size."""
    if q.is_zero or b.is_zero:
        return a
    prod = q * b
    return _clean(a - prod, max(a.max_abs(), prod.max_abs()), tol)


def _cap_degree(p: LaurentPoly, allowed, scale: float, tol: float) -> LaurentPoly:
    """Drop terms above ``allowed``; they must be numerical noise."""
    if p.is_zero or p.degree() <= allowed:
        return p
    kept = p.truncate_above(allowed) if allowed >= p.min_exp else LaurentPoly()
    excess = (p - kept).max_abs()
    if excess > tol * max(1.0, scale):
        raise InconsistentQuotient(
            f"entry of degree {p.degree()} where at most {allowed} is consistent "
            f"with det == 1 (excess coefficient {excess:.3g})")
    return kept


def _fit_quotient(q: LaurentPoly, systems) -> LaurentPoly:
    """Least-squares ``q`` making every ``target - q*source`` vanish above ``keep``.

    ``systems`` holds (target, source, keep) triples of ordinary polynomials.
    Long division reads ``q`` off one entry only; fitting the coefficients
    that must cancel in both entries of a row is much better conditioned.
    """
    if q.is_zero:
        return q
    width = int(q.degree()) + 1
    eqs, rhs = [], []
    for target, source, keep in systems:
        if source.is_zero:
            continue
        top = int(max(_deg(target), _deg(source) + width - 1))
        lo = int(max(keep, -1)) + 1
        if top < lo:
            continue
        src = source.dense(-width, top)
        for p in range(lo, top + 1):
            eqs.append(src[p - np.arange(width) + width])
            rhs.append(target.coeff(p))
    if len(rhs) < width:
        return q
    sol, *_ = np.linalg.lstsq(np.array(eqs), np.array(rhs), rcond=None)
    return LaurentPoly(sol)


def _deg(p: LaurentPoly):
    return p.degree()


def extract_shift(a: PolyMatrix, tol: float = 1e-10) -> tuple[PolyMatrix, int]:
    """Write a = z^l * a' with det a' = 1.

    Raises:
        NotSL: det(a) is not z^(N*l) for an integer l.
    """
    d = det(a)
    thresh = sl_threshold(a, tol)
    if not d.is_zero:
        e = d.min_exp + int(np.argmax(np.abs(d.coeffs)))
        lead = LaurentPoly.monomial(e, d.coeff(e))
        if ((d - lead).max_abs() <= thresh and abs(d.coeff(e) - 1.0) <= thresh
                and e % a.n == 0):
            l = e // a.n
            return (a if l == 0 else a.scale(LaurentPoly.monomial(-l))), l
    raise NotSL(f"determinant is not identically 1 (got {d!r})")


def merge_steps(steps) -> list[LiftingStep]:
    """Fuse neighbouring triangular steps whose product has no cross term."""
    out: list[LiftingStep] = []
    for s in steps:
        if s.is_triangular and all(p.is_zero for p in s.params):
            continue
        if out:
            prev = out[-1]
            if (prev.is_triangular and s.kind is prev.kind and s.offset == prev.offset
                    and len(s.params) == len(prev.params)):
                cols = {j for (_, j), _ in prev.positions()}
                if not any(i in cols for (i, _), _ in s.positions()):
                    params = tuple(a + b for a, b in zip(prev.params, s.params))
                    out[-1] = LiftingStep(s.kind, params, s.offset)
                    if all(p.is_zero for p in params):
                        out.pop()
                    continue
        out.append(s)
    return out


def _transvection(n: int, target: int, source: int, q: LaurentPoly) -> LiftingStep:
    p = abs(target - source)
    params = [LaurentPoly()] * (n - p)
    params[min(target, source)] = q
    kind = StepKind.LOWER if target > source else StepKind.UPPER
    return LiftingStep(kind, tuple(params), p)


# -- prepass -------------------------------------------------------------------

def degree_prepass(a: PolyMatrix, tol: float = 1e-10):
    """Arrange column-0 degrees so the Euclidean pass can start directly.

    For N = 2 the lower-left entry is reduced below the degree of the
    upper-left one with one lower step (the upper/lower Euclid then starts
    by dividing A[0,0] by A[1,0]).  For N > 2 the upper-left entry is made
    the minimal-degree entry of column 0 with one upper step.

    Returns:
        (pre_steps, adjusted) with a == product(pre_steps) @ adjusted.
    """
    if not a.is_sl(tol):
        raise NotSL("degree_prepass needs det == 1")
    n = a.n
    rows = [list(r) for r in a.entries]
    if n == 2:
        al, be, ga, de = rows[0][0], rows[0][1], rows[1][0], rows[1][1]
        if al.is_zero or ga.is_zero or _deg(ga) <= _deg(al):
            return [], a
        ell, ga2 = divrem(ga, al, tol)
        de2 = _sub_mul(de, ell, be, tol)
        allowed = max(_deg(be * ga2) if not ga2.is_zero else NEG_INF, 0) - _deg(al)
        de2 = _cap_degree(de2, allowed, max(de.max_abs(), (ell * be).max_abs()), tol)
        return [LiftingStep.lower([ell])], PolyMatrix.from_rows([[al, be], [ga2, de2]])

    nz = [i for i in range(n) if not rows[i][0].is_zero]
    if not nz:
        raise NotSL("first column vanishes")
    k = min(nz, key=lambda i: (_deg(rows[i][0]), -abs(rows[i][0].leading())))
    if k == 0 or (not rows[0][0].is_zero and _deg(rows[0][0]) <= _deg(rows[k][0])):
        return [], a
    if rows[0][0].is_zero:
        u, r = LaurentPoly.constant(-1.0), rows[k][0]
    else:
        u, r = divrem(rows[0][0], rows[k][0], tol)
    new0 = [r] + [_sub_mul(rows[0][j], u, rows[k][j], tol) for j in range(1, n)]
    rows[0] = new0
    return [_transvection(n, 0, k, u)], PolyMatrix.from_rows(rows)


# -- 2x2 ------------------------------------------------------------------------

def factor_2x2(a: PolyMatrix, tol: float = 1e-10) -> LiftingChain:
    """Alternating upper/lower Euclid for SL_2(pol).

    Upper peel: A[0,0] = u*A[1,0] + h0 and A[0,1] = u*A[1,1] + h1.
    Lower peel: A[1,0] = L*h0 + q0 and A[1,1] = L*h1 + q1.
    The quotient is taken from column 0; column 1 must then drop in degree
    as the determinant forces, otherwise InconsistentQuotient is raised.

    Inputs with negative exponents are routed to :func:`factor_nxn`.
    """
    if a.n != 2:
        raise DimensionMismatch("factor_2x2 needs a 2x2 matrix")
    a, shift = extract_shift(a, tol)
    if not a.is_ordinary:
        return _with_shift(factor_nxn(a, tol), shift)

    steps, a = degree_prepass(a, tol)
    al, be = a[0, 0], a[0, 1]
    ga, de = a[1, 0], a[1, 1]
    budget = 2 * int(max(_deg(al), _deg(ga), 0)) + 6

    while True:
        if ga.is_zero:
            break
        if budget == 0:
            raise NonTerminating("Euclidean pass did not reach a zero remainder")
        budget -= 1
        # upper peel
        u, h0 = divrem(al, ga, tol)
        hd = _deg(h0 * de) if not h0.is_zero else NEG_INF
        cap = max(hd, 0) - _deg(ga)
        u = _fit_quotient(u, [(al, ga, _deg(ga) - 1), (be, de, cap)])
        h0 = _cap_degree(_sub_mul(al, u, ga, tol), _deg(ga) - 1, al.max_abs(), 1e-6)
        h1 = _sub_mul(be, u, de, tol)
        h1 = _cap_degree(h1, cap, max(be.max_abs(), (u * de).max_abs()), tol)
        steps.append(LiftingStep.upper([u]))
        al, be = h0, h1
        if al.is_zero:
            break
        # lower peel
        ell, q0 = divrem(ga, al, tol)
        qd = _deg(be * q0) if not q0.is_zero else NEG_INF
        cap = max(qd, 0) - _deg(al)
        ell = _fit_quotient(ell, [(ga, al, _deg(al) - 1), (de, be, cap)])
        q0 = _cap_degree(_sub_mul(ga, ell, al, tol), _deg(al) - 1, ga.max_abs(), 1e-6)
        q1 = _sub_mul(de, ell, be, tol)
        q1 = _cap_degree(q1, cap, max(de.max_abs(), (ell * be).max_abs()), tol)
        steps.append(LiftingStep.lower([ell]))
        ga, de = q0, q1

    if ga.is_zero:
        # [[K, beta], [0, 1/K]] = Upper(beta*K) @ diag(K, 1/K)
        if _deg(al) != 0 or _deg(de) != 0:
            raise InconsistentQuotient("terminal diagonal is not constant")
        K = complex(al.coeffs[0])
        if abs(K * complex(de.coeffs[0]) - 1.0) > 1e3 * tol * max(1.0, abs(K)):
            raise InconsistentQuotient("terminal diagonal does not have determinant 1")
        if not be.is_zero:
            steps.append(LiftingStep.upper([be * K]))
    else:
        # [[0, beta], [gamma, delta]] with -beta*gamma = 1
        if _deg(be) != 0 or _deg(ga) != 0:
            raise InconsistentQuotient("column 0 gcd is not a unit")
        g = complex(ga.coeffs[0])
        steps.append(LiftingStep.upper([LaurentPoly.constant(-1.0 / g)]))
        steps.append(LiftingStep.lower([LaurentPoly.constant(g)]))
        steps.append(LiftingStep.upper([be + de / g]))
        K = 1.0

    K = _snap_unit(K)
    return LiftingChain(2, tuple(merge_steps(steps)), residual_matrix(2, shift, K), shift, K)


def _snap_unit(K: complex) -> complex:
    return 1.0 + 0j if K == 1 else complex(K)


def _with_shift(chain: LiftingChain, shift: int) -> LiftingChain:
    if shift == 0:
        return chain
    l = chain.shift + shift
    return LiftingChain(chain.n, chain.steps, residual_matrix(chain.n, l, chain.scale),
                        l, chain.scale)


# -- N x N ----------------------------------------------------------------------

class _Elimination:
    """Row-operation bookkeeping for the column Euclid."""

    def __init__(self, a: PolyMatrix, tol: float):
        self.n = a.n
        self.rows = [list(r) for r in a.entries]
        self.tol = tol
        self.laurent = not a.is_ordinary
        self.steps: list[LiftingStep] = []

    def size(self, p: LaurentPoly):
        return p.width() if self.laurent else p.degree()

    def divide(self, f, g):
        if self.laurent:
            return laurent_divrem(f, g, self.tol)
        return divrem(f, g, self.tol)

    def row_op(self, target: int, source: int, q: LaurentPoly, forced=None):
        """rows[target] -= q * rows[source]; record the undoing transvection."""
        if q.is_zero:
            return
        forced = forced or {}
        src, tgt = self.rows[source], self.rows[target]
        for j in range(self.n):
            if j in forced:
                tgt[j] = forced[j]
            else:
                tgt[j] = _sub_mul(tgt[j], q, src[j], self.tol)
        self.steps.append(_transvection(self.n, target, source, q))

    def is_unit(self, p: LaurentPoly) -> bool:
        return p.is_monomial and (self.laurent or p.min_exp == 0)

    def reduce_column(self, c: int) -> int:
        """Euclid on rows c..n-1 of column c; returns the surviving row."""
        rows = self.rows
        budget = 4 * self.n * (int(max((self.size(rows[i][c]) for i in range(c, self.n)
                                         if not rows[i][c].is_zero), default=0)) + 3)
        last = None
        while True:
            nz = [i for i in range(c, self.n) if not rows[i][c].is_zero]
            if not nz:
                raise NotSL(f"column {c} vanishes below the diagonal")
            if len(nz) == 1:
                return nz[0]
            piv = min(nz, key=lambda i: (self.size(rows[i][c]), -abs(rows[i][c].leading())))
            sz = self.size(rows[piv][c])
            if last is not None and sz >= last:
                raise NonTerminating(f"Euclidean size stalled at {sz} in column {c}")
            last = sz
            budget -= 1
            if budget < 0:
                raise NonTerminating("column elimination exceeded its step budget")
            for i in nz:
                if i == piv:
                    continue
                q, r = self.divide(rows[i][c], rows[piv][c])
                self.row_op(i, piv, q, {c: r})

    def place_pivot(self, c: int, k: int, target: complex):
        """Leave ``target`` at (c, c) and zeros elsewhere in rows c.. of column c."""
        rows = self.rows
        p = rows[k][c]
        if not self.is_unit(p):
            raise InconsistentQuotient(f"gcd of column {c} is not a unit: {p!r}")
        t = LaurentPoly.constant(target)
        zero = LaurentPoly()
        if k != c:
            self.row_op(c, k, LaurentPoly.constant(-target) / p, {c: t})
            self.row_op(k, c, p / target, {c: zero})
        elif p != t:
            self.row_op(c + 1, c, LaurentPoly.constant(-1.0), {c: p})
            self.row_op(c, c + 1, 1.0 - t / p, {c: t})
            self.row_op(c + 1, c, p / target, {c: zero})


# -- dense degree reduction ----------------------------------------------------
#
# Ordinary matrices are reduced on a coefficient array ``rows[i, j, k]`` (the
# z^k coefficient of entry (i, j)); trimmed coefficients are exact zeros, so an
# entry's degree is the index of its last nonzero coefficient.

def _to_dense(a: PolyMatrix) -> np.ndarray:
    size = int(max(a.max_degree(), 0)) + 1
    out = np.zeros((a.n, a.n, size), dtype=complex)
    for i in range(a.n):
        for j in range(a.n):
            p = a[i, j]
            if not p.is_zero:
                out[i, j, p.min_exp:p.min_exp + len(p.coeffs)] = p.coeffs
    return out


def _degrees(block: np.ndarray) -> np.ndarray:
    """Degree of each polynomial along the last axis; -1 for zero."""
    nz = block != 0
    top = block.shape[-1] - 1 - nz[..., ::-1].argmax(axis=-1)
    return np.where(nz.any(axis=-1), top, -1)


def _trim_top(block: np.ndarray, thresh: float) -> np.ndarray:
    big = np.abs(block) > thresh
    keep = np.logical_or.accumulate(big[..., ::-1], axis=-1)[..., ::-1]
    return np.where(keep, block, 0)


def _row_cost(row: np.ndarray) -> int:
    return int(_degrees(row).sum())


def _sub_row(target: np.ndarray, q: np.ndarray, source: np.ndarray, tol: float) -> np.ndarray:
    """target - q*source, entrywise, with cancellation noise trimmed."""
    n, size = source.shape
    width = len(q)
    padded = np.zeros((n, size + width - 1), dtype=complex)
    padded[:, width - 1:] = source
    step0, step1 = padded.strides
    windows = as_strided(padded, (n, size, width), (step0, step1, step1), writeable=False)
    prod = windows @ q[::-1]
    scale = max(1.0, np.abs(target).max(), np.abs(prod).max())
    return _trim_top(target - prod, tol * scale)


_PROBES = np.exp(2j * np.pi * np.array([0.05, 0.29, 0.47, 0.71, 0.88]))


def _inverse_transpose(rows: np.ndarray) -> np.ndarray:
    """inv(A)^T as a coefficient array, for det A == 1.

    The adjugate has degree at most (N-1) deg A, so sampling at that many
    roots of unity and inverting pointwise recovers it exactly up to rounding.
    """
    n, _, size = rows.shape
    m = (n - 1) * (size - 1) + 1
    vals = np.fft.fft(rows, m, axis=-1).transpose(2, 0, 1)
    inv = np.linalg.inv(vals).transpose(2, 1, 0)
    out = np.fft.ifft(inv, axis=-1)
    scale = max(1.0, float(np.abs(out).max()))
    out = _trim_top(np.where(np.abs(out) > 1e-11 * scale, out, 0), 0)
    return out


def _pad(block: np.ndarray, size: int) -> np.ndarray:
    if block.shape[-1] >= size:
        return block
    out = np.zeros(block.shape[:-1] + (size,), dtype=complex)
    out[..., :block.shape[-1]] = block
    return out


def _values(block: np.ndarray) -> np.ndarray:
    powers = _PROBES[None, :] ** np.arange(block.shape[-1])[:, None]
    return np.moveaxis(block @ powers, -1, 0)


def _intact(a: np.ndarray, c: np.ndarray) -> bool:
    """A C^T == I at a few points of the circle, up to norm-scaled rounding."""
    va, vc = _values(a), _values(c)
    prod = np.einsum("kij,klj->kil", va, vc)
    scale = np.linalg.norm(va, axis=(1, 2)) * np.linalg.norm(vc, axis=(1, 2))
    err = np.abs(prod - np.eye(len(a))).max(axis=(1, 2))
    return bool(np.all(err <= 1e-7 * np.maximum(1.0, scale)))


def _refine_quotient(systems, q: np.ndarray, tol: float) -> np.ndarray:
    """Re-solve ``q`` by least squares over every coefficient it cancels.

    ``systems`` lists (target, source) row pairs updated as
    ``target - q * source``.  Long division in one column amplifies
    rounding by powers of |source| / |leading coefficient|; fitting all
    cancelled coefficients of all columns at once is far better conditioned.
    """
    width = len(q)
    shifts = np.arange(width) - (width - 1)
    eqs, rhs = [], []
    for target, source in systems:
        n, size = target.shape
        keep = _degrees(_sub_row(target, q, source, tol))
        ds = _degrees(source)
        top = np.maximum(_degrees(target), ds + width - 1)
        js = np.concatenate([np.full(max(top[j] - keep[j], 0), j) for j in range(n) if ds[j] >= 0]
                            + [np.zeros(0, dtype=int)]).astype(int)
        ps = np.concatenate([np.arange(keep[j] + 1, top[j] + 1) for j in range(n) if ds[j] >= 0]
                            + [np.zeros(0, dtype=int)]).astype(int)
        if not len(js):
            continue
        src = np.concatenate([np.zeros((n, width - 1)), source, np.zeros((n, width))], axis=1)
        tgt = np.concatenate([target, np.zeros((n, width))], axis=1)
        eqs.append(src[js[:, None], ps[:, None] - shifts[None, :]])
        rhs.append(tgt[js, ps])
    if sum(len(r) for r in rhs) < width:
        return q
    sol, *_ = np.linalg.lstsq(np.concatenate(eqs), np.concatenate(rhs), rcond=None)
    return sol


def _poly_quot(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Quotient of the Euclidean division of trimmed coefficient vectors."""
    r = x.astype(complex)
    dy = len(y) - 1
    q = np.zeros(len(x) - dy, dtype=complex)
    for k in range(len(q) - 1, -1, -1):
        q[k] = r[dy + k] / y[dy]
        r[k:k + dy + 1] -= q[k] * y
    return q


def _quotient_candidates(target: np.ndarray, source: np.ndarray) -> list[np.ndarray]:
    """Distinct column-wise quotients quot(target[j], source[j])."""
    dt, ds = _degrees(target), _degrees(source)
    floor = 1e-6 * np.abs(source).max()
    out: list[np.ndarray] = []
    for j in range(len(dt)):
        if ds[j] < 0 or dt[j] < ds[j] or abs(source[j, ds[j]]) < floor:
            continue
        q = _poly_quot(target[j, :dt[j] + 1], source[j, :ds[j] + 1])
        if np.any(q) and not any(_same(p, q) for p in out):
            out.append(q)
    return out


def _pair_cost(a: np.ndarray, c: np.ndarray) -> int:
    return _row_cost(a.reshape(-1, a.shape[-1])) + _row_cost(c.reshape(-1, c.shape[-1]))


def _same(p: np.ndarray, q: np.ndarray) -> bool:
    return len(p) == len(q) and np.abs(p - q).max() <= 1e-6 * max(1.0, np.abs(q).max())


def _pair_sweep(a: np.ndarray, c: np.ndarray, kind: str, tol: float):
    """One bidiagonal peel from the left, mirrored on C = inv(A)^T.

    ``row_t(A) -= q row_s(A)`` turns into ``row_s(C) += q row_t(C)``, so a
    quotient may be read off either matrix.  Parameters whose degree is
    dominated in A often show up in C.  Every combination of candidates
    (skipping a pair included) is searched; the lowest total degree wins.

    Returns (cost, new A, new C, [(target, source, q), ...]).
    """
    n = len(a)
    pairs = ([(i, i + 1) for i in range(n - 2, -1, -1)] if kind == "upper"
             else [(i, i - 1) for i in range(1, n)])
    best = [None]

    def walk(k, a, c, ops):
        if k == len(pairs):
            cost = _pair_cost(a, c)
            if best[0] is None or cost < best[0][0]:
                best[0] = (cost, a, c, list(ops))
            return
        t, s = pairs[k]
        cost_a, cost_c = _row_cost(a[t]), _row_cost(c[s])
        base = cost_a + cost_c
        taken = False
        seen: list[np.ndarray] = []
        for q in (_quotient_candidates(a[t], a[s])
                  + [-x for x in _quotient_candidates(c[s], c[t])]):
            if any(_same(p, q) for p in seen):
                continue
            seen.append(q)
            # cheap screen: with a loose trim the raw quotient must already help
            if _row_cost(_sub_row(a[t], q, a[s], 1e-6)) >= cost_a and \
                    _row_cost(_sub_row(c[s], -q, c[t], 1e-6)) >= cost_c:
                continue
            q = _refine_quotient([(a[t], a[s]), (c[s], -c[t])], q, tol)
            na = _sub_row(a[t], q, a[s], tol)
            nc = _sub_row(c[s], -q, c[t], tol)
            if not np.any(na) or not np.any(nc) or _row_cost(na) + _row_cost(nc) >= base:
                continue
            a2, c2 = a.copy(), c.copy()
            a2[t], c2[s] = na, nc
            if not _intact(a2, c2):
                continue
            ops.append((t, s, q))
            walk(k + 1, a2, c2, ops)
            ops.pop()
            taken = True
        if not taken:
            walk(k + 1, a, c, ops)

    walk(0, a, c, [])
    return best[0]


def _peel_options(a: np.ndarray, c: np.ndarray, tol: float):
    """Degree-lowering peels from both sides, complete sweeps first."""
    current = _pair_cost(a, c)
    out = []
    for on_cols in (False, True):
        ta, tc = (a.transpose(1, 0, 2), c.transpose(1, 0, 2)) if on_cols else (a, c)
        for kind in ("upper", "lower"):
            cost, na, nc, ops = _pair_sweep(ta, tc, kind, tol)
            if ops and cost < current:
                if on_cols:
                    na, nc = na.transpose(1, 0, 2).copy(), nc.transpose(1, 0, 2).copy()
                out.append((len(ops) < len(a) - 1, cost, on_cols, na, nc, ops))
    out.sort(key=lambda o: o[:2])
    return out


def _sweep_reduce(rows: np.ndarray, tol: float, budget: int = 40):
    """Peel whole bidiagonal factors from either side until the matrix is constant.

    Removing an upper bidiagonal factor from the left is the bottom-up
    sweep row_i -= U_i row_{i+1}, i = N-2..0; a lower factor is the
    top-down sweep row_i -= L_{i-1} row_{i-1}.  Factors on the right are
    the same sweeps on columns.  The order of peels is found by a
    depth-first search limited to ``budget`` nodes; if it never reaches a
    constant matrix, the lowest-degree state seen is returned.

    Returns (rows, left ops, right ops).  Left ops are row operations in
    the order applied; right ops are column operations ``col_t -= q col_s``
    listed leftmost factor first.
    """
    inv_t = _inverse_transpose(rows)
    size = max(rows.shape[-1], inv_t.shape[-1])
    start = (_pad(rows, size), _pad(inv_t, size), [], [])
    nodes = [budget]
    best = [(_pair_cost(start[0], start[1]), start)]

    def search(state):
        a, c, left, right = state
        if _degrees(a).max() <= 0:
            return state
        if nodes[0] <= 0:
            return None
        nodes[0] -= 1
        cost = _pair_cost(a, c)
        if cost < best[0][0]:
            best[0] = (cost, state)
        for _, _, on_cols, na, nc, ops in _peel_options(a, c, tol):
            if on_cols:
                found = search((na, nc, left, list(reversed(ops)) + right))
            else:
                found = search((na, nc, left + ops, right))
            if found is not None:
                return found
        return None

    a, _, left, right = search(start) or best[0][1]
    return a, left, right


def factor_nxn(a: PolyMatrix, tol: float = 1e-10, budget: int = 40) -> LiftingChain:
    """Lifting factorization of SL_N(pol), N >= 2.

    Ordinary inputs are first brought to a constant matrix by peeling
    bidiagonal factors off either side (each update is a transvection
    between two adjacent rows or columns).  The
    remaining matrix is then eliminated column by column: column c is
    reduced among rows c..N-1 by repeated division by its lowest-degree
    entry (width for Laurent inputs) until one unit remains, which is moved
    to the diagonal.  Column 0 keeps its constant as K, column 1 is
    normalized to 1/K and the others to 1.  Finally the unit upper
    triangular part is cleared from the last column backwards.
    """
    n = a.n
    if n < 2:
        raise DimensionMismatch("need at least two bands")
    a, shift = extract_shift(a, tol)
    right = []
    if a.is_ordinary:
        rest, left, cols = _sweep_reduce(_to_dense(a), tol, budget)
        el = _Elimination(PolyMatrix.from_rows(
            [[LaurentPoly(p) for p in row] for row in rest]), tol)
        el.steps = [_transvection(n, t, s, LaurentPoly(q)) for t, s, q in left]
        # col_t -= q col_s, i.e. M = M' (I + q E[s, t])
        right = [_transvection(n, s, t, LaurentPoly(q)) for t, s, q in cols]
    else:
        el = _Elimination(a, tol)
    rows = el.rows
    K = 1.0 + 0j
    for c in range(n - 1):
        k = el.reduce_column(c)
        if c == 0:
            p = rows[k][0]
            K = complex(p.coeffs[0]) if (k == 0 and el.is_unit(p)) else 1.0 + 0j
            el.place_pivot(0, k, K)
        else:
            el.place_pivot(c, k, 1.0 / K if c == 1 else 1.0)

    last = rows[n - 1][n - 1]
    want = 1.0 / K if n == 2 else 1.0
    if not (last.is_monomial and last.min_exp == 0
            and abs(last.coeffs[0] - want) <= 1e3 * tol * max(1.0, abs(want))):
        raise InconsistentQuotient(f"final diagonal entry {last!r} != {want}")
    diag = [K, 1.0 / K] + [1.0] * (n - 2)
    rows[n - 1][n - 1] = LaurentPoly.constant(diag[n - 1])

    for j in range(n - 1, 0, -1):
        for i in range(j):
            e = rows[i][j]
            if not e.is_zero:
                el.row_op(i, j, e / diag[j], {j: LaurentPoly()})

    K = _snap_unit(K)
    if right:
        # the residual sits between the left chain and the right factors;
        # move it to the end: D T = (D T D^-1) D
        dinv = [1.0 / d for d in diag]
        for st in right:
            params = []
            for k, p in enumerate(st.params):
                r, c = (k + st.offset, k) if st.kind is StepKind.LOWER else (k, k + st.offset)
                params.append(p * (diag[r] * dinv[c]))
            el.steps.append(LiftingStep(st.kind, tuple(params), st.offset))
    return LiftingChain(n, tuple(merge_steps(el.steps)), residual_matrix(n, shift, K),
                        shift, K)


# -- parameter refinement -----------------------------------------------------------

def _dense(m: PolyMatrix) -> tuple[int, np.ndarray]:
    lo = m.min_exponent()
    hi = int(max(m.max_degree(), lo))
    arr = np.zeros((m.n, m.n, hi - lo + 1), dtype=complex)
    for i in range(m.n):
        for j in range(m.n):
            arr[i, j] = m[i, j].dense(lo, hi)
    return lo, arr


def _dmul(a, b):
    (alo, x), (blo, y) = a, b
    size = x.shape[-1] + y.shape[-1] - 1
    fx = np.fft.fft(x, size)
    fy = np.fft.fft(y, size)
    return alo + blo, np.fft.ifft(np.einsum("ikf,kjf->ijf", fx, fy), size)


def _place(pieces, lo: int, hi: int) -> np.ndarray:
    out = np.zeros(pieces[1].shape[:-1] + (hi - lo + 1,), dtype=complex)
    plo, arr = pieces
    out[..., plo - lo: plo - lo + arr.shape[-1]] = arr
    return out


def refine_chain(chain: LiftingChain, a: PolyMatrix, iterations: int = 4) -> LiftingChain:
    """Polish the step coefficients by Gauss-Newton on ``product(chain) - a``.

    The recovered structure (step kinds, offsets, supports of the
    parameters) is kept; only coefficient values move.  The product is
    multilinear in the coefficients, so a chain that is correct up to
    rounding noise converges in one or two iterations.  The refined chain
    is returned only if it reduces the coefficient error.
    """
    return _refine(chain, a, iterations)[0]


def _refine(chain: LiftingChain, a: PolyMatrix, iterations: int = 4):
    n = chain.n
    # variables: (step index, param index, exponent)
    slots = [(k, i, e) for k, st in enumerate(chain.steps) if st.is_triangular
             for i, p in enumerate(st.params) if not p.is_zero
             for e in range(p.min_exp, int(p.degree()) + 1)]
    free_scale = chain.scale != 1
    target = _dense(a)
    best, best_err = chain, _dense_error(chain, target)
    if not slots and not free_scale:
        return best, best_err
    for _ in range(iterations):
        if best_err <= 1e-15 * max(1.0, a.max_abs()):
            break
        mats = [_dense(realize_step(st, n)) for st in best.steps]
        prefix = [(0, np.eye(n, dtype=complex)[..., None])]
        for m in mats:
            prefix.append(_dmul(prefix[-1], m))
        suffix = [_dense(best.residual)]
        for m in reversed(mats):
            suffix.append(_dmul(m, suffix[-1]))
        suffix.reverse()
        prod = prefix[-1][0], prefix[-1][1]
        prod = _dmul(prod, suffix[-1])

        positions = {}
        cols = []
        for k, i, e in slots:
            st = best.steps[k]
            r, c = ((i + st.offset, i) if st.kind is StepKind.LOWER else (i, i + st.offset))
            key = (k, r, c)
            if key not in positions:
                plo, parr = prefix[k]
                qlo, qarr = suffix[k + 1]
                left = (plo, parr[:, r:r + 1, :])
                right = (qlo, qarr[c:c + 1, :, :])
                positions[key] = _dmul(left, right)
            glo, g = positions[key]
            cols.append((glo + e, g))
        if free_scale:
            K = best.scale
            dres = residual_matrix(n, best.shift, 1.0)
            dres = PolyMatrix.diagonal([dres[0, 0], dres[1, 1] * (-1.0 / K ** 2)]
                                       + [LaurentPoly()] * (n - 2))
            cols.append(_dmul(prefix[-1], _dense(dres)))
        lo = min([target[0], prod[0]] + [c[0] for c in cols])
        hi = max([target[0] + target[1].shape[-1], prod[0] + prod[1].shape[-1]]
                 + [c[0] + c[1].shape[-1] for c in cols]) - 1
        resid = (_place(prod, lo, hi) - _place(target, lo, hi)).ravel()
        jac = np.stack([_place(c, lo, hi).ravel() for c in cols], axis=1)
        delta = np.linalg.lstsq(jac, -resid, rcond=None)[0]

        steps = [list(st.params) if st.is_triangular else st.params for st in best.steps]
        updates: dict[tuple[int, int], dict[int, complex]] = {}
        for (k, i, e), d in zip(slots, delta[:len(slots)]):
            updates.setdefault((k, i), {})[e] = d
        for (k, i), upd in updates.items():
            p = steps[k][i]
            coeffs = np.array([p.coeff(e) + upd.get(e, 0) for e in range(p.min_exp, int(p.degree()) + 1)])
            steps[k][i] = LaurentPoly(coeffs, p.min_exp, tol=0.0)
        K = best.scale + delta[-1] if free_scale else best.scale
        cand = LiftingChain(n, tuple(LiftingStep(st.kind, tuple(steps[k]), st.offset)
                                     if st.is_triangular else st
                                     for k, st in enumerate(best.steps)),
                            residual_matrix(n, best.shift, K), best.shift, K)
        err = _dense_error(cand, target)
        if err >= best_err:
            break
        best, best_err = cand, err
    return best, best_err


#: trim tolerances tried in turn by :func:`factor`
ESCALATION = (1.0, 10.0, 100.0, 1e3, 1e4)
SEARCH_BUDGET = 25


def _dense_product(chain: LiftingChain):
    acc = (0, np.eye(chain.n, dtype=complex)[..., None])
    for st in chain.steps:
        acc = _dmul(acc, _dense(realize_step(st, chain.n)))
    return _dmul(acc, _dense(chain.residual))


def _dense_error(chain: LiftingChain, target) -> float:
    prod = _dense_product(chain)
    lo = min(prod[0], target[0])
    hi = max(prod[0] + prod[1].shape[-1], target[0] + target[1].shape[-1]) - 1
    return float(np.abs(_place(prod, lo, hi) - _place(target, lo, hi)).max())


def factor(a: PolyMatrix, tol: float = 1e-10, verify_tol: float = 1e-9) -> LiftingChain:
    """Factor with the classical route for 2x2 and degree reduction otherwise.

    Floating-point remainders that vanish in exact arithmetic can survive
    the trim threshold after a few divisions, which derails the degree
    bookkeeping.  The run is therefore repeated with looser trim tolerances
    until the chain multiplies back to
    ``a`` within ``verify_tol`` relative to the largest coefficient of
    ``a``.  The most accurate chain is returned if none meets the bound;
    the last error is re-raised when every attempt fails.
    """
    extract_shift(a, tol)
    bound = verify_tol * max(1.0, a.max_abs())
    last_err: Exception | None = None
    best = None
    for k, mult in enumerate(ESCALATION):
        try:
            if a.n == 2:
                chain = factor_2x2(a, tol * mult)
            else:
                # looser trims rarely change the peel order; search them briefly
                chain = factor_nxn(a, tol * mult, budget=SEARCH_BUDGET if k == 0 else 6)
        except FactorizationError as e:
            last_err = e
            continue
        chain, err = _refine(chain, a)
        if err <= bound:
            return chain
        if best is None or err < best[0]:
            best = (err, chain)
    if best is not None:
        return best[1]
    raise last_err


# -- verification -----------------------------------------------------------------

@dataclass
class ChainReport:
    max_coeff_err: float
    degree_profile: list = field(default_factory=list)
    tol: float = 1e-9

    @property
    def ok(self) -> bool:
        return self.max_coeff_err <= self.tol

    def descent_ok(self, kinds) -> bool:
        return check_degree_descent(kinds, self.degree_profile)


def _clean_matmul(a: PolyMatrix, b: PolyMatrix, rtol: float) -> PolyMatrix:
    n = a.n
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            acc, scale = LaurentPoly(), 0.0
            for k in range(n):
                if a[i, k].is_zero or b[k, j].is_zero:
                    continue
                t = a[i, k] * b[k, j]
                scale = max(scale, t.max_abs())
                acc = acc + t
            row.append(acc.trimmed(rtol * max(1.0, scale)))
        rows.append(row)
    return PolyMatrix.from_rows(rows)


def verify_chain(chain: LiftingChain, original: PolyMatrix, tol: float = 1e-9,
                 rtol: float = 1e-9) -> ChainReport:
    """Multiply the chain back out and compare with ``original``.

    The degree profile replays the peels: entry k is the largest entry
    degree of the remaining factor after the first k+1 steps are removed.
    """
    if chain.n != original.n:
        raise DimensionMismatch("chain and matrix sizes differ")
    err = chain.product().max_diff(original)
    m = original if chain.shift == 0 else original.scale(LaurentPoly.monomial(-chain.shift))
    profile = []
    for s in chain.steps:
        m = _clean_matmul(step_inverse_matrix(s, chain.n), m, rtol)
        d = m.max_degree()
        profile.append(int(d) if d != NEG_INF else d)
    return ChainReport(err, profile, tol)


def check_degree_descent(kinds, profile) -> bool:
    """Between successive peels of the same kind the profile strictly drops.

    Once the remaining factor is constant (profile 0) nothing can drop any
    further, so comparisons starting from 0 are skipped.
    """
    kinds = [getattr(k, "value", k) for k in kinds]
    for i, k in enumerate(kinds):
        if k not in ("lower", "upper"):
            continue
        for j in range(i + 1, len(kinds)):
            if kinds[j] == k:
                if profile[i] > 0 and not profile[j] < profile[i]:
                    return False
                break
    return True


# -- random inputs -----------------------------------------------------------------

def random_steps(n: int, n_steps: int, max_degree: int, rng: np.random.Generator,
                 start: str | None = None) -> list[LiftingStep]:
    """Alternating bidiagonal steps with random polynomial entries.

    Degrees are uniform on 0..max_degree and coefficients uniform in the
    unit disk.
    """
    kind = start or rng.choice(["lower", "upper"])
    out = []
    for _ in range(n_steps):
        polys = [random_poly(rng, int(rng.integers(0, max_degree + 1))) for _ in range(n - 1)]
        out.append(LiftingStep(kind, polys))
        kind = "upper" if kind == "lower" else "lower"
    return out


def random_sl_matrix(n: int, n_steps: int, max_degree: int, rng: np.random.Generator,
                     start: str | None = None):
    """Product of random lifting steps; returns (matrix, steps)."""
    steps = random_steps(n, n_steps, max_degree, rng, start)
    acc = PolyMatrix.identity(n)
    for s in steps:
        acc = matmul(acc, realize_step(s, n))
    return acc, steps
