"""Acceptance criteria, one test each.

Every test records a one-line PASS/FAIL summary in ``RESULTS``; the
conftest hook prints them after the run.  ``python tests/test_acceptance.py``
runs the same checks without pytest.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import tempfile
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import residual_from_functions  # noqa: E402
from polylift.cuntz import CuntzRep, verify_relations  # noqa: E402
from polylift.errors import FactorizationError  # noqa: E402
from polylift.filterbank import analyze, apply_chain, apply_matrix_direct, split, synthesize  # noqa: E402
from polylift.gridfun import (GridFunction, diagonal_termination_check, norm_objective,  # noqa: E402
                              optimal_lower_2x2, optimal_upper_2x2, random_sl_grid,
                              random_su_grid)
from polylift.liftfactor import (LiftingChain, factor, random_sl_matrix, random_steps,  # noqa: E402
                                 residual_matrix, verify_chain)

RESULTS: dict[int, str] = {}
SEED = 20240601
GRID_M = 256


def record(num: int, name: str, passed: bool, detail: str) -> bool:
    RESULTS[num] = f"[{'PASS' if passed else 'FAIL'}] criterion {num} ({name}): {detail}"
    return passed


# -- 1 and 2: polynomial round trip and degree descent ------------------------------

@lru_cache(maxsize=1)
def roundtrip_corpus():
    """Factor 200 random 2x2 and 50 each of 3x3 and 4x4 lifting products.

    Each matrix is a product of 1..6 random bidiagonal steps with entry
    degrees 0..4 and coefficients in the unit disk.  Returns a list of
    (matrix, chain or exception) and the wall time of factor plus the
    product check.
    """
    rng = np.random.default_rng(SEED)
    sizes = [2] * 200 + [3] * 50 + [4] * 50
    mats = [random_sl_matrix(n, int(rng.integers(1, 7)), 4, rng)[0] for n in sizes]
    out, errors = [], []
    start = time.perf_counter()
    for a in mats:
        try:
            chain = factor(a)
        except FactorizationError as e:
            out.append((a, e))
            errors.append(np.inf)
            continue
        out.append((a, chain))
        errors.append(chain.product().max_diff(a))
    return out, np.array(errors), time.perf_counter() - start


def criterion_1() -> bool:
    try:
        cases, errors, elapsed = roundtrip_corpus()
    except Exception as e:  # a crash is a failure, unlike a classified error
        return record(1, "polynomial round trip", False, f"crashed with {e!r}")
    ok = errors <= 1e-9
    failures = {}
    for (_, res), good in zip(cases, ok):
        if not good:
            key = type(res).__name__ if isinstance(res, Exception) else "error above 1e-9"
            failures[key] = failures.get(key, 0) + 1
    rate = ok.mean()
    finite = errors[np.isfinite(errors)]
    detail = (f"{ok.sum()}/{len(ok)} within 1e-9 ({100 * rate:.1f}%, need >= 99%), "
              f"max error of successes {finite.max():.2e}, classified failures "
              f"{failures or 'none'}, factor+check time {elapsed:.1f} s "
              f"(target < 10 s: {'met' if elapsed < 10 else 'missed'})")
    return record(1, "polynomial round trip", rate >= 0.99, detail)


def criterion_2() -> bool:
    cases, errors, _ = roundtrip_corpus()
    checked = bad = 0
    for (a, chain), err in zip(cases, errors):
        if a.n != 2 or not np.isfinite(err) or err > 1e-9:
            continue
        rep = verify_chain(chain, a)
        checked += 1
        bad += not rep.descent_ok(chain.kinds)
    detail = f"{checked - bad}/{checked} successful 2x2 chains strictly descend"
    return record(2, "degree descent", bad == 0 and checked > 0, detail)


# -- 3: Cuntz relations --------------------------------------------------------------

def criterion_3() -> bool:
    mono = {n: verify_relations(CuntzRep.monomial(n), 50, 128, seed=n) for n in (2, 3, 4, 8)}
    haar = verify_relations(CuntzRep.haar(), 50, 128, seed=1)
    worst = max(max(r.max_iso_err, r.max_complete_err) for r in mono.values())
    haar_err = max(haar.max_iso_err, haar.max_complete_err)
    passed = worst == 0 and haar_err <= 1e-12
    detail = f"monomial N=2,3,4,8 max error {worst:.1e} (need 0); Haar {haar_err:.2e} (<= 1e-12)"
    return record(3, "Cuntz relations", passed, detail)


# -- 4 to 6: grid factorization -------------------------------------------------------

def random_grids(count: int, seed: int):
    rng = np.random.default_rng(seed)
    return [random_sl_grid(2, GRID_M, rng, n_steps=int(rng.integers(1, 5)), max_degree=3)
            for _ in range(count)]


def criterion_4() -> bool:
    worst = 0.0
    for g in random_grids(100, SEED + 4):
        _, a1 = optimal_lower_2x2(g)
        v = a1.values
        resid = np.abs(np.conj(v[0, 0]) * v[1, 0] + np.conj(v[0, 1]) * v[1, 1])
        worst = max(worst, float(resid.max()))
    detail = f"max pointwise residual over 100 matrices x {GRID_M} points {worst:.2e} (<= 1e-12)"
    return record(4, "optimal-L orthogonality", worst <= 1e-12, detail)


def criterion_5() -> bool:
    rng = np.random.default_rng(SEED + 5)
    worst = 0.0
    for _ in range(20):
        g = random_su_grid(2, GRID_M, rng)
        ell, _ = optimal_lower_2x2(g)
        u, _ = optimal_upper_2x2(g)
        worst = max(worst, ell.sup(), u.sup())
    detail = f"max(|L|, |U|) over 20 unitary grids {worst:.2e} (<= 1e-12)"
    return record(5, "unitary fixed point", worst <= 1e-12, detail)


def criterion_6() -> bool:
    rng = np.random.default_rng(SEED + 6)
    worst = -np.inf
    trials = 0
    for g in random_grids(20, SEED + 60):
        ell, _ = optimal_lower_2x2(g)
        a, b = g[0, 0], g[0, 1]
        c, d = g[1, 0], g[1, 1]

        def objective(L: GridFunction) -> float:
            return norm_objective([c - L * a, d - L * b])

        best = objective(ell)
        for k in range(20):
            eps = (1e-3, 1e-2, 1e-1)[k % 3]
            pert = GridFunction(rng.uniform(-1, 1, GRID_M) + 1j * rng.uniform(-1, 1, GRID_M))
            worst = max(worst, best - objective(ell + eps * pert))
            trials += 1
    detail = (f"{trials} perturbations, largest decrease below the optimum {max(worst, 0):.2e} "
              f"(slack 1e-12)")
    return record(6, "minimality", worst <= 1e-12, detail)


# -- 7: filter bank ---------------------------------------------------------------------

def criterion_7() -> bool:
    rng = np.random.default_rng(SEED + 7)
    chains = []
    for _ in range(20):
        n = int(rng.integers(2, 5))
        steps = random_steps(n, int(rng.integers(1, 7)), 4, rng)
        chains.append(LiftingChain(n, tuple(steps), residual_matrix(n)))
    signals = []
    for _ in range(50):
        length = int(rng.integers(8, 513))
        signals.append(rng.standard_normal(length) + 1j * rng.standard_normal(length))
    pr = direct = 0.0
    for ch in chains:
        mat = ch.product()
        for x in signals:
            pr = max(pr, float(np.abs(synthesize(ch, analyze(ch, x)).samples - x).max()))
            want = apply_matrix_direct(mat, x).as_array()
            got = np.array(apply_chain(ch, split(x, ch.n).bands))
            direct = max(direct, float(np.abs(want - got).max()))
    passed = pr <= 1e-10 and direct <= 1e-10
    detail = (f"20 chains x 50 signals: reconstruction {pr:.2e}, factored vs direct "
              f"{direct:.2e} (both <= 1e-10)")
    return record(7, "perfect reconstruction", passed, detail)


# -- 8: diagonal termination ------------------------------------------------------------

def criterion_8() -> bool:
    rng = np.random.default_rng(SEED + 8)
    c_phi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    c_psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    c_phi[0] += 4  # keep phi away from zero so that a unimodular pair is plausible

    def phi(z):
        return sum(c * z ** k for k, c in enumerate(c_phi))

    def psi(z):
        return sum(c * z ** -k for k, c in enumerate(c_psi))

    m = GRID_M
    res = residual_from_functions(phi, psi, m)
    got = diagonal_termination_check(res)
    zs = np.exp(2j * np.pi * np.arange(m) / m)
    err = (max(got.phi.max_diff(phi(zs)), got.psi.max_diff(psi(zs)))
           if got.is_diagonal else np.inf)
    bumped = np.array(res.values)
    bumped[0, 1] += 0.1
    rejected = not diagonal_termination_check(type(res)(bumped)).is_diagonal
    passed = got.is_diagonal and err <= 1e-12 and rejected
    detail = (f"detected {got.is_diagonal}, phi/psi recovery error {err:.2e} (<= 1e-12), "
              f"perturbed residual rejected {rejected}")
    return record(8, "diagonal termination", passed, detail)


# -- 9: CLI pipeline ---------------------------------------------------------------------

def criterion_9() -> bool:
    def cli(*args):
        proc = subprocess.run([sys.executable, "-m", "polylift", *map(str, args)],
                              capture_output=True, text=True, cwd=work)
        report = json.loads(proc.stdout) if proc.stdout.strip() else {}
        return proc.returncode, report

    start = time.perf_counter()
    with tempfile.TemporaryDirectory() as work:
        runs = [
            cli("gen", "--n", 3, "--steps", 4, "--seed", 7, "--output", "a.json"),
            cli("factor", "--input", "a.json", "--output", "chain.json"),
            cli("verify", "--chain", "chain.json", "--input", "a.json"),
            cli("gen", "--kind", "signal", "--length", 300, "--seed", 8, "--output", "x.json"),
            cli("apply", "--chain", "chain.json", "--signal", "x.json", "--out", "bands.json"),
            cli("reconstruct", "--chain", "chain.json", "--bands", "bands.json",
                "--out", "y.json", "--reference", "x.json"),
        ]
    elapsed = time.perf_counter() - start
    codes = [c for c, _ in runs]
    verify, recon = runs[2][1], runs[5][1]
    passed = (all(c == 0 for c in codes) and verify.get("max_coeff_err", 1) <= 1e-9
              and recon.get("max_abs_err", 1) <= 1e-10 and elapsed < 30)
    detail = (f"exit codes {codes}, verify error {verify.get('max_coeff_err', float('nan')):.2e}, "
              f"reconstruction error {recon.get('max_abs_err', float('nan')):.2e}, "
              f"total {elapsed:.1f} s (< 30 s)")
    return record(9, "CLI pipeline", passed, detail)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("check", CRITERIA, ids=[f"criterion_{k}" for k in range(1, 10)])
def test_criterion(check):
    assert check(), RESULTS[CRITERIA.index(check) + 1]


def main() -> int:
    failed = 0
    for check in CRITERIA:
        failed += not check()
        print(RESULTS[CRITERIA.index(check) + 1], flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    os.environ.setdefault("PYTHONHASHSEED", "0")
    sys.exit(main())
