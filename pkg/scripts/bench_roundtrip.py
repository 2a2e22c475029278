"""Time factor-and-check on random lifting products and report accuracy by size.

    python scripts/bench_roundtrip.py --sizes 2 3 4 --count 50 --max-steps 6
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field

import numpy as np

from polylift.errors import FactorizationError
from polylift.liftfactor import factor, random_sl_matrix


@dataclass
class BenchConfig:
    sizes: list[int] = field(default_factory=lambda: [2, 3, 4])
    count: int = 50
    max_steps: int = 6
    max_degree: int = 4
    seed: int = 0
    tol: float = 1e-9


def bench(cfg: BenchConfig) -> None:
    rng = np.random.default_rng(cfg.seed)
    print(f"{'N':>3} {'cases':>6} {'ok':>5} {'failed':>7} {'max err':>10} {'ms/case':>8}")
    for n in cfg.sizes:
        mats = [random_sl_matrix(n, int(rng.integers(1, cfg.max_steps + 1)), cfg.max_degree,
                                 rng)[0] for _ in range(cfg.count)]
        errs, failed = [], 0
        start = time.perf_counter()
        for a in mats:
            try:
                errs.append(factor(a).product().max_diff(a))
            except FactorizationError:
                failed += 1
        ms = 1e3 * (time.perf_counter() - start) / cfg.count
        ok = sum(e <= cfg.tol for e in errs)
        worst = max(errs) if errs else float("nan")
        print(f"{n:>3} {cfg.count:>6} {ok:>5} {failed:>7} {worst:>10.2e} {ms:>8.1f}")


def parse_args() -> BenchConfig:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[2, 3, 4])
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--max-steps", type=int, default=6)
    p.add_argument("--max-degree", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    return BenchConfig(**{k.replace("-", "_"): v for k, v in vars(p.parse_args()).items()})


if __name__ == "__main__":
    bench(parse_args())
