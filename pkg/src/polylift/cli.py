"""Command-line front end.

Subcommands: gen, factor, factor-grid, verify, verify-cuntz, apply,
reconstruct.  Exit status is 0 on success, 1 for unreadable or malformed
input, 2 when a factorization fails and 3 when a verification misses its
threshold.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import io
from .cuntz import CuntzRep, verify_relations
from .errors import FactorizationError
from .filterbank import BOUNDARIES, Signal, analyze, synthesize
from .gridfun import (GridFunction, GridMatrix, chain_product, iterate_factorization,
                      optimal_lower_nxn, optimal_upper_nxn)
from .liftfactor import factor, random_sl_matrix, verify_chain
from .polymat import det_deviation

EXIT_OK, EXIT_INPUT, EXIT_FACTOR, EXIT_VERIFY = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    output: str | None = None
    tol: float = 1e-10
    max_steps: int = 8
    grid_m: int = 256
    seed: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.grid_m < 1:
            raise ValueError("grid_m must be at least 1")


def _report(data: dict) -> None:
    print(json.dumps(data, indent=1, default=str))


def _cmd_gen(cfg: RunConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    kind = cfg.extra["kind"]
    if kind == "signal":
        length = cfg.extra["length"]
        x = Signal(rng.standard_normal(length) + 1j * rng.standard_normal(length))
        io.save_json(cfg.output, io.signal_to_json(x))
        _report({"kind": "signal", "length": length})
        return EXIT_OK
    a, steps = random_sl_matrix(cfg.extra["n"], cfg.extra["steps"], cfg.extra["max_degree"], rng)
    if kind == "grid":
        io.save_json(cfg.output, io.grid_to_json(GridMatrix.from_poly(a, cfg.grid_m)))
    else:
        io.save_json(cfg.output, io.matrix_to_json(a))
    _report({"kind": kind, "n": a.n, "steps": [s.kind.value for s in steps],
             "max_degree": int(a.max_degree())})
    return EXIT_OK


def _cmd_factor(cfg: RunConfig) -> int:
    a = io.parse(io.matrix_from_json, io.load_json(cfg.input), "polynomial matrix")
    chain = factor(a, cfg.tol, cfg.extra["verify_tol"])
    rep = verify_chain(chain, a, cfg.extra["verify_tol"])
    report = {"max_coeff_err": rep.max_coeff_err, "degree_profile": rep.degree_profile,
              "kinds": chain.kinds, "descent_ok": rep.descent_ok(chain.kinds),
              "passed": rep.ok}
    io.save_json(cfg.output, io.chain_to_json(chain, report))
    _report(report)
    return EXIT_OK if rep.ok else EXIT_VERIFY


def _load_grid(path: str, m: int) -> GridMatrix:
    data = io.load_json(path)
    if "m" in data:
        return io.parse(io.grid_from_json, data, "grid matrix")
    return GridMatrix.from_poly(io.parse(io.matrix_from_json, data, "polynomial matrix"), m)


def _orthogonality(g: GridMatrix, kind: str) -> float:
    """Largest pointwise inner product between the pivot row and the others."""
    v = g.values
    pivot, others = (v[0], v[1:]) if kind == "lower" else (v[-1], v[:-1])
    return float(np.abs(np.einsum("jk,ijk->ik", np.conj(pivot), others)).max())


def _cmd_factor_grid(cfg: RunConfig) -> int:
    g = _load_grid(cfg.input, cfg.grid_m)
    first_l, _ = optimal_lower_nxn(g)
    first_u, _ = optimal_upper_nxn(g)
    chain, residual, rep = iterate_factorization(g, cfg.max_steps, cfg.tol)
    err = (chain_product(chain, g.n, g.m) @ residual).max_diff(g)
    last = chain[-1][0] if chain else "lower"
    report = {
        "steps": rep.step_kinds,
        "step_magnitudes": [max(p.sup() for p in params) for _, params in chain],
        "first_lower_magnitude": max(p.sup() for p in first_l),
        "first_upper_magnitude": max(p.sup() for p in first_u),
        "objective": rep.objective,
        "off_diagonal": rep.off_diagonal,
        "converged": rep.converged,
        "product_err": err,
        "orthogonality": _orthogonality(residual, last) if chain else None,
    }
    out = {"type": "grid", "n": g.n, "m": g.m,
           "steps": [{"kind": k, "params": [io.to_pairs(p.samples) for p in params]}
                     for k, params in chain],
           "residual": io.grid_to_json(residual), "report": report}
    io.save_json(cfg.output, out)
    _report(report)
    return EXIT_OK


def _cmd_verify(cfg: RunConfig) -> int:
    data = io.load_json(cfg.extra["chain"])
    tol = cfg.extra["verify_tol"]
    if data.get("type") == "grid":
        return _verify_grid(cfg, data, tol)
    chain = io.parse(io.chain_from_json, data, "lifting chain")
    a = io.parse(io.matrix_from_json, io.load_json(cfg.input), "polynomial matrix")
    rep = verify_chain(chain, a, tol)
    report = {"max_coeff_err": rep.max_coeff_err, "degree_profile": rep.degree_profile,
              "descent_ok": rep.descent_ok(chain.kinds),
              "det_deviation": det_deviation(a), "passed": rep.ok}
    _report(report)
    return EXIT_OK if rep.ok else EXIT_VERIFY


def _verify_grid(cfg: RunConfig, data: dict, tol: float) -> int:
    g = _load_grid(cfg.input, int(data["m"]))
    chain = [(s["kind"], [GridFunction(io.from_pairs(p)) for p in s["params"]])
             for s in data["steps"]]
    residual = io.parse(io.grid_from_json, data["residual"], "grid matrix")
    err = (chain_product(chain, g.n, g.m) @ residual).max_diff(g)
    orth = _orthogonality(residual, chain[-1][0]) if chain else 0.0
    report = {"product_err": err, "orthogonality": orth, "passed": err <= tol and orth <= tol}
    _report(report)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def _cmd_verify_cuntz(cfg: RunConfig) -> int:
    mode = cfg.extra["mode"]
    rep = CuntzRep.haar() if mode == "haar" else CuntzRep.monomial(cfg.extra["n"])
    r = verify_relations(rep, cfg.extra["trials"], cfg.extra["length"], cfg.seed)
    limit = 0.0 if mode == "monomial" else 1e-12
    report = {"mode": mode, "n": rep.n, "max_iso_err": r.max_iso_err,
              "max_complete_err": r.max_complete_err, "passed": r.ok(limit)}
    _report(report)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def _read_signal(path: str) -> Signal:
    if path.endswith(".bin"):
        return io.read_signal_binary(path)
    return io.parse(io.signal_from_json, io.load_json(path), "signal")


def _cmd_apply(cfg: RunConfig) -> int:
    chain = io.parse(io.chain_from_json, io.load_json(cfg.extra["chain"]), "lifting chain")
    x = _read_signal(cfg.input)
    boundary = cfg.extra["boundary"]
    bands = analyze(chain, x, boundary)
    io.save_json(cfg.output, io.bands_to_json(bands, boundary))
    _report({"bands": bands.n, "band_length": len(bands.bands[0]), "length": bands.length})
    return EXIT_OK


def _cmd_reconstruct(cfg: RunConfig) -> int:
    chain = io.parse(io.chain_from_json, io.load_json(cfg.extra["chain"]), "lifting chain")
    bands, boundary = io.parse(io.bands_from_json, io.load_json(cfg.input), "band set")
    y = synthesize(chain, bands, boundary)
    if cfg.output.endswith(".bin"):
        io.write_signal_binary(cfg.output, y)
    else:
        io.save_json(cfg.output, io.signal_to_json(y))
    report = {"length": y.length}
    ref = cfg.extra.get("reference")
    if ref:
        err = float(np.abs(y.samples - _read_signal(ref).samples).max())
        report.update(max_abs_err=err, passed=err <= cfg.extra["verify_tol"])
    _report(report)
    return EXIT_OK if report.get("passed", True) else EXIT_VERIFY


COMMANDS = {
    "gen": _cmd_gen, "factor": _cmd_factor, "factor-grid": _cmd_factor_grid,
    "verify": _cmd_verify, "verify-cuntz": _cmd_verify_cuntz, "apply": _cmd_apply,
    "reconstruct": _cmd_reconstruct,
}


def run(cfg: RunConfig) -> int:
    """Dispatch one command; errors become exit codes with a one-line diagnostic."""
    try:
        return COMMANDS[cfg.command](cfg)
    except FactorizationError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FACTOR
    except (io.MalformedInput, OSError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INPUT


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--grid-m", type=int, default=256)

    p = argparse.ArgumentParser(prog="polylift", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="random SL_N matrix, grid or signal")
    g.add_argument("--kind", choices=["matrix", "grid", "signal"], default="matrix")
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--steps", type=int, default=4)
    g.add_argument("--max-degree", type=int, default=4)
    g.add_argument("--length", type=int, default=64)
    g.add_argument("--output", "--out", dest="output", required=True)

    f = sub.add_parser("factor", parents=[common], help="lifting factorization of a matrix")
    f.add_argument("--input", required=True)
    f.add_argument("--output", "--out", dest="output", required=True)
    f.add_argument("--verify-tol", type=float, default=1e-9)

    fg = sub.add_parser("factor-grid", parents=[common], help="optimal steps on a sampled matrix")
    fg.add_argument("--input", required=True)
    fg.add_argument("--output", "--out", dest="output", required=True)
    fg.add_argument("--max-steps", type=int, default=8)

    v = sub.add_parser("verify", parents=[common], help="check a chain against its matrix")
    v.add_argument("--chain", required=True)
    v.add_argument("--input", required=True)
    v.add_argument("--verify-tol", type=float, default=1e-9)

    c = sub.add_parser("verify-cuntz", parents=[common], help="check the Cuntz relations")
    c.add_argument("--mode", choices=["monomial", "haar"], default="monomial")
    c.add_argument("--n", type=int, default=2)
    c.add_argument("--trials", type=int, default=50)
    c.add_argument("--length", type=int, default=128)

    a = sub.add_parser("apply", parents=[common], help="analysis of a signal into bands")
    a.add_argument("--chain", required=True)
    a.add_argument("--signal", "--input", dest="input", required=True)
    a.add_argument("--out", "--output", dest="output", required=True)
    a.add_argument("--boundary", choices=BOUNDARIES, default="periodic")

    r = sub.add_parser("reconstruct", parents=[common], help="synthesis of bands into a signal")
    r.add_argument("--chain", required=True)
    r.add_argument("--bands", "--input", dest="input", required=True)
    r.add_argument("--out", "--output", dest="output", required=True)
    r.add_argument("--reference", help="original signal to compare against")
    r.add_argument("--verify-tol", type=float, default=1e-10)
    return p


_CONFIG_FIELDS = {"command", "input", "output", "tol", "max_steps", "grid_m", "seed"}


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    known = {k: v for k, v in args.items() if k in _CONFIG_FIELDS}
    extra = {k: v for k, v in args.items() if k not in _CONFIG_FIELDS}
    try:
        cfg = RunConfig(**known, extra=extra)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
