"""JSON and binary formats for polynomials, matrices, chains, grids and signals.

Complex numbers are stored as ``[re, im]`` pairs.  Every ``*_from_json``
raises :class:`MalformedInput` on structurally invalid data.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .filterbank import BandSet, Signal
from .gridfun import GridMatrix
from .laurent import LaurentPoly
from .liftfactor import LiftingChain
from .polymat import LiftingStep, PolyMatrix, StepKind


class MalformedInput(ValueError):
    """A file does not match the expected format."""


def to_pairs(values) -> list[list[float]]:
    arr = np.asarray(values, dtype=complex).reshape(-1)
    return [[float(v.real), float(v.imag)] for v in arr]


def from_pairs(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.size == 0:
        return np.zeros(0, dtype=complex)
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise MalformedInput("complex values must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _complex(pair) -> complex:
    if isinstance(pair, (int, float)):
        return complex(pair)
    re, im = pair
    return complex(float(re), float(im))


def poly_to_json(p: LaurentPoly) -> dict:
    return {"min_exp": int(p.min_exp), "coeffs": to_pairs(p.coeffs)}


def poly_from_json(d) -> LaurentPoly:
    return LaurentPoly(from_pairs(d["coeffs"]), int(d["min_exp"]), tol=0.0)


def matrix_to_json(a: PolyMatrix) -> dict:
    return {"n": a.n, "entries": [[poly_to_json(p) for p in row] for row in a.entries]}


def matrix_from_json(d) -> PolyMatrix:
    a = PolyMatrix.from_rows([[poly_from_json(p) for p in row] for row in d["entries"]])
    if a.n != int(d.get("n", a.n)):
        raise MalformedInput(f"declared n={d['n']} but got {a.n} rows")
    return a


def step_to_json(s: LiftingStep) -> dict:
    if s.is_triangular:
        params = [poly_to_json(p) for p in s.params]
    elif s.kind is StepKind.SCALE:
        params = to_pairs([s.params])[0]
    else:
        params = s.params
    return {"kind": s.kind.value, "params": params, "offset": s.offset}


def step_from_json(d) -> LiftingStep:
    kind = StepKind(d["kind"])
    if kind in (StepKind.LOWER, StepKind.UPPER):
        params = tuple(poly_from_json(p) for p in d["params"])
    elif kind is StepKind.SCALE:
        params = _complex(d["params"])
    else:
        params = int(d["params"])
    return LiftingStep(kind, params, int(d.get("offset", 1)))


def chain_to_json(chain: LiftingChain, report: dict | None = None) -> dict:
    out = {
        "type": "polynomial",
        "n": chain.n,
        "steps": [step_to_json(s) for s in chain.steps],
        "residual": matrix_to_json(chain.residual),
        "shift": chain.shift,
        "scale": to_pairs([chain.scale])[0],
    }
    if report is not None:
        out["report"] = report
    return out


def chain_from_json(d) -> LiftingChain:
    return LiftingChain(int(d["n"]), tuple(step_from_json(s) for s in d["steps"]),
                        matrix_from_json(d["residual"]), int(d.get("shift", 0)),
                        _complex(d.get("scale", [1.0, 0.0])))


def grid_to_json(g: GridMatrix) -> dict:
    return {"n": g.n, "m": g.m,
            "entries": [[to_pairs(g.values[i, j]) for j in range(g.n)] for i in range(g.n)]}


def grid_from_json(d) -> GridMatrix:
    g = GridMatrix(from_pairs(d["entries"]))
    if g.n != int(d["n"]) or g.m != int(d["m"]):
        raise MalformedInput("grid shape does not match the declared n and m")
    return g


def signal_to_json(x: Signal) -> dict:
    return {"samples": to_pairs(x.samples)}


def signal_from_json(d) -> Signal:
    return Signal(from_pairs(d["samples"]))


def bands_to_json(b: BandSet, boundary: str = "periodic") -> dict:
    return {"n": b.n, "length": b.length, "boundary": boundary,
            "bands": [to_pairs(band) for band in b.bands]}


def bands_from_json(d) -> tuple[BandSet, str]:
    bands = tuple(from_pairs(band) for band in d["bands"])
    if len(bands) != int(d["n"]):
        raise MalformedInput(f"declared n={d['n']} but got {len(bands)} bands")
    return BandSet(bands, int(d["length"])), d.get("boundary", "periodic")


def write_signal_binary(path, x: Signal) -> None:
    """Interleaved little-endian float64 (re, im) pairs."""
    pairs = np.column_stack([x.samples.real, x.samples.imag]).astype("<f8")
    pairs.tofile(path)


def read_signal_binary(path) -> Signal:
    raw = np.fromfile(path, dtype="<f8")
    if raw.size % 2:
        raise MalformedInput("binary signal has an odd number of float64 values")
    return Signal(raw[0::2] + 1j * raw[1::2])


def load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise MalformedInput(f"{path}: {e}") from e


def save_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=1))


def parse(loader, data, what: str):
    """Run a ``*_from_json`` function, turning format errors into MalformedInput."""
    try:
        return loader(data)
    except MalformedInput:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise MalformedInput(f"not a valid {what}: {e!r}") from e
