"""JSON problem/solution files and CSV spectrum tables.

Problem file::

    {"cells": [{"weight": 0.5, "dim": 1}, {"weight": 0.5, "dim": 2}],
     "norms": [1.0, 1.0],
     "potential": {"kind": "power", "params": {"q": 2}},
     "tolerance": 1e-8, "seed": 0}

Solution files store every complex entry as ``[re, im]`` and every real as a
JSON double; output is byte-stable for identical inputs.
"""
import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .frame_design import FiberFrame, FsiSpec
from .potentials import phi_from_dict, power

SOLUTION_FORMAT = "framekit.solution/1"
TABLE_FORMAT = "framekit.eigensteps/1"
DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class Problem:
    spec: FsiSpec
    norms: np.ndarray  # in file order
    phi: object
    tolerance: float
    seed: object
    table: object = None  # per-cell eigenstep columns, when given


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def dumps(obj):
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _real(x, what):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ValidationError(f"{what} must be a finite number, got {x!r}")
    return float(x)


def _int(x, what):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or x != int(x):
        raise ValidationError(f"{what} must be an integer, got {x!r}")
    return int(x)


def parse_cells(raw):
    cells = raw.get("cells")
    if not isinstance(cells, list) or not cells:
        raise ValidationError("'cells' must be a non-empty list of {weight, dim} objects")
    weights, dims, labels = [], [], []
    for k, cell in enumerate(cells):
        if not isinstance(cell, dict):
            raise ValidationError(f"cell {k} must be an object")
        w = _real(cell.get("weight"), f"cells[{k}].weight")
        if w <= 0:
            raise ValidationError(f"cells[{k}].weight must be positive")
        d = _int(cell.get("dim"), f"cells[{k}].dim")
        if d < 1:
            raise ValidationError(f"cells[{k}].dim must be >= 1")
        weights.append(w)
        dims.append(d)
        label = cell.get("label", k)
        if isinstance(label, bool) or not isinstance(label, (str, int)):
            raise ValidationError(f"cells[{k}].label must be a string or an integer")
        labels.append(label)
    return FsiSpec.from_cells(weights, dims, labels)


def parse_problem(raw):
    if not isinstance(raw, dict):
        raise ValidationError("problem file must hold a JSON object")
    spec = parse_cells(raw)
    table = raw.get("eigensteps")
    norms = raw.get("norms")
    if norms is None and table is None:
        raise ValidationError("'norms' is required")
    if norms is not None:
        if not isinstance(norms, list) or not norms:
            raise ValidationError("'norms' must be a non-empty list")
        norms = np.array([_real(a, f"norms[{j}]") for j, a in enumerate(norms)])
        if np.any(norms <= 0):
            raise ValidationError("norms must be positive")
    phi = phi_from_dict(raw["potential"]) if "potential" in raw else power(2.0)
    tol = _real(raw.get("tolerance", DEFAULT_TOL), "tolerance")
    if tol <= 0:
        raise ValidationError("tolerance must be positive")
    seed = raw.get("seed")
    if seed is not None:
        seed = _int(seed, "seed")
    if table is not None:
        table = parse_table(table, len(spec))
    return Problem(spec, norms, phi, tol, seed, table)


def parse_table(table, cells):
    if not isinstance(table, list) or len(table) != cells:
        raise ValidationError("'eigensteps' needs one list of columns per cell")
    out = []
    for c, cols in enumerate(table):
        if not isinstance(cols, list):
            raise ValidationError(f"eigensteps[{c}] must be a list of columns")
        out.append([[_real(v, f"eigensteps[{c}][{j}]") for v in col] for j, col in enumerate(cols)])
    return out


def _pairs(vec):
    return [[float(z.real), float(z.imag)] for z in vec]


def frame_to_cells(frame, spectra, levels=None):
    """Per-cell records: weight, dim, spectrum, fiber norms and vectors."""
    spec = frame.spec
    cells = []
    for c, t in enumerate(frame.fibers):
        rec = {
            "label": spec.labels[c],
            "weight": float(spec.weights[c]),
            "dim": spec.dims[c],
            "spectrum": [float(x) for x in spectra[c]],
            "norms": [float(x) for x in np.sum(np.abs(t) ** 2, axis=0)],
            "vectors": [_pairs(t[:, j]) for j in range(t.shape[1])],
        }
        if levels is not None:
            rec["level"] = float(levels[c])
        cells.append(rec)
    return cells


def _vectors_to_fiber(vectors, d, where):
    if not isinstance(vectors, list) or not vectors:
        raise ValidationError(f"{where}: 'vectors' must be a non-empty list")
    t = np.zeros((d, len(vectors)), dtype=complex)
    for j, vec in enumerate(vectors):
        if not isinstance(vec, list) or len(vec) != d:
            raise ValidationError(f"{where}: vector {j + 1} must have {d} entries")
        for i, z in enumerate(vec):
            if not isinstance(z, list) or len(z) != 2:
                raise ValidationError(f"{where}: entry {i + 1} of vector {j + 1} must be [re, im]")
            t[i, j] = complex(_real(z[0], where), _real(z[1], where))
    return t


def parse_solution(raw):
    """Spec, frame and the raw per-cell/global records of a solution file."""
    if not isinstance(raw, dict) or not isinstance(raw.get("cells"), list):
        raise ValidationError("solution file must hold an object with 'cells'")
    spec = parse_cells(raw)
    fibers = []
    for c, cell in enumerate(raw["cells"]):
        fibers.append(_vectors_to_fiber(cell.get("vectors"), spec.dims[c], f"cell {spec.labels[c]!r}"))
    return spec, FiberFrame(spec, tuple(fibers))


def spectrum_rows(frame, phi, spectra=None):
    """Rows ``(cell, weight, j, lambda_j, phi(lambda_j))`` of a spectrum table."""
    from .frame_design import cell_spectrum

    rows = []
    for c, t in enumerate(frame.fibers):
        lam = cell_spectrum(t) if spectra is None else np.asarray(spectra[c], dtype=float)
        vals = phi(lam)
        for j, (x, y) in enumerate(zip(lam, vals), start=1):
            rows.append((frame.spec.labels[c], float(frame.spec.weights[c]), j, float(x), float(y)))
    return rows


def write_csv(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cell", "weight", "j", "lambda_j", "phi(lambda_j)"])
        for label, weight, j, lam, val in rows:
            w.writerow([label, repr(weight), j, repr(lam), repr(val)])
