"""Command-line front end.

Subcommands::

    framekit design PROBLEM.json [--out SOL.json] [--csv SPEC.csv]
    framekit verify SOL.json PROBLEM.json
    framekit eigensteps TABLE.json|SOL.json [--out FILE]
    framekit schur-horn --b 3,1 --c 2,2
    framekit potential SOL.json [--phi power:2] [--csv FILE]

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 solver did not converge.  ``FRAMEKIT_THREADS`` caps the per-cell worker pool.
"""
import argparse
import os
import sys

import numpy as np

from . import fileio
from .eigensteps import EigenstepTable, eigensteps_of, realize_from_eigensteps, validate_eigensteps
from .errors import ConvergenceError, ValidationError
from .frame_design import FiberFrame, cell_spectrum, frame_bounds, map_cells, potential
from .optimizer import TIGHT_TOL, WeightMatrix, assemble_optimal, duality_gap, reduced_spectra
from .potentials import parse_phi
from .schur_horn import schur_horn_unitary, synthesis_vectors

EXIT_OK, EXIT_VERIFY, EXIT_INVALID, EXIT_NOCONV = 0, 1, 2, 3


def _threads():
    raw = os.environ.get("FRAMEKIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValidationError(f"FRAMEKIT_THREADS must be an integer, got {raw!r}")


def _emit(args, payload, summary):
    """Solution JSON goes to ``--out`` (summary on stdout) or to stdout (summary on stderr)."""
    text = fileio.dumps(payload)
    if args.out:
        fileio.write_text(args.out, text)
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)


def _is_tight(spectra):
    values = np.concatenate([np.asarray(s, dtype=float) for s in spectra])
    return bool(values.max() - values.min() <= TIGHT_TOL * max(1.0, values.max()))


def _global_block(frame, phi, spectra, extra):
    fb = frame_bounds(frame)
    block = {
        "potential": potential(frame, phi),
        "norms": [float(x) for x in frame.global_norms()],
        "frame_bounds": [fb.lower, fb.upper],
        "is_frame": fb.is_frame,
        "tight": _is_tight(spectra),
    }
    block.update(extra)
    return block


def _spectrum_table(spec, spectra):
    lines = ["cell        weight  dim  spectrum"]
    for label, w, d, lam in zip(spec.labels, spec.weights, spec.dims, spectra):
        lines.append(f"{str(label):<10} {w:7.4f} {d:4d}  " + " ".join(f"{x:.10g}" for x in lam))
    return "\n".join(lines)


def cmd_design(args):
    prob = fileio.parse_problem(fileio.read_json(args.problem))
    if prob.norms is None:
        raise ValidationError("'norms' is required for design")
    phi = parse_phi(args.phi) if args.phi else prob.phi
    tol = args.tol if args.tol is not None else prob.tolerance
    seed = args.seed if args.seed is not None else prob.seed
    # solve with non-increasing norms, then put the vectors back in file order
    order = np.argsort(-prob.norms, kind="stable")
    inverse = np.argsort(order, kind="stable")
    design = assemble_optimal(prob.norms[order], prob.spec, phi, tol=tol, seed=seed, max_workers=_threads())
    frame = FiberFrame(prob.spec, tuple(t[:, inverse] for t in design.frame.fibers))
    sol = design.solution
    spectra = [sol.psi[r] for r in design.row_of_cell]
    payload = {
        "format": fileio.SOLUTION_FORMAT,
        "potential": phi.to_dict(),
        "tolerance": tol,
        "seed": seed,
        "n": int(prob.norms.size),
        "cells": fileio.frame_to_cells(frame, spectra, design.levels),
        "global": _global_block(frame, phi, spectra, {
            "levels": [float(c) for c in design.levels],
            "gap": sol.gap,
            "iterations": sol.iterations,
        }),
    }
    if args.csv:
        fileio.write_csv(args.csv, fileio.spectrum_rows(frame, phi, spectra))
    summary = f"potential {payload['global']['potential']!r}  tight {payload['global']['tight']}\n"
    _emit(args, payload, summary + _spectrum_table(prob.spec, spectra))
    return EXIT_OK


def _check(rows, name, value, where, tol):
    rows.append((name, float(value), where, value <= tol))


def _max_located(values, labels):
    # largest entry over per-cell arrays, with its position
    best, where = 0.0, "-"
    for label, arr in zip(labels, values):
        for k, v in enumerate(np.atleast_1d(arr)):
            if v > best or where == "-":
                best, where = float(v), f"cell {label!r}, j={k + 1}"
    return best, where


def verify_solution(raw_sol, prob, tol, max_workers=1):
    """Residual rows ``(name, value, location, ok)`` of a solution against a problem."""
    spec, frame = fileio.parse_solution(raw_sol)
    rows = []
    if len(spec) != len(prob.spec) or spec.dims != prob.spec.dims or \
            np.max(np.abs(spec.weights - prob.spec.weights)) > tol:
        rows.append(("cells", float("inf"), "cell weights/dims differ from the problem", False))
        return rows
    cells = raw_sol["cells"]
    labels = spec.labels
    phi = fileio.phi_from_dict(raw_sol["potential"]) if "potential" in raw_sol else prob.phi
    spectra = map_cells(cell_spectrum, ((t,) for t in frame.fibers), max_workers)

    norm_res = []
    spec_res = []
    for c, (t, lam) in enumerate(zip(frame.fibers, spectra)):
        stored = np.array(cells[c].get("norms", []), dtype=float)
        got = np.sum(np.abs(t) ** 2, axis=0)
        norm_res.append(np.abs(got - stored) if stored.size == got.size else np.array([np.inf]))
        target = np.array(cells[c].get("spectrum", []), dtype=float)
        spec_res.append(np.abs(lam - target) if target.size == lam.size else np.array([np.inf]))
    _check(rows, "fiber_norms", *_max_located(norm_res, labels), tol)
    _check(rows, "spectrum", *_max_located(spec_res, labels), tol)

    if prob.norms is not None:
        g = frame.global_norms()
        if g.size != prob.norms.size:
            rows.append(("global_norms", float("inf"), f"{g.size} vectors, problem has {prob.norms.size}", False))
        else:
            diff = np.abs(g - prob.norms)
            k = int(np.argmax(diff))
            _check(rows, "global_norms", diff[k], f"j={k + 1}", tol)
    if prob.table is not None:
        table = eigensteps_of(frame)
        res = []
        for cols, ref in zip(table.steps, prob.table):
            worst = 0.0
            for col, rc in zip(cols, ref):
                rc = np.asarray(rc, dtype=float)
                worst = max(worst, float(np.max(np.abs(col - rc))) if rc.size == col.size else np.inf)
            res.append(worst)
        _check(rows, "eigensteps", *_max_located([np.array([r]) for r in res], labels), tol)

    stored_pot = raw_sol.get("global", {}).get("potential")
    if stored_pot is not None:
        _check(rows, "potential", abs(potential(frame, phi) - float(stored_pot)), "global", tol)

    if phi.differentiable and prob.table is None:
        found = _optimality_residuals(frame, spectra, phi)
        if found is not None:
            gap, dev, where = found
            _check(rows, "optimality_gap", gap, "reduced model", tol)
            _check(rows, "optimal_spectrum", dev, where, tol)
    return rows


def _optimality_residuals(frame, spectra, phi):
    # merged per-dimension norms must solve the reduced model, and each
    # cell's spectrum must be the waterfill of its row
    spec = frame.spec
    dims = tuple(sorted(set(spec.dims)))
    p = np.zeros(len(dims))
    mass = np.zeros((len(dims), frame.n))
    for w, d, a in zip(spec.weights, spec.dims, frame.fiber_norms()):
        p[dims.index(d)] += w
        mass[dims.index(d)] += w * a
    try:
        wm = WeightMatrix(mass / p[:, None], p, mass.sum(axis=0))
    except ValidationError:
        return None
    psi = reduced_spectra(wm, dims)
    dev = [np.abs(lam - psi[dims.index(d)]) for lam, d in zip(spectra, spec.dims)]
    return (duality_gap(wm, dims, phi),) + _max_located(dev, spec.labels)


def cmd_verify(args):
    raw_sol = fileio.read_json(args.solution)
    prob = fileio.parse_problem(fileio.read_json(args.problem))
    tol = args.tol if args.tol is not None else float(raw_sol.get("tolerance", prob.tolerance))
    rows = verify_solution(raw_sol, prob, tol, _threads())
    ok = all(r[3] for r in rows)
    for name, value, where, good in rows:
        print(f"{'PASS' if good else 'FAIL'}  {name:<15} {value:.3e}  ({where})")
    print(f"{'verified' if ok else 'verification failed'} at tolerance {tol:g}")
    return EXIT_OK if ok else EXIT_VERIFY


def _table_alpha(table):
    # fiber norms are the trace increments of consecutive columns
    out = []
    for cols in table.steps:
        sums = np.array([col.sum() for col in cols])
        out.append(np.diff(np.concatenate([[0.0], sums])))
    return out


def cmd_eigensteps(args):
    raw = fileio.read_json(args.input)
    if isinstance(raw, dict) and "eigensteps" in raw:
        prob = fileio.parse_problem(raw)
        phi = parse_phi(args.phi) if args.phi else prob.phi
        spec = prob.spec
        table = EigenstepTable(tuple(tuple(cols) for cols in prob.table))
        alpha = _table_alpha(table)
        report = validate_eigensteps(table, table.terminal(spec), alpha, spec)
        if not report:
            print(f"invalid eigenstep table: {report.condition} condition fails: {report.message}", file=sys.stderr)
            return EXIT_INVALID
        frame = realize_from_eigensteps(table, alpha, spec, _threads())
        spectra = table.terminal(spec)
        payload = {
            "format": fileio.SOLUTION_FORMAT,
            "potential": phi.to_dict(),
            "tolerance": args.tol if args.tol is not None else prob.tolerance,
            "seed": None,
            "n": table.n,
            "cells": fileio.frame_to_cells(frame, spectra),
            "global": _global_block(frame, phi, spectra, {}),
        }
        _emit(args, payload, f"realized {table.n} vectors on {len(spec)} cells\n"
                             + _spectrum_table(spec, spectra))
        return EXIT_OK
    spec, frame = fileio.parse_solution(raw)
    table = eigensteps_of(frame)
    payload = {
        "format": fileio.TABLE_FORMAT,
        "cells": [{"label": lab, "weight": float(w), "dim": d} for lab, w, d in zip(spec.labels, spec.weights, spec.dims)],
        "potential": raw.get("potential", {"kind": "power", "params": {"q": 2.0}}),
        "tolerance": raw.get("tolerance", fileio.DEFAULT_TOL),
        "eigensteps": table.to_lists(),
    }
    _emit(args, payload, f"extracted {table.n} steps on {len(spec)} cells")
    return EXIT_OK


def _parse_list(text, name):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"--{name} must be a comma-separated list of numbers")
    if not vals:
        raise ValidationError(f"--{name} must not be empty")
    return np.array(vals)


def cmd_schur_horn(args):
    b = _parse_list(args.b, "b")
    c = _parse_list(args.c, "c")
    payload = {"b": b.tolist(), "c": c.tolist()}
    residuals = {}
    if b.size == c.size:
        u = schur_horn_unitary(b, c)
        m = u.conj().T @ np.diag(b) @ u
        residuals["diagonal"] = float(np.max(np.abs(np.diag(m).real - c)))
        residuals["unitarity"] = float(np.max(np.abs(u.conj().T @ u - np.eye(b.size))))
        payload["unitary"] = [fileio._pairs(row) for row in u]
    syn = synthesis_vectors(b, c)
    vecs = syn.vectors
    recon = (vecs * c) @ vecs.conj().T
    residuals["synthesis"] = float(np.max(np.abs(recon - np.diag(b))))
    payload["vectors"] = [fileio._pairs(vecs[:, j]) for j in range(vecs.shape[1])]
    payload["zero_weight"] = [bool(x) for x in syn.zero_weight]
    payload["residuals"] = residuals
    lines = []
    if "unitary" in payload:
        lines.append("U =")
        for row in u:
            lines.append("  " + "  ".join(f"{z.real:+.6f}{z.imag:+.6f}i" for z in row))
    lines.append("residuals: " + ", ".join(f"{k} {v:.2e}" for k, v in residuals.items()))
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_potential(args):
    raw = fileio.read_json(args.solution)
    spec, frame = fileio.parse_solution(raw)
    if args.phi:
        phi = parse_phi(args.phi)
    elif "potential" in raw:
        phi = fileio.phi_from_dict(raw["potential"])
    else:
        phi = parse_phi("power:2")
    value = potential(frame, phi)
    if args.csv:
        fileio.write_csv(args.csv, fileio.spectrum_rows(frame, phi))
    print(f"{phi.spec()} potential {value!r}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="framekit", description="Optimal frame designs in shift-invariant spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--tol", type=float, default=None, help="tolerance (default: from the input file)")
        p.add_argument("--phi", default=None, help="potential: power:<q>, exp or pl:<t1>,<t2>,...")
        if out:
            p.add_argument("--out", default=None, help="write JSON here instead of stdout")

    p = sub.add_parser("design", help="compute an optimal design")
    p.add_argument("problem")
    p.add_argument("--seed", type=int, default=None, help="random Frank-Wolfe start (default: flat start)")
    p.add_argument("--csv", default=None, help="write the spectrum table as CSV")
    common(p)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("verify", help="re-check a solution against a problem")
    p.add_argument("solution")
    p.add_argument("problem")
    common(p, out=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eigensteps", help="realize an eigenstep table, or extract one from a solution")
    p.add_argument("input")
    common(p)
    p.set_defaults(func=cmd_eigensteps)

    p = sub.add_parser("schur-horn", help="unitary and unit vectors with prescribed diagonal")
    p.add_argument("--b", required=True, help="eigenvalues, comma separated")
    p.add_argument("--c", required=True, help="target diagonal / weights, comma separated")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_schur_horn)

    p = sub.add_parser("potential", help="evaluate a potential on a solution")
    p.add_argument("solution")
    p.add_argument("--phi", default=None)
    p.add_argument("--csv", default=None, help="per-cell spectrum table")
    p.set_defaults(func=cmd_potential)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "tol", None) is not None and not args.tol > 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
