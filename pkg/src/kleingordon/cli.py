"""``kg``: command-line front end producing CSV, JSON and SVG reports.

Exit codes: 0 success, 2 a validity condition is violated, 3 the
definiteness interval is empty (fallback output written), 4 malformed
input, 5 an acceptance check failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds, flow, models, pencil, radial
from .errors import (
    ConditionViolated,
    DefinitenessEmpty,
    FamilyUndefined,
    InclusionViolation,
    NonCommuting,
    NotComparable,
    OutOfValidity,
)

EXIT_OK = 0
EXIT_CONDITION = 2
EXIT_INDEFINITE = 3
EXIT_INPUT = 4
EXIT_ACCEPTANCE = 5


class InputError(Exception):
    """Malformed command input."""


# ---------------------------------------------------------------- helpers


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path: Path, data) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_clean(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "kg"
    plt.rcParams["svg.fonttype"] = "none"
    return plt


def save_svg(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a JSON object")
    return data


def _matrix(data: dict, key: str, path: str) -> np.ndarray:
    if key not in data:
        raise InputError(f"{path}: missing key {key!r}")
    try:
        m = np.array(data[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: {key!r} is not a numeric matrix") from exc
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"{path}: {key!r} is not square")
    if "dim" in data and m.shape[0] != data["dim"]:
        raise InputError(f"{path}: {key!r} does not match dim = {data['dim']}")
    return m


def load_pair(path: str) -> pencil.OperatorPair:
    data = _load_json(path)
    u2, v = _matrix(data, "u2", path), _matrix(data, "v", path)
    try:
        return pencil.OperatorPair(u2, v)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def load_homotopy(path: str) -> flow.Homotopy:
    data = _load_json(path)
    mats = [_matrix(data, k, path) for k in ("u2", "v0", "v1")]
    try:
        return flow.Homotopy(*mats)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _units(args) -> models.PhysicalUnits:
    alpha = models.ALPHA_FIGURE if args.figure_mode else args.alpha
    if not alpha > 0:
        raise InputError("--alpha must be positive")
    return models.PhysicalUnits(alpha=alpha)


def _config(args) -> dict:
    units = _units(args)
    return {"command": args.command, "seed": args.seed, "alpha": units.alpha, "figure_mode": bool(args.figure_mode)}


# --------------------------------------------------------------- commands


def cmd_spectrum(args, out: Path) -> int:
    pair = load_pair(args.input)
    if args.shift:
        pair = pair.with_potential(pair.v + args.shift * np.eye(pair.dim))
    try:
        spec = pencil.spectrum(pair)
    except (DefinitenessEmpty, pencil.CholeskyFailure) as exc:
        w = pencil.spectrum_general(pair)
        write_csv(out / "spectrum.csv", ["re", "im"], [(z.real, z.imag) for z in w])
        print(f"definiteness interval empty ({exc}); wrote general spectrum", file=sys.stderr)
        return EXIT_INDEFINITE
    write_csv(
        out / "spectrum.csv",
        ["value", "signature", "residual"],
        [(p.value, p.signature, p.residual) for p in spec.points],
    )
    return EXIT_OK


def cmd_flow(args, out: Path) -> int:
    h = load_homotopy(args.input)
    if not args.t1 > args.t0 or args.steps < 2:
        raise InputError("need t1 > t0 and steps >= 2")
    grid = np.linspace(args.t0, args.t1, args.steps)
    report = flow.trace(h, grid)
    verdicts = flow.monotonicity_verdict(report)
    rows = []
    for k, t in enumerate(report.grid):
        for j, c in enumerate(report.curves):
            rows.append((t, j, c.values[k].real, c.values[k].imag, c.signature[k], bool(c.matched[k])))
    write_csv(out / "flow.csv", ["t", "curve_id", "value", "imag", "signature", "matched"], rows)
    write_csv(out / "events.csv", ["t", "kind", "detail"], [(e.t, e.kind, e.detail) for e in report.events])
    write_json(
        out / "flow.json",
        {
            "config": _config(args),
            "theorem": verdicts.theorem,
            "curves": [vars(v) for v in verdicts.curves],
            "counterexample": verdicts.counterexample,
        },
    )

    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for j, c in enumerate(report.curves):
        y = np.where(c.is_real(), c.real, np.nan)
        ax.plot(report.grid, y, lw=1.2, label=f"curve {j}")
    ax.set_xlabel("t")
    ax.set_ylabel("eigenvalue")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    save_svg(fig, out / "flow.svg")
    plt.close(fig)
    return EXIT_OK


def _family(pair: pencil.OperatorPair, sign: str, rank: int):
    def lam(eps):
        spec = pencil.spectrum(pair.with_potential(eps * pair.v))
        vals = spec.plus_values() if sign == pencil.PLUS else spec.minus_values()
        return float(vals[rank])

    return lam


def _matrix_bounds(pair: pencil.OperatorPair, delta_v: np.ndarray) -> list[dict]:
    spec = pencil.spectrum(pair)
    try:
        gam = bounds.relative_gammas(pair.v, delta_v)
    except (NotComparable, NonCommuting):
        gam = None
    records = []
    for sign in (pencil.MINUS, pencil.PLUS):
        values = spec.plus_values() if sign == pencil.PLUS else spec.minus_values()
        for rank, lam in enumerate(values):
            recs = [bounds.absolute_bound(lam, delta_v, pair), bounds.refined_bound(lam, delta_v, pair)]
            if gam is not None:
                try:
                    recs.append(bounds.relative_bound(_family(pair, sign, rank), gam))
                except (FamilyUndefined, DefinitenessEmpty, pencil.CholeskyFailure):
                    pass
            try:
                recs.append(bounds.nv_bound(lam, pair.v, delta_v, pair.u2))
            except ConditionViolated:
                pass
            for r in recs:
                records.append({"signature": sign, "rank": rank + 1, "eigenvalue": lam, **r.to_dict()})
    return records


def cmd_bounds(args, out: Path) -> int:
    cfg = _config(args)
    if args.model == "coulomb":
        if args.Z is None or args.tau is None or args.l is None:
            raise InputError("--model coulomb needs --Z, --tau and --l")
        units = _units(args)
        model = models.CoulombModel(args.Z, units)
        if not model.Z > 0:
            raise InputError("--Z must be positive")
        try:
            p = models.CutoffPerturbation(args.l * units.electron_radius, args.tau)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        recs = bounds.coulomb_bounds(model, p)
        write_json(
            out / "bounds.json",
            {
                "config": cfg,
                "model": {"Z": model.Z, "tau": p.tau, "l_electron_radii": args.l, "l": p.l},
                "ground": models.coulomb_lambda(model),
                "crossover_electron_radii": models.crossover_radius(model, p.tau) / units.electron_radius,
                "records": [r.to_dict() for r in recs],
            },
        )
        if args.table:
            _bound_table(model, p.tau, out)
        return EXIT_OK
    if args.input is None or args.delta is None:
        raise InputError("matrix mode needs INPUT and DELTA json files")
    pair = load_pair(args.input)
    dv = _matrix(_load_json(args.delta), "delta_v", args.delta)
    if dv.shape != (pair.dim, pair.dim):
        raise InputError("delta_v does not match the pair dimension")
    try:
        records = _matrix_bounds(pair, pencil.as_symmetric(dv))
    except DefinitenessEmpty as exc:
        print(f"definiteness interval empty: {exc}", file=sys.stderr)
        return EXIT_INDEFINITE
    write_json(out / "bounds.json", {"config": cfg, "records": records})
    return EXIT_OK


def _bound_table(model: models.CoulombModel, tau: float, out: Path) -> None:
    re = model.units.electron_radius
    l_re = np.geomspace(1.0, 1e4, 81)
    rows = models.coulomb_bound_table(model, tau, l_re * re)
    write_csv(
        out / "bound_table.csv",
        ["l", "refined_lower", "refined_upper", "relative_lower", "relative_upper"],
        [(r.l / re, r.refined_lower, r.refined_upper, r.relative_lower, r.relative_upper) for r in rows],
    )
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(l_re, [r.refined_width for r in rows], label="refined width")
    ax.loglog(l_re, [r.relative_width for r in rows], label="relative width")
    ax.set_xlabel("l [classical electron radii]")
    ax.set_ylabel("enclosure width [m c^2]")
    ax.legend()
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    save_svg(fig, out / "bound_table.svg")
    plt.close(fig)


def cmd_penalty(args, out: Path) -> int:
    if args.steps < 1 or args.zmax < args.zmin or args.zmin <= 0:
        raise InputError("need 0 < zmin <= zmax and steps >= 1")
    units = _units(args)
    z = np.linspace(args.zmin, args.zmax, args.steps)
    points, skipped = models.penalty_curve(z, units)
    for zs in skipped:
        print(f"warning: Z = {zs:.6g} skipped, 2 Z alpha >= 1", file=sys.stderr)
    if not points:
        print("no point of the range satisfies 2 Z alpha < 1", file=sys.stderr)
        return EXIT_CONDITION
    write_csv(out / "penalty.csv", ["Z", "zeta"], points)
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([p[0] for p in points], [p[1] for p in points])
    ax.set_xlabel("Z")
    ax.set_ylabel("penalty")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    save_svg(fig, out / "penalty.svg")
    plt.close(fig)
    return EXIT_OK


def _verify_radial(args, out: Path) -> int:
    units = _units(args)
    model = models.CoulombModel(args.Z, units)
    if not model.Z > 0:
        raise InputError("--Z must be positive")
    try:
        grid = [int(x) for x in args.grid.split(",")]
    except ValueError as exc:
        raise InputError("--grid takes comma-separated integers") from exc
    if any(n < 16 for n in grid):
        raise InputError("grid sizes must be >= 16")
    r_max = None if args.rmax is None else args.rmax * model.coulomb_length
    if not model.coupling < 0.5:
        raise OutOfValidity(f"Z alpha = {model.coupling:.6g} is not below 1/2")
    conv = radial.verify_ground(model, grid, r_max)
    report = {"config": _config(args), "convergence": conv}
    failures = []
    if len(grid) > 1 and not conv["decreasing"]:
        failures.append("errors do not decrease with n")
    if conv["final_error"] > args.tol:
        failures.append(f"final relative error {conv['final_error']:.3g} > {args.tol:.3g}")
    if args.tau is not None:
        p = models.CutoffPerturbation(args.l * units.electron_radius, args.tau)
        inc = radial.verify_inclusion(model, p, grid[-1], r_max, raise_on_failure=False)
        report["inclusion"] = inc
        if not inc["ok"]:
            failures.append("perturbed ground state outside the enclosure")
    report["failures"] = failures
    write_json(out / "verify.json", report)
    for f in failures:
        print(f"acceptance failure: {f}", file=sys.stderr)
    return EXIT_ACCEPTANCE if failures else EXIT_OK


def _verify_oscillator(args, out: Path) -> int:
    if args.levels < 1:
        raise InputError("--levels must be positive")
    model = models.OscillatorModel(1, units=_units(args))
    grid = radial.oscillator_levels(model, args.levels, args.n)
    table = models.oscillator_spectrum(model, args.levels - 1)[: args.levels]
    exact = np.array([row[1] for row in table])
    rel = np.abs(grid - exact) / exact
    write_csv(
        out / "oscillator.csv",
        ["k", "lambda_plus", "lambda_minus", "grid_plus", "rel_error"],
        [(row[0][0], row[1], row[2], g, e) for row, g, e in zip(table, grid, rel)],
    )
    ok = bool(np.all(rel <= args.tol))
    write_json(
        out / "verify.json",
        {"config": _config(args), "oscillator": {"n": args.n, "levels": args.levels,
                                                  "max_rel_error": float(rel.max()), "ok": ok}},
    )
    if not ok:
        print(f"acceptance failure: oscillator error {rel.max():.3g} > {args.tol:.3g}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def cmd_verify(args, out: Path) -> int:
    if args.target == "radial":
        return _verify_radial(args, out)
    return _verify_oscillator(args, out)


# ----------------------------------------------------------------- parser


def _globals(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--out", default=d("."), help="output directory")
    parser.add_argument("--seed", type=int, default=d(0), help="seed recorded with every run")
    parser.add_argument("--alpha", type=float, default=d(models.ALPHA_CODATA), help="fine-structure constant")
    parser.add_argument("--figure-mode", action="store_true", default=d(False), help="pin alpha = 1/137")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kg", description="Klein-Gordon spectra, eigenvalue flows and bounds.")
    _globals(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _globals(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="classified spectrum of an operator pair")
    p.add_argument("input")
    p.add_argument("--shift", type=float, default=0.0, help="add shift * I to the potential")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("flow", parents=[common], help="eigenvalue curves along a homotopy")
    p.add_argument("input")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=201)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("bounds", parents=[common], help="perturbation enclosures")
    p.add_argument("input", nargs="?")
    p.add_argument("delta", nargs="?")
    p.add_argument("--model", choices=["coulomb"])
    p.add_argument("--Z", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--l", type=float, help="cutoff radius in classical electron radii")
    p.add_argument("--table", action="store_true", help="also write the width-versus-l table and chart")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("penalty", parents=[common], help="NV penalty as a function of Z")
    p.add_argument("--zmin", type=float, default=1.0)
    p.add_argument("--zmax", type=float, default=68.0)
    p.add_argument("--steps", type=int, default=68)
    p.set_defaults(func=cmd_penalty)

    p = sub.add_parser("verify", parents=[common], help="grid oracles")
    p.add_argument("target", choices=["radial", "oscillator"])
    p.add_argument("--Z", type=float, default=40.0)
    p.add_argument("--grid", default="2000,4000", help="comma-separated grid sizes")
    p.add_argument("--rmax", type=float, help="outer radius in Coulomb lengths (default 50)")
    p.add_argument("--tau", type=float, help="also check the cutoff-perturbation inclusion")
    p.add_argument("--l", type=float, default=10.0, help="cutoff radius in classical electron radii")
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--n", type=int, default=2000, help="oscillator grid size")
    p.add_argument("--tol", type=float, default=1e-3, help="relative error tolerance")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        return args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConditionViolated, OutOfValidity, FamilyUndefined) as exc:
        print(f"condition violated: {exc}", file=sys.stderr)
        return EXIT_CONDITION
    except InclusionViolation as exc:
        print(f"acceptance failure: {exc}", file=sys.stderr)
        return EXIT_ACCEPTANCE
    except DefinitenessEmpty as exc:
        print(f"definiteness interval empty: {exc}", file=sys.stderr)
        return EXIT_INDEFINITE


if __name__ == "__main__":
    sys.exit(main())
