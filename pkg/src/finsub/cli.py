"""Command-line front end.

Exit codes: 0 success / verification passed, 1 verification failed or the
solver gave up, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import chartbundle, liealg
from .errors import FinsubError, MaxIterations, NonConvexEncountered
from .minksub import SolverConfig, lift, make_surjection, verify_submersion
from .norms import NormSpec, verify_minkowski

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _load_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _load_norm(path: str) -> NormSpec:
    return NormSpec.from_json(_load_json(path))


def _load_mu(path: str):
    data = _load_json(path)
    if not isinstance(data, dict) or "M" not in data:
        raise InputError(f"{path}: surjection JSON must be an object with key 'M'")
    return make_surjection(data["M"])


def _parse_vector(text: str) -> np.ndarray:
    text = text.strip()
    try:
        if text.startswith("["):
            return np.atleast_1d(np.asarray(json.loads(text), dtype=float))
        return np.array([float(t) for t in text.split(",")])
    except (ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot parse vector {text!r}") from exc


def _solver_config(args) -> SolverConfig:
    if getattr(args, "config", None):
        try:
            return SolverConfig.from_json(_load_json(args.config))
        except (TypeError, ValueError) as exc:
            raise InputError(f"{args.config}: {exc}") from exc
    return SolverConfig()


def _flatten(prefix: str, value, rows: list) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, rows)
    elif isinstance(value, (list, tuple)):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, value))


def _to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _emit(args, payload) -> None:
    if args.format == "csv":
        rows: list = []
        _flatten("", payload, rows)
        text = _to_csv(("key", "value"), rows)
    else:
        text = json.dumps(payload, indent=2, allow_nan=True) + "\n"
    _write(args, text)


def _write(args, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


# -- commands ---------------------------------------------------------------

def cmd_verify_norm(args) -> int:
    spec = _load_norm(args.norm)
    report = verify_minkowski(spec, n_samples=args.samples, seed=args.seed, tol=args.tol)
    payload = report.to_json()
    payload["structural_problems"] = spec.structural_problems()
    _emit(args, payload)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_lift(args) -> int:
    spec, surj = _load_norm(args.norm), _load_mu(args.mu)
    sol = lift(spec, surj, _parse_vector(args.v), _solver_config(args))
    _emit(args, sol.to_json())
    return EXIT_OK


def cmd_subduce(args) -> int:
    spec, surj = _load_norm(args.norm), _load_mu(args.mu)
    v = _parse_vector(args.v)
    sol = lift(spec, surj, v, _solver_config(args))
    _emit(args, {"v": v.tolist(), "value": sol.value, "degenerate": sol.degenerate})
    return EXIT_OK


def cmd_verify_submersion(args) -> int:
    spec1, surj, spec2 = _load_norm(args.norm), _load_mu(args.mu), _load_norm(args.norm2)
    report = verify_submersion(spec1, surj, spec2, n_samples=args.samples, seed=args.seed, tol=args.tol,
                               cfg=_solver_config(args))
    _emit(args, report.to_json())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_tangency(args) -> int:
    try:
        cf = chartbundle.ChartFinsler.from_json(_load_json(args.chart))
    except (KeyError, TypeError) as exc:
        raise InputError(f"{args.chart}: malformed chart description ({exc})") from exc
    x, y, v = _parse_vector(args.x), _parse_vector(args.y), _parse_vector(args.v)
    defect = chartbundle.tangency_defect(cf, x, y, v)
    coeffs = chartbundle.splitting_coeffs(cf, x, y, v)
    ok = bool(np.abs(defect).max() <= args.tol)
    _emit(args, {"splitting": coeffs.tolist(), "tangency_defect": defect.tolist(), "tangent": ok})
    return EXIT_OK if ok else EXIT_FAIL


def _norm_by_name(name: str) -> NormSpec:
    F, F_hat, F_tilde = liealg.candidate_norms()
    return {"F": F, "Fhat": F_hat, "Ftilde": F_tilde}[name]


def cmd_so4_demo(args) -> int:
    split = liealg.so4()
    sc = split.sc
    L1, L2 = liealg.invariant_polys()
    F, F_hat, F_tilde = liealg.candidate_norms()
    rng = np.random.default_rng(args.seed)
    w = rng.standard_normal(6)
    norms = {"F": F, "Fhat": F_hat, "Ftilde": F_tilde}
    out = {
        "basis": sc.rep.tolist(),
        "structure_constants": sc.C.tolist(),
        "killing": liealg.killing_matrix(sc).tolist(),
        "jacobi_defect": liealg.jacobi_defect(sc),
        "reductivity_defect": split.reductivity_defect(),
        "invariance_residual": {
            "L1": float(np.abs(liealg.ad_invariance_residual(sc, L1, w)).max()),
            "L2": float(np.abs(liealg.ad_invariance_residual(sc, L2, w)).max()),
            **{k: float(np.abs(liealg.ad_invariance_residual(sc, n, w)).max()) for k, n in norms.items()},
        },
        "norms": {},
    }
    all_ok = out["jacobi_defect"] <= 1e-12 and out["reductivity_defect"] <= 1e-12
    for name, spec in norms.items():
        report = verify_minkowski(spec, n_samples=args.samples, seed=args.seed, tol=args.tol)
        lift_fn, sub = liealg.subduce_to_m(split, spec)
        out["norms"][name] = {
            "minkowski": report.passed,
            "lift_100": lift_fn([1.0, 0.0, 0.0]).tolist(),
            "lift_110": lift_fn([1.0, 1.0, 0.0]).tolist(),
            "subduced_100": sub.eval([1.0, 0.0, 0.0]),
        }
        all_ok = all_ok and report.passed
    _emit(args, out)
    return EXIT_OK if all_ok else EXIT_FAIL


def cmd_cone(args) -> int:
    split = liealg.so4()
    spec = _load_norm(args.norm) if args.norm else _norm_by_name(args.which)
    if spec.dim != split.sc.dim:
        raise InputError(f"cone needs a norm on so(4) (dimension 6), got {spec.dim}")
    pts = liealg.cone_sample(split, spec, args.n, seed=args.seed)
    if args.format == "csv":
        _write(args, _to_csv(["w1", "w2", "w3", "w4", "w5", "w6"], pts.tolist()))
    else:
        _emit(args, {"points": pts.tolist()})
    return EXIT_OK


def randers_figure_rows(n_circle: int = 360, n_ray: int = 50) -> list:
    """Rows ``(series, x, y)``: the unit circle, the two horizontal rays, and the line v + 2w = 0."""
    r3 = math.sqrt(3.0)
    rows = []
    for k in range(n_circle):
        t = 2 * math.pi * k / n_circle
        rows.append(("unit_circle", -1 + r3 * math.cos(t), -1 + r3 * math.sin(t)))
    for name, u in (("ray_u1", (-1 + r3, -1.0)), ("ray_u2", (-1 - r3, -1.0))):
        for k in range(n_ray + 1):
            s = 1.5 * k / n_ray
            rows.append((name, s * u[0], s * u[1]))
    for k in range(n_ray + 1):
        v = -4 + 8 * k / n_ray
        rows.append(("line_v_plus_2w", v, -v / 2))
    return rows


def cmd_randers_figure(args) -> int:
    rows = randers_figure_rows()
    if args.format == "json":
        _emit(args, {"rows": [list(r) for r in rows]})
    else:
        _write(args, _to_csv(["series", "x", "y"], rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=500)
    common.add_argument("--format", choices=("json", "csv"), default=None, help="default json (csv for randers-figure)")
    common.add_argument("--output", "-o", default=None, help="write results here instead of stdout")

    parser = argparse.ArgumentParser(prog="finsub", description="Nonlinear lifts and subduced Minkowski norms.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-norm", parents=[common], help="certify the Minkowski axioms for a norm")
    p.add_argument("--norm", required=True)
    p.set_defaults(func=cmd_verify_norm)

    for name, func, helptext in (("lift", cmd_lift, "compute the fibre-minimising lift h(v)"),
                                 ("subduce", cmd_subduce, "evaluate the subduced norm F2(v)")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--norm", required=True)
        p.add_argument("--mu", required=True)
        p.add_argument("--v", required=True, help="comma-separated or JSON list")
        p.add_argument("--config", default=None, help="solver config JSON")
        p.set_defaults(func=func)

    p = sub.add_parser("verify-submersion", parents=[common], help="check mu is a Minkowski submersion")
    p.add_argument("--norm", required=True)
    p.add_argument("--mu", required=True)
    p.add_argument("--norm2", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_verify_submersion)

    p = sub.add_parser("tangency", parents=[common], help="spray tangency defect of a chart family")
    p.add_argument("--chart", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--v", required=True)
    p.set_defaults(func=cmd_tangency)

    p = sub.add_parser("so4-demo", parents=[common], help="SO(4)/SO(3) example")
    p.set_defaults(func=cmd_so4_demo)

    p = sub.add_parser("cone", parents=[common], help="sample the horizontal cone in so(4)")
    p.add_argument("--which", choices=("F", "Fhat", "Ftilde"), default="Ftilde")
    p.add_argument("--norm", default=None, help="a 6-dimensional norm JSON instead of --which")
    p.add_argument("--n", type=int, default=20)
    p.set_defaults(func=cmd_cone)

    p = sub.add_parser("randers-figure", parents=[common], help="figure data for the Randers example")
    p.set_defaults(func=cmd_randers_figure)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_INPUT
    if args.format is None:
        args.format = "csv" if args.command == "randers-figure" else "json"
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (MaxIterations, NonConvexEncountered) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except FinsubError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
