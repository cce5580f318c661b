"""Command-line front end.

Exit codes: 0 when every verdict passes, 2 for an expected negative
(invalid input data, no solution, no bracket), 1 for internal errors and
64 for usage errors.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .canonical import (
    CanonicalParams,
    boundary_constants,
    closed_form_developing_map,
    evaluate_density,
    existence,
    synthesize,
    validate_params,
)
from .errors import LiouvilleError, NoBracket, NoSolution
from .schwarzian import SchwarzianSpec, eval_Q, validate_spec

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_NEGATIVE = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class Negative(Exception):
    """An expected negative outcome carrying a partial report."""

    def __init__(self, reason: str, result: dict | None = None):
        super().__init__(reason)
        self.reason = reason
        self.result = result or {}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --------------------------------------------------------------------------
# serialization


def _clean(x):
    """JSON-ready copy: complex -> [re, im], numpy scalars -> Python, inf/nan -> strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, (complex, np.complexfloating)):
        return [_clean(x.real), _clean(x.imag)]
    if hasattr(x, "to_dict"):
        return _clean(x.to_dict())
    if hasattr(x, "__dataclass_fields__"):
        from dataclasses import asdict

        return _clean(asdict(x))
    return x


def dumps(obj) -> str:
    """Stable JSON: sorted keys, shortest round-trip float repr, trailing newline."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _write(out: Path | None, name: str, text: str) -> None:
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    with open(out / name, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# --------------------------------------------------------------------------
# input helpers


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read JSON from {path}: {exc}") from exc


def _params(args) -> CanonicalParams:
    if not args.params:
        raise UsageError("--params <json> is required")
    try:
        return CanonicalParams.from_dict(_load_json(args.params))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, LiouvilleError):
            raise Negative(str(exc)) from exc
        raise UsageError(f"malformed parameter file: {exc}") from exc


def _spec(args) -> SchwarzianSpec:
    if not args.spec:
        raise UsageError("--spec <json> is required")
    d = _load_json(args.spec)
    try:
        return SchwarzianSpec.from_dict(d.get("schwarzian", d))
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed spec file: {exc}") from exc


def _points(args) -> list:
    try:
        return [complex(s.replace(" ", "")) for s in (args.z or ["1j"])]
    except ValueError as exc:
        raise UsageError(f"bad --z value: {exc}") from exc


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _rng(args):
    return np.random.default_rng(args.seed)


# --------------------------------------------------------------------------
# canonical


def run_canonical(args) -> dict:
    action = args.action
    if action == "synthesize":
        _require(args, "K", "c1", "c2")
        if args.K not in (-1, 0, 1):
            raise UsageError("--K must be -1, 0 or 1")
        try:
            p = synthesize(args.K, args.c1, args.c2)
        except NoSolution as exc:
            raise Negative(
                "no finite-area solution: the existence dichotomy is negative for these constants",
                {"K": args.K, "c1": args.c1, "c2": args.c2, "exists": False, "detail": str(exc)},
            ) from exc
        bc = boundary_constants(p)
        err = max(abs(bc.c1 - args.c1), abs(bc.c2 - args.c2))
        return {
            "params": p.to_dict(),
            "exists": existence(args.K, args.c1, args.c2),
            "roundtrip": {"c1": bc.c1, "c2": bc.c2, "error": err},
            "verdicts": [{"name": "roundtrip", "value": err, "tol": 1e-9, "passed": err <= 1e-9}],
        }
    p = _params(args)
    if action == "validate":
        v = validate_params(p)
        res = {"params": p.to_dict(), "valid": v.valid, "reason": v.reason, "analytic": v.analytic,
               "scan": v.scan, "scan_min": v.scan_min}
        if not v.valid:
            raise Negative(f"invalid parameters: {v.reason}", res)
        return res
    v = validate_params(p)
    if not v.valid:
        raise Negative(f"invalid parameters: {v.reason}", {"params": p.to_dict()})
    if action == "eval":
        zs = _points(args)
        vs = [float(evaluate_density(p, z)) for z in zs]
        return {"params": p.to_dict(), "points": zs, "v": vs, "ev": [math.exp(x) for x in vs]}
    if action == "constants":
        bc = boundary_constants(p)
        return {"params": p.to_dict(), "c1": bc.c1, "c2": bc.c2}
    if action == "verify":
        from .verification import field_csv, field_from_params, verify_canonical

        tol = args.tol if args.tol is not None else 1e-5
        rep = verify_canonical(p, pde_tol=tol)
        _write(args.out, "field.csv", field_csv(field_from_params(p)))
        d = rep.to_dict()
        d["area"] = rep.data.get("area", {}).get("value")
        return d
    raise UsageError(f"unknown action {action}")


# --------------------------------------------------------------------------
# schwarzian and develop


def run_schwarzian(args) -> dict:
    spec = _spec(args)
    v = validate_spec(spec)
    res = {"spec": spec.to_dict(), "valid": v.valid, "reason": v.reason, "alpha_inf": v.alpha_inf}
    if args.action == "validate":
        if not v.valid:
            raise Negative(f"inadmissible Schwarzian data: {v.reason}", res)
        return res
    zs = _points(args)
    res.update({"points": zs, "Q": [complex(eval_Q(spec, z)) for z in zs]})
    return res


def _probe_points(args, n=4):
    rng = _rng(args)
    r = np.exp(rng.uniform(-1.0, 1.0, n))
    th = rng.uniform(0.2, math.pi - 0.2, n)
    return [complex(x) for x in r * np.exp(1j * th)]


def run_develop(args) -> dict:
    from .developing import developing_map_numeric, solve_global

    if args.action == "solve-global":
        _require(args, "c")
        dm = solve_global(args.c, args.K if args.K is not None else 1)
        zs = _probe_points(args)
        S = [complex(dm.schwarzian_at(z)) for z in zs]
        err = max(abs(s - args.c / z ** 2) for s, z in zip(S, zs))
        return {"map": dm.to_dict(), "points": zs, "values": [dm.value(z) for z in zs],
                "schwarzian_error": err,
                "verdicts": [{"name": "schwarzian", "value": err, "tol": 1e-9, "passed": err <= 1e-9}]}
    spec = _spec(args)
    v = validate_spec(spec)
    if not v.valid:
        raise Negative(f"inadmissible Schwarzian data: {v.reason}", {"spec": spec.to_dict()})
    dm = developing_map_numeric(spec)
    zs = _probe_points(args)
    S = [complex(dm.schwarzian_at(z)) for z in zs]
    err = max(abs(s - complex(eval_Q(spec, z))) for s, z in zip(S, zs))
    verts = {str(i): dm.vertex_value(i) for i in range(len(spec.pole_list()))}
    verts["inf"] = dm.vertex_value("inf")
    return {"spec": spec.to_dict(), "points": zs, "values": [dm.value(z) for z in zs], "vertices": verts,
            "schwarzian_error": err,
            "verdicts": [{"name": "schwarzian", "value": err, "tol": 1e-8, "passed": err <= 1e-8}]}


# --------------------------------------------------------------------------
# polygons


def run_polygon(args) -> dict:
    from .polygons import PolygonalMetricSpec, alexandrov_partial_check, fit_accessory, polygon_from_spec

    if args.action == "fit":
        _require(args, "q", "alpha", "target_alpha_inf")
        if len(args.q) != 2 or len(args.alpha) != 2:
            raise UsageError("--q and --alpha take exactly two values")
        try:
            fit = fit_accessory(args.q[0], args.q[1], args.alpha[0], args.alpha[1], args.target_alpha_inf)
        except NoBracket as exc:
            raise Negative(f"no admissible accessory parameter: {exc}",
                           {"q": args.q, "alpha": args.alpha, "target_alpha_inf": args.target_alpha_inf}) from exc
        return {"fit": fit.to_dict(), "beta1": fit.beta,
                "verdicts": [{"name": "objective", "value": fit.residual, "tol": 1e-10,
                              "passed": fit.residual <= 1e-10}]}
    if not args.spec:
        raise UsageError("--spec <json> is required")
    try:
        pspec = PolygonalMetricSpec.from_dict(_load_json(args.spec))
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed spec file: {exc}") from exc
    v = validate_spec(pspec.schwarzian)
    if not v.valid:
        raise Negative(f"inadmissible Schwarzian data: {v.reason}", {"spec": pspec.to_dict()})
    poly, dm = polygon_from_spec(pspec, measure=args.action == "extract")
    singular = pspec.singular_points
    cert = alexandrov_partial_check(dm, poly, singular)
    res = {"spec": pspec.to_dict(), "certificate": cert.to_dict()}
    if args.action == "check":
        res["verdicts"] = [{"name": "local_diffeo", "value": 0.0 if cert.local_diffeo else 1.0, "tol": 0.0,
                            "passed": cert.local_diffeo},
                           {"name": "boundary_regular", "value": 0.0 if cert.boundary_regular else 1.0, "tol": 0.0,
                            "passed": cert.boundary_regular}]
        _write(args.out, "certificate.json", dumps(cert.to_dict()))
        return res
    tol = args.tol if args.tol is not None else 1e-4
    kg_err = max(abs(c / -2.0 - k) for c, k in zip(poly.constants, poly.curvatures))
    ang_err = max((abs(vx.angle - vx.expected) for vx in poly.vertices if vx.expected is not None), default=0.0)
    res.update({
        "polygon": poly.to_dict(),
        "angles": poly.angles(),
        "verdicts": [
            {"name": "closure", "value": poly.closure_residual(), "tol": 1e-6, "passed": poly.closure_residual() <= 1e-6},
            {"name": "circle_fit", "value": poly.fit_residual(), "tol": 1e-8, "passed": poly.fit_residual() <= 1e-8},
            {"name": "angles", "value": ang_err, "tol": 1e-3, "passed": ang_err <= 1e-3},
            {"name": "curvature_law", "value": kg_err, "tol": tol, "passed": kg_err <= tol},
        ],
    })
    _write(args.out, "polygon.json", dumps(poly.to_dict()))
    _write(args.out, "boundary.csv", poly.to_csv(dm))
    _write(args.out, "certificate.json", dumps(cert.to_dict()))
    return res


# --------------------------------------------------------------------------
# report all


def run_report(args) -> dict:
    from .developing import PowerForm
    from .polygons import PolygonalMetricSpec, polygon_from_spec
    from .verification import (
        MetricField,
        area,
        decision_table_instances,
        field_from_params,
        finiteness_of_map,
        liouville_residual,
        metric_from_dev,
        neumann_residual,
    )

    rng = _rng(args)
    verdicts = []
    sphere = area(metric_from_dev(PowerForm(K=1, gamma=1.0)))
    err = abs(sphere.value - 2 * math.pi) / (2 * math.pi)
    verdicts.append({"name": "sphere_area", "value": err, "tol": 1e-6, "passed": err <= 1e-6})
    samples = []
    for K in (-1, 0, 1):
        for _ in range(2):
            while True:
                c1, c2 = (float(x) for x in np.round(rng.uniform(-4, 4, 2), 3))
                if existence(K, c1, c2):
                    break
            p = synthesize(K, c1, c2)
            fld = field_from_params(p)
            pde = liouville_residual(fld)
            n1 = neumann_residual(fld, 1, c1)
            n2 = neumann_residual(fld, 2, c2)
            nerr = max(abs(n1.fitted_c - c1), abs(n2.fitted_c - c2))
            samples.append({"K": K, "c1": c1, "c2": c2, "params": p.to_dict(), "pde": pde.max, "neumann": nerr})
            verdicts.append({"name": f"pde K={K} ({c1}, {c2})", "value": pde.max, "tol": 1e-5, "passed": pde.max <= 1e-5})
            verdicts.append({"name": f"neumann K={K} ({c1}, {c2})", "value": nerr, "tol": 1e-6, "passed": nerr <= 1e-6})
    table = []
    mism = 0
    for inst in decision_table_instances():
        fv = finiteness_of_map(inst.dm)
        ar = area(MetricField(inst.dm.log_density, inst.dm.K, (0.0,), inst.dm, inst.name), ("half-disk", inst.epsilon))
        agree = fv.finite == (not ar.divergent)
        mism += not agree
        table.append({"name": inst.name, "table": fv.finite, "quadrature": not ar.divergent, "verdict": ar.verdict})
    verdicts.append({"name": "decision_table", "value": float(mism), "tol": 0.0, "passed": mism == 0})
    lune, _ = polygon_from_spec(PolygonalMetricSpec(SchwarzianSpec.from_poles([(0.0, 0.375, 0.0)])), measure=False)
    aerr = max(abs(a - math.pi / 2) for a in lune.angles())
    verdicts.append({"name": "lune_angles", "value": aerr, "tol": 1e-3, "passed": aerr <= 1e-3})
    return {"sphere_area": sphere.value, "canonical_samples": samples, "decision_table": table,
            "lune_angles": lune.angles(), "verdicts": verdicts}


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--K", type=int)
    common.add_argument("--c1", type=float)
    common.add_argument("--c2", type=float)
    common.add_argument("--c", type=float, help="global Schwarzian coefficient")
    common.add_argument("--params", help="canonical parameter JSON file")
    common.add_argument("--spec", help="Schwarzian or polygon spec JSON file")
    common.add_argument("--out", type=Path, help="directory for report files")
    common.add_argument("--tol", type=float)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--z", action="append", help="evaluation point such as 1+2j (repeatable)")
    common.add_argument("--q", type=float, nargs="+")
    common.add_argument("--alpha", type=float, nargs="+")
    common.add_argument("--target-alpha-inf", type=float, dest="target_alpha_inf")

    parser = _Parser(prog="liouville-neumann", description="Constant-curvature metrics with Neumann data.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    groups = {
        "canonical": ["validate", "eval", "constants", "synthesize", "verify"],
        "schwarzian": ["validate", "eval"],
        "develop": ["solve-global", "numeric"],
        "polygon": ["extract", "fit", "check"],
        "report": ["all"],
    }
    for name, actions in groups.items():
        p = sub.add_parser(name)
        acts = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
        for a in actions:
            acts.add_parser(a, parents=[common])
    return parser


_RUNNERS = {
    "canonical": run_canonical,
    "schwarzian": run_schwarzian,
    "develop": run_develop,
    "polygon": run_polygon,
    "report": run_report,
}


def _config(args) -> dict:
    keys = ("K", "c1", "c2", "c", "params", "spec", "tol", "seed", "z", "q", "alpha", "target_alpha_inf")
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.tol is not None and not args.tol > 0:
            raise UsageError("--tol must be positive")
        if args.seed < 0:
            raise UsageError("--seed must be non-negative")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    report = {
        "command": f"{args.command} {args.action}",
        "config": _config(args),
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    try:
        result = _RUNNERS[args.command](args)
        verdicts = result.get("verdicts", [])
        code = EXIT_OK if all(v["passed"] for v in verdicts) else EXIT_INTERNAL
        report.update({"status": "pass" if code == EXIT_OK else "fail", "result": result})
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Negative as exc:
        code = EXIT_NEGATIVE
        report.update({"status": "negative", "reason": exc.reason, "result": exc.result})
    except Exception as exc:  # noqa: BLE001 - every other failure is internal
        code = EXIT_INTERNAL
        report.update({"status": "error", "reason": f"{type(exc).__name__}: {exc}"})
    report["exit_code"] = code
    text = dumps(report)
    _write(args.out, "report.json", text)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
