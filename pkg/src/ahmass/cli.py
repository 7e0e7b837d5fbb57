"""Command-line surface: validated run configurations and report emission.

Usage:

    ahmass <command> --config config.json [--out DIR] [--quad-order K]
                     [--tol X] [--seed N]

Commands: mass, curvature, verify-ah, duality-check, eigenfunction, deform,
first-variation, ode-verify, dichotomy, rigidity-check.

The configuration document is strict: unknown keys anywhere are rejected
(exit 2).  Numerical failures exit 3; completed runs exit 0 when every check
passes its tolerance and 1 otherwise.  Reports are deterministic: reruns with
the same config produce byte-identical report and CSV files (timestamps live
in a separate metadata file).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .metrics import DomainError, metric_from_dict, metric_to_dict

COMMANDS = ("mass", "curvature", "verify-ah", "duality-check", "eigenfunction",
            "deform", "first-variation", "ode-verify", "dichotomy",
            "rigidity-check")

EXIT_CHECK_FAILURE = 1
EXIT_SCHEMA = 2
EXIT_NUMERICAL = 3


class SchemaError(ValueError):
    pass


NUMERIC_KEYS = {
    "radii": "radius ladder: list of radii or {min, max, count}",
    "quad_polar": "polar quadrature nodes",
    "quad_azimuth": "azimuthal quadrature nodes",
    "radial_nodes": "radial quadrature nodes per segment",
    "seed": "random seed recorded in the report",
    "tolerances": "per-check tolerance overrides",
    "ode_horizon": "ODE integration horizon T",
    "ode": "ODE coefficient family {p_amp, q_amp, f_amp, decay}",
    "pairs": "number of randomized pairs (duality-check)",
    "eps_ladder": "epsilon ladder (first-variation)",
    "q_claimed": "claimed decay rate (verify-ah)",
    "decay_rate": "target decay (deform / eigenfunction)",
    "phi_amp": "target amplitude (deform)",
    "fan_count": "seed fan size (dichotomy)",
    "sample_points": "sample count (curvature)",
    "r_min": "inner radius override",
    "r_max": "outer radius override",
    "wang_radius": "ball radius (rigidity-check)",
}

DEFAULT_TOLERANCES = {
    "duality_residual": 1e-6,
    "eigenfunction_residual": 1e-7,
    "deform_linear_residual": 1e-6,
    "newton_contraction": 0.1,
    "first_variation_order": 0.9,
    "wang_gap": 1e-8,
    "hessian_defect": 1e-8,
    "sectional_ode": 1e-5,
    "rho_profile": 1e-6,
    "curvature_identity": 1e-8,
    "mass_defect_consistency": 1e-14,
    "prop27_relative": 1e-2,
    "certificate_bound": 1e8,
    "remainder_decay_relative": 0.1,
    "resonant_profile_residual": 0.05,
}


def _require_keys(doc: dict, allowed: dict | set, where: str):
    unknown = set(doc) - set(allowed)
    if unknown:
        raise SchemaError(f"unknown keys in {where}: {sorted(unknown)}")


def load_config(path, overrides=None) -> dict:
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, dict):
        raise SchemaError("config must be a JSON object")
    _require_keys(raw, {"command", "metric", "numeric", "output"}, "config")
    numeric = raw.get("numeric", {}) or {}
    if not isinstance(numeric, dict):
        raise SchemaError("numeric must be an object")
    _require_keys(numeric, NUMERIC_KEYS, "numeric")
    tols = numeric.get("tolerances", {}) or {}
    _require_keys(tols, DEFAULT_TOLERANCES, "numeric.tolerances")
    for key, val in tols.items():
        if not (isinstance(val, (int, float)) and val > 0):
            raise SchemaError(f"tolerance {key} must be positive, got {val!r}")
    if overrides:
        numeric = dict(numeric)
        tols = dict(tols)
        if overrides.get("quad_order") is not None:
            numeric["quad_polar"] = overrides["quad_order"]
            numeric["quad_azimuth"] = 2 * overrides["quad_order"]
        if overrides.get("seed") is not None:
            numeric["seed"] = overrides["seed"]
        if overrides.get("tol") is not None:
            if overrides["tol"] <= 0:
                raise SchemaError("--tol must be positive")
            tols = tols | {k: overrides["tol"] for k in
                           ("duality_residual", "wang_gap", "curvature_identity")}
        numeric["tolerances"] = tols
        raw = dict(raw)
        raw["numeric"] = numeric
        if overrides.get("out") is not None:
            raw["output"] = overrides["out"]
    return raw


def resolve_metric(doc) -> tuple:
    if doc is None:
        raise SchemaError("this command requires a metric spec")
    if isinstance(doc, str):
        doc = json.loads(Path(doc).read_text())
    try:
        spec = metric_from_dict(doc)
    except (ValueError, KeyError) as exc:
        raise SchemaError(f"bad metric spec: {exc}") from exc
    return spec, metric_to_dict(spec)


def _radii(numeric, default=(20.0, 200.0, 8)):
    doc = numeric.get("radii")
    if doc is None:
        lo, hi, count = default
        return np.geomspace(lo, hi, count)
    if isinstance(doc, list):
        arr = np.asarray([float(v) for v in doc])
        if arr.size < 3 or np.any(np.diff(arr) <= 0):
            raise SchemaError("radii list must be >= 3 strictly increasing values")
        return arr
    if isinstance(doc, dict):
        _require_keys(doc, {"min", "max", "count"}, "numeric.radii")
        return np.geomspace(float(doc["min"]), float(doc["max"]), int(doc["count"]))
    raise SchemaError("radii must be a list or {min, max, count}")


def _tol(numeric, key):
    return float(numeric.get("tolerances", {}).get(key, DEFAULT_TOLERANCES[key]))


def _sphere(numeric, n, default=(48, 96)):
    from .quadrature import sphere_rule
    return sphere_rule(n, int(numeric.get("quad_polar", default[0])),
                       int(numeric.get("quad_azimuth", default[1])))


def _rng(numeric):
    return np.random.default_rng(int(numeric.get("seed", 20240801)))


# -- command handlers: each returns (results dict, checks list, csv tables) -----

def run_mass(spec, numeric):
    from .massflux import mass_vector
    from .reporting import check
    radii = _radii(numeric)
    quad = _sphere(numeric, spec.n) if spec.n == 3 else None
    mv = mass_vector(spec, radii, quad)
    recompute = abs(mv.defect - (mv.p[0] - np.sqrt(np.sum(mv.p[1:] ** 2))))
    checks = [
        check("defect_consistency", recompute, _tol(numeric, "mass_defect_consistency")),
        check("extrapolation_converged",
              float(sum(1 for r in mv.reports if "no-extrapolation" in r.flags)),
              0.5),
    ]
    table = [["r"] + [rep.integrand_label for rep in mv.reports]]
    rows = [[float(r)] + [float(rep.values[i]) for rep in mv.reports]
            for i, r in enumerate(radii)]
    return mv.to_dict(), checks, {"mass_ladder": (table[0], rows)}


def run_curvature(spec, numeric):
    from .chart import random_points
    from .curvature import metric_apparatus, riemann_symmetry_defects
    from .reporting import check
    rng = _rng(numeric)
    count = int(numeric.get("sample_points", 200))
    r_min = float(numeric.get("r_min", 1.0))
    rh = getattr(spec, "horizon_radius", 0.0)
    if rh:
        r_min = max(r_min, 1.3 * rh)
    pts = random_points(spec.n, rng, count, r_range=(r_min, float(numeric.get("r_max", 50.0))))
    app = metric_apparatus(spec, pts, level=2)
    anti1, anti2, bianchi = riemann_symmetry_defects(app.riemann)
    ric_sym = np.abs(app.ricci - app.ricci.swapaxes(1, 2)).max()
    tol = _tol(numeric, "curvature_identity") if spec.analytic else 1e-5
    scale = max(1.0, float(np.abs(app.riemann).max()))
    checks = [
        check("riemann_antisymmetry_first", float(anti1 / scale), tol),
        check("riemann_antisymmetry_last", float(anti2 / scale), tol),
        check("first_bianchi", float(bianchi / scale), tol),
        check("ricci_symmetry", float(ric_sym / scale), tol),
    ]
    header = ["r"] + [f"theta_{j}" for j in range(1, spec.n)] + ["scalar"]
    rows = [list(map(float, pts[i])) + [float(app.scalar[i])]
            for i in range(pts.shape[0])]
    results = {"scalar_mean": float(np.mean(app.scalar)),
               "scalar_max_dev": float(np.abs(app.scalar - np.mean(app.scalar)).max()),
               "samples": count}
    return results, checks, {"curvature_samples": (header, rows)}


def run_verify_ah(spec, numeric):
    from .decay import verify_ah
    from .reporting import check
    radii = _radii(numeric)
    q = float(numeric.get("q_claimed", spec.n))
    report = verify_ah(spec, q, radii)
    checks = [check(f"condition_{c.name}", 0.0 if c.passed else 1.0, 0.5,
                    passed=c.passed) for c in report.conditions]
    return report.to_dict(), checks, {}


def run_duality(spec, numeric):
    from .fields import random_compact_scalar, random_compact_tensor
    from .operators import duality_residual
    from .curvature import metric_apparatus
    from .quadrature import volume_rule
    from .reporting import check
    rng = _rng(numeric)
    pairs = int(numeric.get("pairs", 10))
    lo = max(2.0, float(numeric.get("r_min", 2.0)))
    hi = float(numeric.get("r_max", 6.0))
    rule = volume_rule(spec.n, [lo, hi], [int(numeric.get("radial_nodes", 32))],
                       _sphere(numeric, spec.n, (12, 24)))
    app = metric_apparatus(spec, rule.coords, level=2)
    worst = 0.0
    values = []
    for _ in range(pairs):
        h = random_compact_tensor(rng, spec.n, lo, hi)
        u = random_compact_scalar(rng, lo, hi, spec.n)
        res = duality_residual(spec, h, u, rule, app=app)
        values.append(res)
        worst = max(worst, res)
    checks = [check("duality_residual_max", worst, _tol(numeric, "duality_residual"))]
    rows = [[i, float(v)] for i, v in enumerate(values)]
    return {"pairs": pairs, "max_residual": worst,
            "residuals": values}, checks, {"duality_residuals": (["pair", "residual"], rows)}


def run_eigenfunction(spec, numeric):
    from .radial import radial_eigenfunction
    from .reporting import check
    rep = radial_eigenfunction(spec, r_hi=float(numeric.get("r_max", 200.0)),
                               decay_rate=numeric.get("decay_rate"))
    checks = [
        check("eigen_residual", rep.residual_sup, _tol(numeric, "eigenfunction_residual")),
        check("positivity", 0.0 if rep.positive else 1.0, 0.5, passed=rep.positive),
    ]
    return rep.to_dict(), checks, {}


def run_deform(spec, numeric):
    from .fields import power_tail_profile
    from .radial import conformal_deform_radial
    from .reporting import check
    s = float(numeric.get("decay_rate", 2.0))
    amp = float(numeric.get("phi_amp", 0.05))
    prof = power_tail_profile(amp, s)
    phi = lambda r: prof(np.asarray(r, dtype=float))[0]
    rep = conformal_deform_radial(spec, phi, s, r_hi=float(numeric.get("r_max", 150.0)),
                                  newton_steps=3)
    worst_ratio = max(rep.contraction_ratios) if rep.contraction_ratios else 0.0
    checks = [
        check("linear_residual", rep.linear_residual,
              _tol(numeric, "deform_linear_residual")),
        check("newton_contraction", worst_ratio, _tol(numeric, "newton_contraction")),
    ]
    return rep.to_dict(), checks, {}


def run_first_variation(spec, numeric):
    from .fields import random_compact_tensor
    from .operators import first_variation_check
    from .quadrature import volume_rule
    from .radial import inner_truncation_radius, radial_eigenfunction
    from .reporting import check
    rng = _rng(numeric)
    eps = numeric.get("eps_ladder", [3e-2, 1e-2, 3e-3, 1e-3])
    eps = [float(e) for e in eps]
    r0 = inner_truncation_radius(spec)
    rule = volume_rule(spec.n, [max(r0, 0.1), 2.0, 6.0, 20.0,
                                float(numeric.get("r_max", 190.0))],
                       [16, 48, 24, 24], _sphere(numeric, spec.n, (16, 32)))
    f = radial_eigenfunction(spec).potential
    h = random_compact_tensor(rng, spec.n, 2.0, 6.0, amplitude=0.5)
    rep = first_variation_check(spec, f, h, eps, rule)
    order_ok = rep.exact_zero or rep.order >= _tol(numeric, "first_variation_order")
    checks = [check("convergence_order", float(rep.order if not rep.exact_zero else 99.0),
                    _tol(numeric, "first_variation_order"), passed=bool(order_ok))]
    return rep.to_dict(), checks, {}


def run_ode_verify(numeric):
    from .odes import ODEProblem, fundamental_pair, particular_solution
    from .reporting import check
    fam = numeric.get("ode", {}) or {}
    _require_keys(fam, {"p_amp", "q_amp", "f_amp", "decay"}, "numeric.ode")
    p_amp = float(fam.get("p_amp", 0.0))
    q_amp = float(fam.get("q_amp", 0.0))
    f_amp = float(fam.get("f_amp", 0.0))
    d = float(fam.get("decay", 1.0))
    T = float(numeric.get("ode_horizon", 25.0))
    c0 = max(abs(p_amp), abs(q_amp), abs(f_amp)) + 1e-12
    prob = ODEProblem(p=lambda t: p_amp * np.exp(-d * t),
                      q=lambda t: q_amp * np.exp(-d * t),
                      f=lambda t: f_amp * np.exp(-d * t),
                      horizon=T, bounds=(c0, d))
    pair = fundamental_pair(prob)
    checks = [
        check("certificate_finite", pair.C_certificate,
              _tol(numeric, "certificate_bound")),
        check("wronskian_bound", 0.0 if pair.wronskian_bound_ok() else 1.0, 0.5,
              passed=pair.wronskian_bound_ok()),
    ]
    results = {"C_certificate": pair.C_certificate,
               "flags": list(pair.flags)}
    if f_amp != 0.0:
        prep = particular_solution(prob, pair)
        results["particular"] = prep.to_dict()
        if d == 1.0:
            checks.append(check("resonant_profile_residual", prep.profile_residual,
                                _tol(numeric, "resonant_profile_residual")))
        else:
            rel = abs(prep.fitted_decay - d) / d
            checks.append(check("remainder_decay_relative", rel,
                                _tol(numeric, "remainder_decay_relative")))
    t = pair.grid[:: max(1, pair.grid.size // 2000)]
    rows = np.column_stack([t, pair.u1.value(t), pair.u2.value(t),
                            pair.u1.value(t) * pair.u2.d1(t)
                            - pair.u2.value(t) * pair.u1.d1(t)])
    return results, checks, {"ode_solutions": (["t", "u1", "u2", "wronskian"],
                                               [list(map(float, r)) for r in rows])}


def run_dichotomy(spec, numeric):
    from .fields import ScalarField
    from .geodesics import axis_seed, classify_growth, seed_fan, unit_radial_direction, integrate_geodesic_fan
    from .metrics import static_potential_basis
    from .reporting import check
    n = spec.n
    T = float(numeric.get("ode_horizon", 9.0))
    seeds = seed_fan(n, int(numeric.get("fan_count", 64)))
    dirs = np.stack([unit_radial_direction(spec, p) for p in seeds])
    fan = integrate_geodesic_fan(spec, seeds, dirs, T)
    basis = static_potential_basis(n)
    checks = []
    results = {}
    label_rows = []
    for k, V in enumerate(basis):
        cls = classify_growth(spec, V, seeds, T, fan=fan)
        grown = sum(1 for c in cls if c.label == "linear-growth")
        results[f"V_{k}"] = {"linear_growth_seeds": grown,
                             "labels": [c.label for c in cls]}
        checks.append(check(f"V_{k}_has_growth_cone", 0.0 if grown > 0 else 1.0,
                            0.5, passed=grown > 0))
        for s, c in enumerate(cls):
            label_rows.append([k, s, c.label, float(c.slope)])
    # per-seed trajectories: arc length, radius, potential values
    stride = max(1, fan[0].ts.size // 40)
    traj_rows = []
    for s, sample in enumerate(fan):
        coords = sample.coords[::stride]
        ts = sample.ts[::stride]
        vals = np.stack([V.value(coords) for V in basis], axis=1)
        for i, t in enumerate(ts):
            traj_rows.append([s, float(t), float(coords[i, 0])]
                             + [float(v) for v in vals[i]])
    traj_header = ["seed", "t", "radius"] + [f"V_{k}" for k in range(n + 1)]
    # decaying combination along its axis
    from .metrics import static_potential
    V0, x1 = static_potential(n, 0), static_potential(n, 1)
    diff = ScalarField(lambda c: V0.jet(c) - x1.jet(c))
    cls = classify_growth(spec, diff, axis_seed(n)[None], T)
    results["V0_minus_x1_axis"] = cls[0].to_dict()
    checks.append(check("decay_combination", 0.0 if cls[0].label == "decay" else 1.0,
                        0.5, passed=cls[0].label == "decay"))
    return results, checks, {
        "labels": (["potential", "seed", "label", "slope"], label_rows),
        "trajectories": (traj_header, traj_rows)}


def run_rigidity(spec, numeric):
    from .geodesics import integrate_geodesic
    from .metrics import static_potential
    from .reporting import check
    from .rigidity import sectional_ode_check, wang_identity_check, warped_fixture
    n = spec.n
    results = {}
    checks = []
    if spec.family == "hyperbolic":
        V0 = static_potential(n, 0)
        rep = wang_identity_check(spec, V0, float(numeric.get("wang_radius", 10.0)),
                                  quad=_sphere(numeric, n, (16, 32)),
                                  radial_nodes=int(numeric.get("radial_nodes", 48)))
        results["wang"] = rep.to_dict()
        checks.append(check("wang_gap", rep.gap, _tol(numeric, "wang_gap")))
    fx = warped_fixture("round_sphere", n)
    rng = _rng(numeric)
    tpts = np.column_stack([rng.uniform(-3, 3, 100), rng.uniform(0.3, 2.8, 100),
                            rng.uniform(0, 2 * np.pi, 100)]) if n == 3 else None
    if tpts is not None:
        defect = fx.hessian_defect(tpts)
        results["warped_hessian_defect"] = defect
        checks.append(check("hessian_defect", defect, _tol(numeric, "hessian_defect")))
        p0 = np.array([0.5, 1.1, 0.7])
        g0 = fx.metric.components(p0[None])[0]
        X0 = np.array([0.0, 1.0 / np.sqrt(g0[1, 1]), 0.0])
        Y0 = np.array([0.0, 0.0, 1.0 / np.sqrt(g0[2, 2])])
        geo = integrate_geodesic(fx.metric, p0, np.array([1.0, 0.0, 0.0]), T=2.5,
                                 sample_step=0.01, transported=np.stack([X0, Y0]))
        srep = sectional_ode_check(fx.metric, fx.potential, geo)
        results["sectional"] = srep.to_dict()
        rho_gap = float(np.abs(srep.rho - np.tanh(geo.ts + 0.5)).max())
        checks.extend([
            check("rho_ode_residual", srep.rho_ode_residual, _tol(numeric, "sectional_ode")),
            check("K_ode_residual", srep.K_ode_residual, _tol(numeric, "sectional_ode")),
            check("rho_profile", rho_gap, _tol(numeric, "rho_profile")),
        ])
    return results, checks, {}


def run(config: dict, out_dir=None) -> int:
    """Execute a validated config; writes report files, returns exit status."""
    from .reporting import write_csv, write_meta, write_report
    t0 = time.time()
    command = config.get("command")
    if command not in COMMANDS:
        raise SchemaError(f"unknown command {command!r}; expected one of {COMMANDS}")
    numeric = config.get("numeric", {}) or {}
    out = Path(out_dir or config.get("output") or "out")
    out.mkdir(parents=True, exist_ok=True)

    spec = None
    metric_doc = None
    if command != "ode-verify":
        spec, metric_doc = resolve_metric(config.get("metric"))

    handlers = {
        "mass": lambda: run_mass(spec, numeric),
        "curvature": lambda: run_curvature(spec, numeric),
        "verify-ah": lambda: run_verify_ah(spec, numeric),
        "duality-check": lambda: run_duality(spec, numeric),
        "eigenfunction": lambda: run_eigenfunction(spec, numeric),
        "deform": lambda: run_deform(spec, numeric),
        "first-variation": lambda: run_first_variation(spec, numeric),
        "ode-verify": lambda: run_ode_verify(numeric),
        "dichotomy": lambda: run_dichotomy(spec, numeric),
        "rigidity-check": lambda: run_rigidity(spec, numeric),
    }
    results, checks, tables = handlers[command]()

    numeric_doc = _resolved_numeric(numeric)
    numeric_doc.setdefault("seed", int(numeric.get("seed", 20240801)))
    resolved = {"command": command, "metric": metric_doc,
                "numeric": numeric_doc, "output": str(out)}
    stem = command.replace("-", "_")
    ok = write_report(out / f"{stem}_report.json", command, resolved, results,
                      checks, version=__version__)
    for name, (header, rows) in tables.items():
        write_csv(out / f"{stem}_{name}.csv", header, rows)
    write_meta(out / f"{stem}_meta.json", time.time() - t0, __version__)
    return 0 if ok else EXIT_CHECK_FAILURE


def _resolved_numeric(numeric: dict) -> dict:
    doc = {}
    for key in sorted(numeric):
        val = numeric[key]
        if isinstance(val, dict):
            doc[key] = {k: val[k] for k in sorted(val)}
        elif isinstance(val, list):
            doc[key] = list(val)
        else:
            doc[key] = val
    return doc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ahmass",
        description="numerical checks for asymptotically hyperbolic mass and rigidity")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to the run config JSON")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--quad-order", type=int, default=None,
                        help="polar quadrature order (azimuth doubled)")
    parser.add_argument("--tol", type=float, default=None,
                        help="override the main tolerance of the command")
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config, overrides=vars(args))
        if config.get("command") not in (None, args.command):
            raise SchemaError(f"config command {config.get('command')!r} does not "
                              f"match CLI command {args.command!r}")
        config["command"] = args.command
        return run(config, out_dir=args.out)
    except SchemaError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (ArithmeticError, DomainError, np.linalg.LinAlgError,
            ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
