"""Command-line driver: batch verification with machine-readable reports.

Three subcommands: `verify` runs every applicable structural check for one
catalog example over deterministic sample points, `angles` reports angle
functions and the distinct-angle count, `ode` integrates the profile flow and
checks the rotational-chart laws, exporting the profile curve as CSV.

Reports are JSON with layout {config, results, summary, timestamp}; identical
configurations produce byte-identical reports apart from the timestamp line.
Exit codes: 0 all checks pass, 1 check failure, 2 usage or configuration
error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .gaussmap import (
    FdSteps,
    GaussMapError,
    angle_spectrum,
    gauge_normalize,
    gauss_map,
    mean_curvature,
    palmer_residual,
    second_fundamental_form,
    structure_operators,
)
from .hypersurfaces import (
    Box,
    ChartError,
    HypersurfaceChart,
    cartan_tube,
    principal_curvatures,
    product_spheres,
    round_sphere,
)
from .numerics import NumericsError
from .quadric import StructureGauge
from .rotational import (
    OdeError,
    build_rotational_chart,
    first_integral_residual,
    integrate_alpha,
    ode_equivalence_residual,
    ode_order_ratio,
    profile_curve,
    profile_ode_residual_from_chart,
    rotational_angles,
    warped_curvature_check,
)
from .verify import (
    GaugePolicy,
    ResidualReport,
    VerifyError,
    check_csc_identities,
    check_prop1,
    classify_by_angles,
    codazzi_residual,
    connection_and_s,
    field_derivatives,
    gauss_equation_residual,
    gauss_metric_fn,
    sectional_curvature,
    sectional_from_metric,
)

__all__ = ["RunConfig", "main", "cmd_verify", "cmd_angles", "cmd_ode"]

KNOWN_EXAMPLES = ("sphere", "product", "cartan", "rotational")

DEFAULT_TOLERANCES = {
    "chart_invariants": 1e-8,
    "chart_rank_margin": 0.0,
    "lagrangian": 1e-8,
    "horizontality": 1e-9,
    "structure_unit_norm": 1e-8,
    "structure_commute": 1e-8,
    "curvature_angle_cotangent": 1e-5,
    "cubic_symmetry": 1e-5,
    "mean_curvature_norm": 1e-5,
    "palmer_formula": 1e-5,
    "gauge_one_form": 1e-5,
    "connection_antisymmetry": 1e-8,
    "angle_gradient_identity": 1e-4,
    "frame_rotation_identity": 1e-4,
    "gauss_equation": 1e-3,
    "codazzi_equation": 1e-3,
    "sectional_two_route": 1e-3,
    "sectional_value": 1e-3,
    "angles_equal": 1e-5,
    "angle_gaps_third_pi": 1e-5,
    "cubic_component_squared": 1e-3,
    "csc_diagonal_balance": 1e-3,
    "csc_triple_vanishing": 1e-3,
    "csc_quadruple_vanishing": 1e-3,
    "angle_sum_normalized": 1e-8,
    "principal_vs_angle_pattern": 1e-4,
    "first_integral": 1e-6,
    "ode_forms_equivalent": 1e-5,
    "profile_second_order_ode": 1e-3,
    "warp_block_diagonal": 1e-3,
    "warp_block_conformal": 1e-3,
    "warp_factor_law": 1e-3,
    "fiber_curvature_normalized": 1e-3,
    "fiber_curvature_chain": 1e-3,
    "fiber_curvature_variance": 1e-4,
    "isoparametric_variance": 1e-8,
}

SECTIONAL_TARGETS = {"sphere": 2.0, "cartan": 0.125}


def _mod_pi_gap(a: float, b: float) -> float:
    d = abs(a - b) % np.pi
    return min(d, np.pi - d)


class ConfigError(Exception):
    """Bad command-line configuration."""


@dataclass
class RunConfig:
    """Validated run parameters; every field reaches the report verbatim."""

    command: str
    example: str = "sphere"
    n: int = 3
    params: dict = field(default_factory=dict)
    grid: int = 3
    h: float = 1e-4
    gauge: str = "normalized"
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        if self.grid < 1:
            raise ConfigError("grid must be at least 1")
        if not (1e-7 < self.h < 1e-2):
            raise ConfigError(f"h = {self.h} outside the supported range (1e-7, 1e-2)")
        if self.command in ("verify", "angles") and self.example not in KNOWN_EXAMPLES:
            raise ConfigError(
                f"unknown example '{self.example}'; choose from {KNOWN_EXAMPLES}"
            )
        if self.gauge not in ("canonical", "normalized"):
            raise ConfigError("gauge must be 'canonical' or 'normalized'")

    def tol(self, name: str) -> float:
        if name in self.tolerances:
            return float(self.tolerances[name])
        return DEFAULT_TOLERANCES[name]

    def steps(self) -> FdSteps:
        return FdSteps.from_base(self.h)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "example": self.example,
            "n": self.n,
            "params": {k: self.params[k] for k in sorted(self.params)},
            "grid": self.grid,
            "h": self.h,
            "gauge": self.gauge,
            "tolerances": {k: self.tolerances[k] for k in sorted(self.tolerances)},
            "seed": self.seed,
        }


# ---------------------------------------------------------------------------
# deterministic sample points
# ---------------------------------------------------------------------------

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def kronecker_points(box: Box, count: int, seed: int, margin: float) -> list[np.ndarray]:
    """Low-discrepancy interior points: additive irrational rotations per axis."""
    dim = box.dim
    alphas = np.array([np.sqrt(p) % 1.0 for p in _PRIMES[:dim]])
    start = np.array(
        [((seed + 1) * np.sqrt(_PRIMES[dim + i]) ) % 1.0 for i in range(dim)]
    )
    lows = box.lows + margin
    spans = (box.highs - margin) - lows
    pts = []
    for k in range(count):
        frac = np.mod(start + (k + 1) * alphas, 1.0)
        pts.append(lows + frac * spans)
    return pts


def build_example(cfg: RunConfig) -> HypersurfaceChart:
    """Construct the configured catalog chart (integrating the flow if needed)."""
    p = cfg.params
    if cfg.example == "sphere":
        return round_sphere(cfg.n, p.get("r", 1.0 / np.sqrt(2.0)))
    if cfg.example == "product":
        k = int(p.get("k", 1))
        r1 = p.get("r1", 1.0 / np.sqrt(2.0))
        return product_spheres(k, cfg.n, r1)
    if cfg.example == "cartan":
        if cfg.n != 3:
            raise ConfigError("the cartan example lives in dimension n = 3")
        return cartan_tube(p.get("t", 0.35))
    if cfg.example == "rotational":
        if cfg.n < 3:
            raise ConfigError("rotational examples need n >= 3")
        traj = integrate_alpha(
            cfg.n,
            p.get("alpha0", np.pi / 12.0),
            p.get("dalpha0", 0.0),
            p.get("span", 0.8),
            int(p.get("steps", 4000)),
        )
        if traj.stopped_early:
            raise ConfigError(f"trajectory stopped early: {traj.stop_reason}")
        return build_rotational_chart(profile_curve(traj), cfg.n)
    raise ConfigError(f"unknown example '{cfg.example}'")


# ---------------------------------------------------------------------------
# verification per sample point
# ---------------------------------------------------------------------------

def _point_report(chart: HypersurfaceChart, x, cfg: RunConfig) -> ResidualReport:
    steps = cfg.steps()
    report = ResidualReport(example=cfg.example, point=list(map(float, x)))

    inv = chart.validate_at(x, steps.first)
    report.add(
        "chart_invariants",
        max(v for k, v in inv.items() if k != "min_singular_value"),
        cfg.tol("chart_invariants"),
    )
    report.add(
        "chart_rank_margin",
        max(0.0, 1e-6 - inv["min_singular_value"]),
        cfg.tol("chart_rank_margin"),
    )

    jet = gauss_map(chart, x, steps)
    report.add("lagrangian", jet.lagrangian_residual(), cfg.tol("lagrangian"))
    report.add("horizontality", jet.horizontality_residual(), cfg.tol("horizontality"))

    phi = 0.0 if cfg.gauge == "canonical" else gauge_normalize(jet).phi
    gauge = StructureGauge(phi)
    policy = GaugePolicy("fixed", phi)
    b, c = structure_operators(jet, gauge)
    eye = np.eye(jet.dim)
    report.add(
        "structure_unit_norm", np.abs(b @ b + c @ c - eye).max(), cfg.tol("structure_unit_norm")
    )
    report.add("structure_commute", np.abs(b @ c - c @ b).max(), cfg.tol("structure_commute"))

    spec0 = angle_spectrum(jet, StructureGauge(0.0))
    cot_res = 0.0
    lams = np.sort(jet.lambdas)[::-1]
    ths = spec0.thetas  # ascending pairs with descending curvatures
    for lam, th in zip(lams, ths):
        if abs(np.sin(th)) > 1e-3:
            cot_res = max(cot_res, abs(lam - np.cos(th) / np.sin(th)))
    report.add("curvature_angle_cotangent", cot_res, cfg.tol("curvature_angle_cotangent"))

    spec = angle_spectrum(jet, gauge)
    ff = second_fundamental_form(jet, spec)
    report.add("cubic_symmetry", ff.symmetry_defect, cfg.tol("cubic_symmetry"))
    report.add(
        "mean_curvature_norm",
        float(np.linalg.norm(mean_curvature(ff))),
        cfg.tol("mean_curvature_norm"),
    )
    palmer = palmer_residual(chart, x, steps)
    report.add("palmer_formula", palmer["residual"], cfg.tol("palmer_formula"))

    fd = field_derivatives(chart, x, policy, steps, with_cubic=True)
    conn = connection_and_s(chart, x, policy, steps, fields=fd)
    if cfg.gauge == "normalized":
        report.add("gauge_one_form", np.abs(conn.s).max(), cfg.tol("gauge_one_form"))
    report.add(
        "connection_antisymmetry",
        conn.antisymmetry_defect,
        cfg.tol("connection_antisymmetry"),
    )
    prop1 = check_prop1(
        chart,
        x,
        policy,
        steps,
        tol_gradient=cfg.tol("angle_gradient_identity"),
        tol_rotation=cfg.tol("frame_rotation_identity"),
        fields=fd,
    )
    report.merge(prop1)
    report.merge(
        gauss_equation_residual(
            chart, x, policy, steps, tol=cfg.tol("gauss_equation"), jet=jet, spec=spec, ff=ff
        )
    )
    report.merge(
        codazzi_residual(chart, x, policy, steps, tol=cfg.tol("codazzi_equation"), fields=fd)
    )

    k_alg = sectional_curvature(spec, ff)
    metric_fn = gauss_metric_fn(chart, steps)
    two_route = 0.0
    value_res = 0.0
    target = SECTIONAL_TARGETS.get(cfg.example)
    if cfg.example == "product" and cfg.n == 2:
        target = 0.0
    for i in range(jet.dim):
        for j in range(i + 1, jet.dim):
            k_met = sectional_from_metric(
                metric_fn, x, spec.frame_vel[i], spec.frame_vel[j], steps.metric
            )
            two_route = max(two_route, abs(k_alg[i, j] - k_met))
            if target is not None:
                value_res = max(value_res, abs(k_met - target))
    report.add("sectional_two_route", two_route, cfg.tol("sectional_two_route"))
    if target is not None:
        report.add("sectional_value", value_res, cfg.tol("sectional_value"))

    if cfg.example == "sphere":
        th = spec.thetas
        gap = max(
            (_mod_pi_gap(th[i], th[j]) for i in range(len(th)) for j in range(i + 1, len(th))),
            default=0.0,
        )
        report.add("angles_equal", gap, cfg.tol("angles_equal"))
    if cfg.example == "cartan":
        th = np.sort(spec.thetas)
        gap_res = max(
            abs(th[1] - th[0] - np.pi / 3.0), abs(th[2] - th[1] - np.pi / 3.0)
        )
        report.add("angle_gaps_third_pi", gap_res, cfg.tol("angle_gaps_third_pi"))
        report.add(
            "cubic_component_squared",
            abs(ff.h[0, 1, 2] ** 2 - 0.375),
            cfg.tol("cubic_component_squared"),
        )
    if cfg.example in ("sphere", "cartan") or (cfg.example == "product" and cfg.n == 2):
        csc = check_csc_identities(spec, ff, tol=cfg.tol("csc_diagonal_balance"))
        report.merge(csc)
    if cfg.example == "rotational":
        alpha = chart.meta["interp"].value(float(x[0]))
        prof_th, orbit_th = rotational_angles(alpha, cfg.n)
        lam_prof = np.cos(prof_th) / np.sin(prof_th)
        lam_orb = np.cos(orbit_th) / np.sin(orbit_th)
        lam_sorted = np.sort(jet.lambdas)
        expected = np.sort(np.array([lam_prof] + [lam_orb] * (cfg.n - 1)))
        report.add(
            "principal_vs_angle_pattern",
            float(np.abs(lam_sorted - expected).max()),
            cfg.tol("principal_vs_angle_pattern"),
        )
    return report


def _skipped_checks(cfg: RunConfig) -> list[dict]:
    skipped = []
    if cfg.example not in SECTIONAL_TARGETS and not (
        cfg.example == "product" and cfg.n == 2
    ):
        skipped.append(
            {
                "name": "sectional_value",
                "reason": f"'{cfg.example}' (n={cfg.n}) has no constant-curvature target",
            }
        )
    if cfg.example not in ("sphere", "cartan") and not (
        cfg.example == "product" and cfg.n == 2
    ):
        skipped.append(
            {
                "name": "csc_identities",
                "reason": "constant-curvature balance applies to the constant-curvature catalog only",
            }
        )
    if cfg.gauge == "canonical":
        skipped.append(
            {
                "name": "gauge_one_form",
                "reason": "gauge one-form vanishing is asserted for the normalized gauge",
            }
        )
    return skipped


def cmd_verify(cfg: RunConfig) -> tuple[int, dict]:
    chart = build_example(cfg)
    margin = max(0.03, 3.0 * cfg.steps().stencil_margin)
    points = kronecker_points(chart.box, cfg.grid, cfg.seed, margin)
    results = []
    sample_specs = []
    for x in points:
        rep = _point_report(chart, x, cfg)
        results.append(rep)
        sample_specs.append(angle_spectrum(gauss_map(chart, x, cfg.steps())))
    distinct = None
    if chart.meta.get("isoparametric"):
        thetas = np.array([np.sort(s.thetas) for s in sample_specs])
        spread = float(np.var(thetas, axis=0).max()) if len(thetas) > 1 else 0.0
        extra = ResidualReport(example=cfg.example, point=["all"])
        extra.add("isoparametric_variance", spread, cfg.tol("isoparametric_variance"))
        distinct = classify_by_angles(sample_specs)
        results.append(extra)
    summary_checks = [e for r in results for e in r.entries.values()]
    summary = {
        "total": len(summary_checks),
        "passed": sum(e.passed for e in summary_checks),
        "failed": sum(not e.passed for e in summary_checks),
        "all_pass": all(e.passed for e in summary_checks),
        "skipped": _skipped_checks(cfg),
    }
    if distinct is not None:
        summary["distinct_angles"] = distinct
    payload = {
        "config": cfg.to_dict(),
        "results": [r.to_dict() for r in results],
        "summary": summary,
    }
    return (0 if summary["all_pass"] else 1), payload


def cmd_angles(cfg: RunConfig) -> tuple[int, dict]:
    chart = build_example(cfg)
    margin = max(0.03, 3.0 * cfg.steps().stencil_margin)
    points = kronecker_points(chart.box, cfg.grid, cfg.seed, margin)
    rows = []
    specs = []
    for x in points:
        jet = gauss_map(chart, x, cfg.steps())
        phi = 0.0 if cfg.gauge == "canonical" else gauge_normalize(jet).phi
        spec = angle_spectrum(jet, StructureGauge(phi))
        specs.append(spec)
        rows.append(
            {
                "point": [float(v) for v in x],
                "gauge_phi": float(phi),
                "angles": [float(t) for t in spec.thetas],
                "principal_curvatures": [float(l) for l in jet.lambdas],
            }
        )
    summary = {"all_pass": True, "skipped": []}
    if chart.meta.get("isoparametric"):
        summary["distinct_angles"] = classify_by_angles(specs)
    payload = {"config": cfg.to_dict(), "results": rows, "summary": summary}
    return 0, payload


def cmd_ode(cfg: RunConfig) -> tuple[int, dict]:
    if cfg.n < 3:
        raise ConfigError("the profile flow needs n >= 3")
    p = cfg.params
    alpha0 = p.get("alpha0", np.pi / 12.0)
    dalpha0 = p.get("dalpha0", 0.0)
    span = p.get("span", 0.8)
    steps_n = int(p.get("steps", 4000))
    traj = integrate_alpha(cfg.n, alpha0, dalpha0, span, steps_n)
    report = ResidualReport(example="rotational", point=[0.0])
    report.add("first_integral", first_integral_residual(traj), cfg.tol("first_integral"))
    report.add(
        "ode_forms_equivalent", ode_equivalence_residual(traj), cfg.tol("ode_forms_equivalent")
    )
    order = ode_order_ratio(cfg.n, alpha0, dalpha0, span, max(steps_n // 16, 50))
    curve = profile_curve(traj)
    payload: dict = {
        "config": cfg.to_dict(),
        "trajectory": {
            "samples": len(traj.states),
            "stopped_early": traj.stopped_early,
            "stop_reason": traj.stop_reason,
            "order_ratio": float(order),
        },
    }
    chart = build_rotational_chart(curve, cfg.n)
    wc = warped_curvature_check(chart, cfg.n, chart.meta["c1"], cfg.steps())
    report.merge(wc)
    report.add(
        "profile_second_order_ode",
        profile_ode_residual_from_chart(chart, cfg.steps()),
        cfg.tol("profile_second_order_ode"),
    )
    x = chart.box.center
    jet = gauss_map(chart, x, cfg.steps())
    alpha = chart.meta["interp"].value(float(x[0]))
    prof_th, orbit_th = rotational_angles(alpha, cfg.n)
    expected = np.sort(
        np.array(
            [np.cos(prof_th) / np.sin(prof_th)]
            + [np.cos(orbit_th) / np.sin(orbit_th)] * (cfg.n - 1)
        )
    )
    report.add(
        "principal_vs_angle_pattern",
        float(np.abs(np.sort(jet.lambdas) - expected).max()),
        cfg.tol("principal_vs_angle_pattern"),
    )
    order_ok = 12.0 <= order <= 20.0
    entries = list(report.entries.values())
    all_pass = all(e.passed for e in entries) and order_ok and not traj.stopped_early
    payload["results"] = [report.to_dict()]
    payload["summary"] = {
        "total": len(entries) + 1,
        "passed": sum(e.passed for e in entries) + int(order_ok),
        "failed": sum(not e.passed for e in entries) + int(not order_ok),
        "all_pass": all_pass,
        "skipped": [],
    }
    payload["csv"] = _write_profile_csv(cfg, curve)
    return (0 if all_pass else 1), payload


def _out_dir(cfg: RunConfig) -> str:
    if cfg.out:
        return cfg.out
    return os.environ.get("QUADRICLAB_OUT_DIR", ".")


def _write_profile_csv(cfg: RunConfig, curve) -> str:
    out_dir = _out_dir(cfg)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "profile.csv")
    with open(path, "w") as fh:
        fh.write("theta,alpha,dalpha,gx,gy,gz\n")
        for row in curve.csv_rows():
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    return path


def write_report(cfg: RunConfig, payload: dict) -> str:
    out_dir = _out_dir(cfg)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{cfg.command}_{cfg.example}_report.json")
    payload = dict(payload)
    payload["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadriclab",
        description="Verify the geometry of Gauss maps into the complex hyperquadric.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("verify", "angles", "ode"):
        sp = sub.add_parser(name)
        sp.add_argument("--example", default="sphere" if name != "ode" else "rotational")
        sp.add_argument("--n", type=int, default=3)
        sp.add_argument("--r", type=float, default=None)
        sp.add_argument("--r1", type=float, default=None)
        sp.add_argument("--k", type=int, default=None)
        sp.add_argument("--t", type=float, default=None)
        sp.add_argument("--alpha0", type=float, default=None)
        sp.add_argument("--dalpha0", type=float, default=None)
        sp.add_argument("--steps", type=int, default=None)
        sp.add_argument("--span", type=float, default=None)
        sp.add_argument("--grid", type=int, default=3)
        sp.add_argument("--h", type=float, default=1e-4)
        sp.add_argument("--gauge", default="normalized")
        sp.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None)
    return parser


def _config_from_args(args) -> RunConfig:
    params = {}
    for key in ("r", "r1", "t", "alpha0", "dalpha0", "span"):
        value = getattr(args, key)
        if value is not None:
            params[key] = float(value)
    for key in ("k", "steps"):
        value = getattr(args, key)
        if value is not None:
            params[key] = int(value)
    tolerances = {}
    for item in args.tol:
        if "=" not in item:
            raise ConfigError(f"--tol expects NAME=VALUE, got '{item}'")
        name, _, value = item.partition("=")
        if name not in DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown tolerance '{name}'")
        tolerances[name] = float(value)
    return RunConfig(
        command=args.command,
        example=args.example,
        n=args.n,
        params=params,
        grid=args.grid,
        h=args.h,
        gauge=args.gauge,
        tolerances=tolerances,
        seed=args.seed,
        out=args.out,
    )


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.command == "verify":
            code, payload = cmd_verify(cfg)
        elif args.command == "angles":
            code, payload = cmd_angles(cfg)
        else:
            code, payload = cmd_ode(cfg)
    except (ConfigError, ChartError, OdeError, VerifyError, GaussMapError, NumericsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    path = write_report(cfg, payload)
    summary = payload.get("summary", {})
    status = "PASS" if code == 0 else "FAIL"
    print(f"{status}: {summary.get('passed', 0)}/{summary.get('total', 0)} checks; report at {path}")
    if args.command == "angles":
        for row in payload["results"]:
            angles = ", ".join(f"{a:.6f}" for a in row["angles"])
            print(f"  point {row['point']}: angles [{angles}] (gauge {row['gauge_phi']:.6f})")
        if "distinct_angles" in summary:
            print(f"  distinct angles mod pi: {summary['distinct_angles']}")
    return code


if __name__ == "__main__":
    sys.exit(main())
