"""Command-line driver: ``hydronozzle {solve,verify,trace,slice,farfield}``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 solver failure. Errors are reported as one JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from dataclasses import replace

import numpy as np

from . import analysis, field, geometry, kinematics, lagrange, profiles, slice_solver
from .config import RunConfig, load_config, parse_grid, parse_seeds
from .errors import ConfigError, HydroNozzleError, SignConditionViolated

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
FIELD_CSV = "field.csv"
SUMMARY_JSON = "summary.json"


# building blocks ------------------------------------------------------------

def build_source(cfg: RunConfig):
    spec = dict(cfg.profile)
    kind = str(spec.pop("kind", "quartic_bump"))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SignConditionViolated)
            if kind == "table":
                if "file" not in spec:
                    raise ConfigError("profile kind 'table' needs 'file'")
                data = np.loadtxt(str(spec["file"]), delimiter=",", ndmin=2)
                prof = profiles.build_profile((data[:, 0], data[:, 1]), name="table")
            else:
                prof = profiles.build_profile(kind, **spec)
    except (ValueError, OSError) as exc:
        if isinstance(exc, HydroNozzleError) and not isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad profile: {exc}") from exc
    return prof, profiles.vorticity_source(prof)


def build_geometry(cfg: RunConfig) -> geometry.NozzleGeometry:
    spec = dict(cfg.geometry)
    kind = str(spec.pop("kind", "bump"))
    try:
        return geometry.make_geometry(kind, cfg.cutoff, **spec)
    except ValueError as exc:
        raise ConfigError(f"bad geometry: {exc}") from exc


def solve_flow(cfg: RunConfig, method: str | None = None):
    prof, src = build_source(cfg)
    g = build_geometry(cfg)
    m = method or ("lagrange" if cfg.solver == "all" else cfg.solver)
    tol = cfg.tolerances["shooting"] if m == "shooting" else cfg.tolerances["picard"]
    sf = field.assemble(g, src, ny1=cfg.ny1, ny2=cfg.ny2, method=m, tol=tol)
    return prof, src, g, field.reconstruct(sf, g, src)


def farfield_block(src, g, flow, n: int) -> tuple[dict, tuple]:
    up = analysis.farfield_state(src, g, "upstream", n)
    down = analysis.farfield_state(src, g, "downstream", n)
    out = analysis.convergence_report(flow, up, down).as_dict()
    out["upstream_flux"] = up.flux
    out["downstream_flux"] = down.flux
    return out, (up, down)


def _dump(path: str, obj) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(field.dumps(obj))


def _write_rows(path: str, header, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join("%.17g" % v for v in row) + "\n")


# commands ---------------------------------------------------------------------

def cmd_solve(cfg: RunConfig) -> int:
    prof, src, g, flow = solve_flow(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    field.write_csv(flow, os.path.join(cfg.out_dir, FIELD_CSV))
    summary = {"config": cfg.as_dict(), "field": field.summary(flow)}
    summary["residuals"] = analysis.residuals(flow)
    summary["assumptions"] = geometry.validate_assumptions(g).clauses
    if g.family == "strip":
        summary["shear"] = analysis.liouville_check(flow, tol=cfg.tolerances["shear"]).as_dict()
    summary["farfield"], _ = farfield_block(src, g, flow, cfg.ny2)
    if cfg.solver == "all":
        dev = {}
        for m in ("picard", "shooting"):
            other = solve_flow(cfg, m)[3]
            dev[m] = float(np.max(np.abs(other.stream.phi - flow.stream.phi)))
        dev["max"] = max(dev.values())
        dev["within_tolerance"] = dev["max"] <= cfg.tolerances["deviation"]
        summary["cross_method_deviation"] = dev
        _dump(os.path.join(cfg.out_dir, "deviation.json"), dev)
    _dump(os.path.join(cfg.out_dir, SUMMARY_JSON), summary)
    print(field.dumps({"status": "ok", "out": cfg.out_dir, "c": flow.c, "gamma_bar": flow.gamma_bar}), end="")
    return EXIT_OK


def _checks_from_samples(cfg: RunConfig, data: dict, src, g) -> dict:
    """The invariant suite on exported (or freshly solved) samples."""
    tol = cfg.tolerances
    c = src.c
    phi, v1, v2, p = data["phi"], data["v1"], data["v2"], data["p"]
    res = analysis.residuals_from_samples(data)
    # second-order differences: the bound scales with the squared spacings
    h1 = float(np.max(np.diff(data["x1"][:, 0])))
    h2 = float(np.max(np.diff(data["x2"][:, :], axis=1)))
    bound = tol["residual"] * (h1 * h1 + h2 * h2)
    checks = {f"residual_{k}": res[k]["sup"] <= bound for k in analysis.RESIDUAL_NAMES}
    s = data["x2"][:, -1] - data["x2"][:, 0]
    flux = field.column_fluxes(v1, s)
    checks["flux"] = bool(np.max(np.abs(flux - c)) <= tol["flux"] * c)
    checks["monotone"] = bool(np.all(np.diff(phi, axis=1) > 0.0) and np.all(v1 > 0.0))
    checks["boundary_values"] = bool(np.all(phi[:, 0] == 0.0) and np.all(phi[:, -1] == c))
    if src.sign_condition_ok:
        checks["bounds"] = bool(np.all(phi >= 0.0) and np.all(phi <= c))
    spread = np.max(p, axis=1) - np.min(p, axis=1)
    checks["pressure_column"] = bool(np.all(spread <= 1e-10 * (1.0 + np.max(np.abs(p), axis=1))))
    details = {"residuals": res, "residual_bound": bound, "flux_rel_dev": float(np.max(np.abs(flux - c)) / c)}
    if g.family == "strip":
        rep = analysis.liouville_check(analysis.SampledField(data["x1"], data["x2"], v1, v2), tol=tol["shear"])
        checks["shear"] = rep.status == "shear"
        details["shear"] = rep.as_dict()
    up = analysis.farfield_state(src, g, "upstream", cfg.ny2)
    down = analysis.farfield_state(src, g, "downstream", cfg.ny2)
    e_up = _edge_error(data, 0, up)
    e_down = _edge_error(data, -1, down)
    checks["farfield"] = e_up <= tol["farfield"] and e_down <= tol["farfield"]
    details["farfield"] = {"upstream_err": e_up, "downstream_err": e_down}
    return {"checks": checks, "details": details}


def _edge_error(data, j, state) -> float:
    x1 = data["x1"][j, 0]
    x2 = data["x2"][j]
    lo = state.lower(x1)
    sel = (x2 >= lo + 0.1 * state.width) & (x2 <= lo + 0.9 * state.width)
    if not np.any(sel):
        return float("inf")
    return float(np.max(np.abs(data["v1"][j, sel] - state.v1_limit(x2[sel], x1))))


def _flow_samples(flow: field.FlowField) -> dict:
    return {
        "x1": flow.x1, "x2": flow.x2, "y2": np.broadcast_to(flow.y2, flow.shape),
        "phi": flow.phi, "v1": flow.v1, "v2": flow.v2, "p": flow.p, "omega": flow.omega,
    }


def verify_fixture(seed: int = 0) -> dict:
    ce = analysis.Counterexample()
    rng = np.random.default_rng(seed)
    x1 = rng.uniform(-1.0, 1.0, 100)
    x2 = rng.uniform(0.0, 1.0, 100)
    r = ce.analytic_residuals(x1, x2)
    sup = {k: float(np.max(np.abs(v))) if np.size(v) else 0.0 for k, v in r.items()}
    checks = {f"residual_{k}": sup[k] <= 1e-12 for k in analysis.RESIDUAL_NAMES}
    rep = analysis.liouville_check(ce.sample(101, 101, (0.0, 1.0)))
    return {
        "checks": checks,
        "details": {"residuals": sup, "shear": rep.as_dict(),
                    "shear_applicable": rep.status != "hypothesis_not_met"},
    }


def cmd_verify(cfg: RunConfig, inline: bool = False, fixture: str | None = None) -> int:
    if fixture is not None:
        if fixture != "counterexample":
            raise ConfigError(f"unknown fixture {fixture!r}")
        report = verify_fixture()
    else:
        path = os.path.join(cfg.out_dir, FIELD_CSV)
        prof, src = build_source(cfg)
        g = build_geometry(cfg)
        if not inline and os.path.exists(path):
            data = field.read_csv(path)
            report = _checks_from_samples(cfg, data, src, g)
            report["source"] = os.path.basename(path)
        else:
            flow = solve_flow(cfg)[3]
            report = _checks_from_samples(cfg, _flow_samples(flow), src, g)
            report["source"] = "inline"
    failing = sorted(k for k, v in report["checks"].items() if not v)
    report["failing"] = failing
    report["passed"] = not failing
    text = field.dumps(report)
    if fixture is None:
        os.makedirs(cfg.out_dir, exist_ok=True)
        with open(os.path.join(cfg.out_dir, "verify.json"), "w", newline="\n") as fh:
            fh.write(text)
    print(text, end="")
    return EXIT_OK if not failing else EXIT_VERIFY


def cmd_trace(cfg: RunConfig, seeds) -> int:
    seeds = tuple(seeds) or cfg.seeds
    if not seeds:
        raise ConfigError("no trace seeds given")
    flow = solve_flow(cfg)[3]
    fi = kinematics.FlowInterpolant(flow)
    os.makedirs(cfg.out_dir, exist_ok=True)
    entries = []
    for k, seed in enumerate(seeds):
        entry = {"seed": list(seed)}
        try:
            tr = kinematics.trace_streamline(fi, seed, t_max=1e4, h=cfg.trace_step)
        except HydroNozzleError as exc:
            entry.update(ok=False, error=type(exc).__name__, message=str(exc))
        else:
            name = f"trace_{k:03d}.csv"
            _write_rows(os.path.join(cfg.out_dir, name), ("t", "x1", "x2", "phi", "omega"),
                        zip(tr.t, tr.x1, tr.x2, tr.phi_along, tr.omega_along))
            entry.update(ok=True, file=name, stop_reason=tr.stop_reason, steps=len(tr.t),
                         phi_drift=tr.phi_drift, omega_drift=tr.omega_drift)
        entries.append(entry)
    summary = {"traces": entries, "succeeded": sum(e["ok"] for e in entries)}
    _dump(os.path.join(cfg.out_dir, "trace_summary.json"), summary)
    print(field.dumps(summary), end="")
    return EXIT_OK if summary["succeeded"] >= 1 else EXIT_VERIFY


def cmd_slice(cfg: RunConfig, alpha1: float) -> int:
    if not alpha1 > 0.0:
        raise ConfigError("alpha1 must be positive")
    _, src = build_source(cfg)
    n = cfg.ny2
    L = lagrange.build_lagrange_slice(alpha1, src, n=n, tol=cfg.tolerances["beta"])
    sols = {"lagrange": lagrange.invert_to_slice(L, float("nan"), n)}
    if cfg.solver in ("picard", "all"):
        sols["picard"] = slice_solver.picard_solve(alpha1, src, n=n, tol=cfg.tolerances["picard"])
    if cfg.solver in ("shooting", "all"):
        sols["shooting"] = slice_solver.shooting_solve(alpha1, src, n=n, tol=cfg.tolerances["shooting"])
    main = sols["lagrange"] if cfg.solver in ("lagrange", "all") else sols[cfg.solver]
    os.makedirs(cfg.out_dir, exist_ok=True)
    _write_rows(os.path.join(cfg.out_dir, "slice.csv"), ("y2", "phi", "dphi", "d2phi"),
                zip(main.grid, main.phi, main.dphi, main.d2phi))
    rep = slice_solver.check_slice(main, src)
    out = {
        "alpha1": alpha1, "beta": L.beta, "dbeta_dalpha1": L.dbeta_dalpha1, "c": src.c,
        "method": main.method, "gamma": rep.gamma, "checks": rep.checks,
    }
    if len(sols) > 1:
        out["deviation"] = {k: float(np.max(np.abs(s.phi - sols["lagrange"].phi)))
                            for k, s in sols.items() if k != "lagrange"}
    _dump(os.path.join(cfg.out_dir, "slice.json"), out)
    print(field.dumps(out), end="")
    return EXIT_OK


def cmd_farfield(cfg: RunConfig) -> int:
    _, src = build_source(cfg)
    g = build_geometry(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    out = {}
    for side in ("upstream", "downstream"):
        st = analysis.farfield_state(src, g, side, cfg.ny2)
        lo, hi = st.interval
        x2 = np.linspace(lo, hi, cfg.ny2 + 1)
        _write_rows(os.path.join(cfg.out_dir, f"{side}.csv"), ("x2", "v1", "v2", "phi"),
                    zip(x2, st.v1_limit(x2), st.v2_limit(x2), st.phi_limit(x2)))
        out[side] = {"alpha1": st.alpha1, "interval": list(st.interval), "slope": st.slope,
                     "flux": st.flux, "flux_rel_dev": abs(st.flux - src.c) / src.c}
    _dump(os.path.join(cfg.out_dir, "farfield.json"), out)
    print(field.dumps(out), end="")
    return EXIT_OK


# argument handling ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run configuration")
    common.add_argument("--out", help="output directory (overrides [output] dir)")
    common.add_argument("--solver", choices=("lagrange", "picard", "shooting", "all"))
    common.add_argument("--grid", help="NY1xNY2, e.g. 200x400")
    common.add_argument("--cutoff", type=float, help="domain half-length X")

    ap = argparse.ArgumentParser(prog="hydronozzle", description="Hydrostatic Euler nozzle-flow solver suite.")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="assemble and reconstruct the flow")
    v = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    v.add_argument("--inline", action="store_true", help="solve instead of reading prior artifacts")
    v.add_argument("--fixture", help="verify an analytic fixture instead (counterexample)")
    t = sub.add_parser("trace", parents=[common], help="trace streamlines from seeds")
    t.add_argument("--seed", action="append", default=[], help="x1,x2 (repeatable)")
    s = sub.add_parser("slice", parents=[common], help="solve one slice")
    s.add_argument("--alpha", type=float, default=1.0, help="alpha1 = s^2 of the slice")
    sub.add_parser("farfield", parents=[common], help="upstream/downstream limit states")
    return ap


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.out:
        cfg = replace(cfg, out_dir=args.out)
    if args.solver:
        cfg = replace(cfg, solver=args.solver)
    if args.grid:
        ny1, ny2 = parse_grid(args.grid)
        cfg = replace(cfg, ny1=ny1, ny2=ny2)
    if args.cutoff is not None:
        cfg = replace(cfg, cutoff=args.cutoff)
    return cfg.validate()


def _fail(code: int, exc: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit": code},
                                sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, inline=args.inline, fixture=args.fixture)
        if args.command == "trace":
            seeds = [s for raw in args.seed for s in parse_seeds(raw)]
            return cmd_trace(cfg, seeds)
        if args.command == "slice":
            return cmd_slice(cfg, args.alpha)
        return cmd_farfield(cfg)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    except HydroNozzleError as exc:
        return _fail(EXIT_SOLVER, exc)


if __name__ == "__main__":
    sys.exit(main())
