"""Command-line front end.

Exit codes: 0 success, 1 runtime failure, 2 configuration error,
3 invariant violation found by a check.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time

import numpy as np

from . import __version__
from .config import build_config, config_hash, load_config
from .errors import ConfigError, InvariantViolationError, ParameterError, PointVortexError
from .serialize import read_json, write_json, write_jsonl, trajectory_records

log = logging.getLogger("pointvortex")

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG, EXIT_INVARIANT = 0, 1, 2, 3


class CorruptedRobin:
    """Kernel wrapper that shifts the Robin function by a constant (test hook)."""

    def __init__(self, base, shift=1.0):
        self.base = base
        self.shift = shift

    def __getattr__(self, name):
        return getattr(self.base, name)

    def robin(self, x):
        return self.base.robin(x) + self.shift

    def gamma(self, x, y):
        return self.base.gamma(x, y) + self.shift


def _meta(cfg, command, t0, termination, seed=None):
    return {
        "version": __version__,
        "command": command,
        "config_hash": config_hash(cfg.raw),
        "config": cfg.raw,
        "seed": cfg.seed if seed is None else seed,
        "wall_time": time.perf_counter() - t0,
        "termination": termination,
    }


def _outdir(args, cfg):
    out = args.out or cfg.output_dir
    os.makedirs(out, exist_ok=True)
    return out


def cmd_simulate(args, cfg):
    from .dynamics import integrate
    from .regularization import tau_eps

    t0 = time.perf_counter()
    X = cfg.vortices
    if X is None:
        raise ConfigError("vortices", "simulate needs explicit vortex positions and masses")
    horizon = cfg.horizon if args.horizon is None else args.horizon
    reg = dict(cfg.regularization)
    if args.regularized:
        reg["enabled"] = True
    if args.epsilon is not None:
        reg["epsilon"] = args.epsilon
    if args.eta is not None:
        reg["eta"] = args.eta
    extra = {}
    code = EXIT_OK
    if reg["enabled"]:
        eps, eta = reg["epsilon"], reg["eta"]
        if cfg.domain.bounded and eps * cfg.domain.diameter >= 1.0:
            raise ConfigError("regularization.epsilon", "epsilon * diameter must be < 1")
        res = tau_eps(cfg.domain, X, eps, horizon, cfg.integrator, eta=eta)
        traj = res.trajectory
        bound = 0.5 * eps ** (-eta / (8 * np.pi))
        phi_tau = float(traj.extra["phi"][-1])
        extra = {
            "regularized": {"epsilon": eps, "eta": eta},
            "tau_eps": res.tau,
            "condition": res.condition,
            "condition_name": res.condition_name,
            "phi_at_tau": phi_tau,
            "phi_lower_bound": bound,
        }
        if res.condition is not None:
            ok = phi_tau >= bound * (1 - 1e-6)
            extra["phi_bound_holds"] = ok
            if not ok:
                code = EXIT_INVARIANT
    else:
        traj = integrate(cfg.domain, X, horizon, cfg.integrator)
    out = _outdir(args, cfg)
    write_jsonl(os.path.join(out, "trajectory.jsonl"), trajectory_records(traj))
    summary = _meta(cfg, "simulate", t0, traj.termination.to_dict())
    summary.update(
        {
            "horizon": horizon,
            "N": X.N,
            "steps": len(traj.times) - 1,
            "max_abs_energy_drift": traj.max_energy_drift(relative=False),
            "max_relative_energy_drift": traj.max_energy_drift(),
            "final_min_separation": float(traj.min_separation_series[-1]),
            **extra,
        }
    )
    write_json(os.path.join(out, "summary.json"), summary)
    print(f"{traj.termination.kind} at t={traj.termination.time:.6g}; wrote {out}/trajectory.jsonl")
    return code


def cmd_ensemble(args, cfg):
    from .measure import ensemble_statistics

    t0 = time.perf_counter()
    e = dict(cfg.ensemble)
    for key in ("count", "horizon", "workers"):
        if getattr(args, key) is not None:
            e[key] = getattr(args, key)
    seed = cfg.seed if args.seed is None else args.seed
    kw = {"max_steps": e["max_steps"]} if "max_steps" in e else {}
    rep = ensemble_statistics(
        cfg.domain, e["N"], e["masses"], e["count"], e["horizon"], e["delta_grid"], seed,
        circulations=e.get("circulations"), workers=e.get("workers"), **kw,
    )
    out = _outdir(args, cfg)
    doc = {**_meta(cfg, "ensemble", t0, rep.status_counts, seed), "report": rep.to_dict()}
    write_json(os.path.join(out, "ensemble.json"), doc)
    for d, (f, lo, hi) in rep.collapse_fraction.items():
        print(f"delta={d:<8g} fraction={f:.5f}  [{lo:.5f}, {hi:.5f}]")
    return EXIT_OK


def cmd_verify_greens(args, cfg):
    from .measure import verify_greens

    t0 = time.perf_counter()
    rep = verify_greens(cfg.domain, seed=cfg.seed)
    out = _outdir(args, cfg)
    term = "passed" if rep.passed else "invariant_violation"
    write_json(os.path.join(out, "greens.json"), {**_meta(cfg, "verify-greens", t0, term), "report": rep.to_dict()})
    for name, c in rep.checks.items():
        print(f"{'PASS' if c['passed'] else 'FAIL'} {name}: {c['max_error']:.3e} (tol {c['tol']:.0e})")
    return EXIT_OK if rep.passed else EXIT_INVARIANT


def cmd_verify_inequalities(args, cfg):
    from .measure import verify_inequality_suite

    t0 = time.perf_counter()
    q = dict(cfg.inequalities)
    if args.kappa is not None:
        q["kappa"] = args.kappa
    try:
        rep = verify_inequality_suite(
            cfg.domain, q["kappa"], q["levels"], q["epsilon_grid"], cfg.seed,
            N=q["N"], eta=q["eta"], phi_samples=q["phi_samples"],
        )
    except ParameterError as exc:
        raise ConfigError("inequalities.kappa", str(exc)) from exc
    out = _outdir(args, cfg)
    write_json(os.path.join(out, "inequalities.json"), {**_meta(cfg, "verify-inequalities", t0, rep.verdict), "report": rep.to_dict()})
    for name, v in rep.estimates.items():
        print(f"{name:28s} " + " ".join(f"{x:.6g}" for x in v))
    print(f"verdict: {rep.verdict}")
    return EXIT_OK


def cmd_verify_bounds(args, cfg):
    from .measure import verify_pointwise_bounds

    t0 = time.perf_counter()
    kernels = CorruptedRobin(cfg.domain.kernels) if args.fault_inject else None
    out = _outdir(args, cfg)
    try:
        rep = verify_pointwise_bounds(cfg.domain, cfg.bounds["sample_count"], cfg.seed, kernels=kernels)
        code, term = EXIT_OK, "passed"
    except InvariantViolationError as exc:
        rep, code, term = exc.report, EXIT_INVARIANT, "invariant_violation"
        print(f"invariant violation: {exc}", file=sys.stderr)
    write_json(os.path.join(out, "bounds.json"), {**_meta(cfg, "verify-bounds", t0, term), "report": rep.to_dict()})
    print(f"lower-bound violations: {rep.lower_bound_violations}; gap max {rep.gap_max:.6g}; "
          f"|grad robin| d max {rep.gradient_distance_max:.6g}")
    return code


def cmd_report(args, cfg):
    from .plotting import render_all

    src = args.input or (cfg.output_dir if cfg else "out")
    domain = cfg.domain if cfg else None
    if domain is None and os.path.exists(os.path.join(src, "summary.json")):
        domain = build_config(read_json(os.path.join(src, "summary.json"))["config"]).domain
    files = render_all(src, domain)
    for f in files:
        print(f)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="pointvortex", description="Point-vortex dynamics in planar domains.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_, needs_config=True):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", "-c", required=needs_config, help="JSON run configuration")
        s.add_argument("--out", "-o", help="output directory (overrides output.dir)")
        return s

    s = add("simulate", "integrate one configuration and write a JSON-lines trajectory")
    s.add_argument("--horizon", type=float)
    s.add_argument("--regularized", action="store_true", help="use the cutoff kernels and stop at the first threshold")
    s.add_argument("--epsilon", type=float)
    s.add_argument("--eta", type=float)
    s.set_defaults(func=cmd_simulate)

    s = add("ensemble", "near-collapse statistics of uniformly sampled initial data")
    s.add_argument("--count", type=int)
    s.add_argument("--horizon", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int, help="worker processes (default: $POINTVORTEX_WORKERS or 1)")
    s.set_defaults(func=cmd_ensemble)

    s = add("verify-greens", "check Green-function invariants")
    s.set_defaults(func=cmd_verify_greens)

    s = add("verify-inequalities", "estimate the singular double integrals")
    s.add_argument("--kappa", type=float)
    s.set_defaults(func=cmd_verify_inequalities)

    s = add("verify-bounds", "check the pointwise Robin-function bounds")
    s.add_argument("--fault-inject", action="store_true", help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_verify_bounds)

    s = add("report", "render figures and CSV tables from an output directory", needs_config=False)
    s.add_argument("--input", "-i", help="directory holding command outputs")
    s.set_defaults(func=cmd_report)
    return p


def run_cli(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config) if args.config else None
        with np.errstate(all="ignore"):
            return args.func(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolationError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except PointVortexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
