"""Command line entry point: ``analyze``, ``simulate``, ``compare`` and ``verify``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import subspace as ss
from .algorithms import plan_schedule
from .bench import ConfigError, ExperimentConfig, emit_curves, run_comparison, run_single, select_engine
from .invariants import verify_invariants

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG = 0, 1, 2

_FLAG_FIELDS = {
    "n": "n_total",
    "a_only": "count_a_only",
    "b_only": "count_b_only",
    "common": "count_common",
    "seed": "seed",
    "algorithms": "algorithms",
    "out": "output_path",
    "engine": "engine",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields")
    common.add_argument("--n", type=int, help="number of items N")
    common.add_argument("--a-only", type=int, help="items in A but not B")
    common.add_argument("--b-only", type=int, help="items in B but not A")
    common.add_argument("--common", type=int, help="items in both sets")
    common.add_argument("--seed", type=int)
    common.add_argument("--algorithms", help="comma-separated subset of algorithm1,algorithm2,variant,grover_reference")
    common.add_argument("--out", help="output directory for CSV files")
    common.add_argument("--engine", choices=("auto", "statevector", "subspace"))
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="artifact", description="Two-oracle intersection search: model, simulation, benchmarks.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="4D model only: eigenphases and overlap curve")
    sub.add_parser("simulate", parents=[common], help="run one algorithm and write its trace")
    sub.add_parser("compare", parents=[common], help="run all algorithms, write curves and summary")
    v = sub.add_parser("verify", parents=[common], help="run the invariant battery")
    v.add_argument("--random-profiles", type=int, default=1000)
    return p


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {field: getattr(args, flag) for flag, field in _FLAG_FIELDS.items() if getattr(args, flag) is not None}
    if args.config is not None:
        return ExperimentConfig.from_json(args.config, **overrides)
    return ExperimentConfig.from_dict(overrides)


def _analyze(cfg: ExperimentConfig) -> int:
    profile = cfg.profile()
    amps = ss.amplitudes_from_profile(profile)
    sys_ = ss.analyze(amps)
    _, tp, tm = ss.eigenphases_closed_form(amps)
    info = {
        "amplitudes": {"alpha": amps.alpha, "beta": amps.beta, "gamma": amps.gamma, "delta": amps.delta},
        "theta_plus": sys_.theta_plus,
        "theta_minus": sys_.theta_minus,
        "theta_plus_closed_form": tp,
        "theta_minus_closed_form": tm,
        "degenerate": sys_.degenerate,
        "V": ss.build_search_operator(amps).to_row_major(),
    }
    if not sys_.degenerate:
        info.update(g=sys_.g, h=sys_.h, x=sys_.x, y=sys_.y)
    info["sigma"] = [sys_.sigma.real, sys_.sigma.imag]
    info["kappa"] = [sys_.kappa.real, sys_.kappa.imag]
    if profile.count_common:
        iters, queries = ss.optimal_iteration_count(amps)
        info.update(planned_iterations=iters, planned_queries=queries)
        if amps.gamma <= 0.05:
            info["theta_plus_asymptotic"] = ss.asymptotic_eigenphase(amps)
        model_cfg = ExperimentConfig(**{**cfg.__dict__, "engine": "subspace"})
        trace = run_single(model_cfg, "variant")
        out = Path(cfg.output_path)
        out.mkdir(parents=True, exist_ok=True)
        info["curve"] = str(emit_curves(trace, out / "variant_model_curve.csv"))
    print(json.dumps(info, indent=2))
    return EXIT_OK


def _simulate(cfg: ExperimentConfig) -> int:
    name = cfg.algorithms[0]
    trace = run_single(cfg, name)
    out = Path(cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    path = emit_curves(trace, out / f"{name}_curve.csv")
    reached = trace.queries_to_reach(cfg.success_threshold)
    print(f"{name} [{select_engine(cfg)}]: planned {trace.planned_queries} queries "
          f"(q_opt {trace.q_opt_reference:.2f}), reached {cfg.success_threshold} at {reached}; curve -> {path}")
    return EXIT_OK


def _compare(cfg: ExperimentConfig) -> int:
    rows = run_comparison(cfg)
    print(f"{'algorithm':<18}{'planned':>9}{'to_90pct':>10}{'ratio':>9}  status")
    for r in rows:
        ratio = "" if r.ratio_to_qopt is None else f"{r.ratio_to_qopt:.4f}"
        print(f"{r.algorithm:<18}{r.queries_planned or '':>9}{r.queries_to_90pct or '':>10}{ratio:>9}  {r.status}")
    print(f"summary -> {Path(cfg.output_path) / 'summary.csv'}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args)
    except (ConfigError, TypeError) as e:
        print(f"invalid configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "analyze":
        return _analyze(cfg)
    if args.command == "simulate":
        return _simulate(cfg)
    if args.command == "compare":
        return _compare(cfg)
    report = verify_invariants(cfg, n_random=args.random_profiles)
    print(report)
    print("all invariants hold" if report.ok else f"{len(report.failures)} invariant(s) FAILED")
    return EXIT_OK if report.ok else EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
