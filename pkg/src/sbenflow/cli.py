"""Batch command-line entry point.

Subcommands:
  check      run the structural invariant suite, print a pass/fail table
  reference  run the configured case's reference solver, write a path archive
  evaluate   evaluate the functional on an existing archive (read only)
  minimize   descend the functional, write the minimized archive and report

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 invariant failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import checks
from .balance import IncompressibleEos
from .config import ConfigError, RunConfig, load_config
from .fieldio import ArchiveError, load_path_archive, save_path_archive, save_scalar
from .oracle import CaseSpec, UnstableStepError, reference_path
from .sben import (SbenReport, assemble_pi_compressible, assemble_pi_incompressible,
                   minimize, minimize_compressible, multiplier_pressures)
from .solvers import SolverConvergenceError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_INVARIANT = 4


def _load(args) -> RunConfig:
    config = load_config(args.config)
    if args.seed is not None:
        config = RunConfig(**{**config.__dict__, "seed": args.seed})
    return config


def _write_report(out_dir: str, report: SbenReport):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.txt"), "w") as f:
        f.write(report.summary_text())
    table = {
        "total_pi": report.total_pi,
        "dissipation_integral": report.dissipation_integral,
        "phi": report.phi_terms.tolist(),
        "phi_star": report.phi_star_terms.tolist(),
        "pairing": report.pairing_terms.tolist(),
        "gap": report.gap_terms.tolist(),
        "ns_residual": report.ns_residual_norms.tolist(),
        "discarded_mean": report.discarded_mean_norms.tolist(),
        "iterations": report.iterations,
        "grad_norm_history": report.grad_norm_history,
        "wall_time": report.wall_time,
    }
    with open(os.path.join(out_dir, "report.json"), "w") as f:
        json.dump(table, f, indent=1)
        f.write("\n")


def cmd_check(args) -> int:
    config = _load(args)
    results = checks.run_all(config)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} invariant(s) failed: " + ", ".join(r.name for r in failed))
        return EXIT_INVARIANT
    print(f"all {len(results)} invariants hold")
    return EXIT_OK


def cmd_reference(args) -> int:
    config = _load(args)
    case = CaseSpec(config.case.case_id, config.grid, config.time.t_final,
                    config.time.n_ref, config.case.params)
    path = reference_path(case, config.viscosity.mu, config.gravitation,
                          n_out=config.time.n_intervals)
    save_path_archive(args.out, path)
    print(f"reference path with {path.n_intervals} intervals written to {args.out}")
    return EXIT_OK


def _assemble(config: RunConfig, path):
    if path.kind == "incompressible":
        return assemble_pi_incompressible(path, config.viscosity.mu,
                                          config.gravitation, config.conjugate)
    return assemble_pi_compressible(path, config.viscosity.mu,
                                    config.gravitation, config.conjugate)


def cmd_evaluate(args) -> int:
    config = _load(args)
    path = load_path_archive(args.archive, expect_grid=config.grid)
    report = _assemble(config, path)
    _write_report(args.out, report)
    if path.kind == "incompressible":
        pressures = multiplier_pressures(path, config.viscosity.mu,
                                         config.gravitation, config.conjugate)
        os.makedirs(args.out, exist_ok=True)
        for k, p in enumerate(pressures):
            save_scalar(os.path.join(args.out, f"pressure_{k:04d}.csv"), p)
    print(f"total functional {report.total_pi:.12e} "
          f"(dissipation integral {report.dissipation_integral:.6e})")
    return EXIT_OK


def cmd_minimize(args) -> int:
    config = _load(args)
    if args.warm_start:
        start = load_path_archive(args.warm_start, expect_grid=config.grid)
    else:
        # replicate the pinned initial state across all slices
        from .oracle import initial_state
        from .balance import FluidState
        from .sben import Path, leray_project
        case = CaseSpec(config.case.case_id, config.grid, config.time.t_final,
                        config.time.n_ref, config.case.params)
        s0 = initial_state(case)
        if isinstance(s0.eos, IncompressibleEos):
            v0, _ = leray_project(s0.v)
            s0 = FluidState(0.0, v0, s0.rho, s0.eos)
        dt = config.time.t_final / config.time.n_intervals
        states = [FluidState(k * dt, s0.v, s0.rho, s0.eos)
                  for k in range(config.time.n_intervals + 1)]
        start = Path(states)

    if start.kind == "incompressible":
        result = minimize(start, config.viscosity.mu, config.gravitation,
                          config.conjugate, config.minimizer)
    else:
        result = minimize_compressible(start, config.viscosity.mu, config.gravitation,
                                       config.conjugate, config.minimizer)
    save_path_archive(args.out, result.path)
    _write_report(args.out, result.report)
    print(f"{result.message}; functional {result.report.total_pi:.12e} "
          f"after {result.report.iterations} iterations")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sbenflow",
        description="evaluate and minimize the space-time functional of viscous flow")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="run the invariant suite")
    p_check.add_argument("--config", required=True)

    p_ref = sub.add_parser("reference", help="generate a reference path archive")
    p_ref.add_argument("--config", required=True)
    p_ref.add_argument("--out", required=True)

    p_eval = sub.add_parser("evaluate", help="evaluate the functional on an archive")
    p_eval.add_argument("--config", required=True)
    p_eval.add_argument("--archive", required=True)
    p_eval.add_argument("--out", required=True)

    p_min = sub.add_parser("minimize", help="minimize the functional")
    p_min.add_argument("--config", required=True)
    p_min.add_argument("--out", required=True)
    p_min.add_argument("--warm-start", default=None,
                       help="path archive to start from (default: replicated initial state)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"check": cmd_check, "reference": cmd_reference,
                "evaluate": cmd_evaluate, "minimize": cmd_minimize}
    try:
        return handlers[args.command](args)
    except (ConfigError, ArchiveError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverConvergenceError, UnstableStepError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
