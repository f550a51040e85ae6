#!/usr/bin/env python3

# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Command line front end.

.. include:: ../docs/CLI_USAGE.md
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from typing import TYPE_CHECKING, Any, NoReturn

import coloredlogs
import numpy as np
from blessings import Terminal

from . import about
from ._common import get_logging_level
from .config import RunConfig, Scheme, VerifyConfig, load_json
from .dynamics import (
    ObservableRecord,
    conservation_report,
    final_hermiticity,
    propagate,
    sample_times,
)
from .errors import ExitCode, InstabilityError, QCBracketError
from .file_utils import ensure_directory, resolve_output_dir, settings_path
from .identities import IDENTITY_NAMES, run_identities
from .oscillator import TIME_SCALE, exact_flow, initial_energy, time_series
from .output import write_csv, write_json, write_observables, write_snapshots
from .settings import Settings

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

    from .identities import IdentityResult

logger = logging.getLogger(__name__)

term = Terminal()

# ruff: noqa: T201

EFFECTIVE_CONFIG = "effective_config.json"
"""Name of the configuration echo written to every output directory."""


@dataclasses.dataclass
class SchemeRun:
    """
    Result of running one scheme.
    """

    scheme: Scheme
    """The scheme that ran."""
    records: list[ObservableRecord]
    """Observables at every step."""
    summary: dict[str, Any]
    """Conservation figures and the final observables."""
    snapshots: list[tuple[int, float, Any]] = dataclasses.field(default_factory=list)
    """(step, time, state) snapshots of propagated schemes."""


def _status(passed: bool) -> str:  # noqa: FBT001
    if passed:
        return term.bright_green + "PASS" + term.normal
    return term.bright_red + "FAIL" + term.normal


def _load_document(path: str | None) -> dict[str, Any]:
    return load_json(path) if path else {}


def _settings() -> Settings:
    return Settings(settings_path(create=False))


def _output_dir(args: argparse.Namespace, config_value: str | None, settings: Settings) -> Path:
    return ensure_directory(resolve_output_dir(args.out, config_value, settings.output_dir))


def _run_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_json_dict(_load_document(args.config))
    overrides: dict[str, Any] = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "scheme", None):
        overrides["scheme"] = Scheme(args.scheme)
    if getattr(args, "schemes", None):
        overrides["schemes"] = tuple(Scheme(s) for s in args.schemes)
    return dataclasses.replace(cfg, **overrides)


def _analytic_run(cfg: RunConfig) -> SchemeRun:
    """
    The analytic mixing map sampled at the run's Hamilton times.

    Rows carry the conserved initial energy, the transition probabilities
    as populations and the classical point as the mean phase point.
    """
    energy = initial_energy(cfg.oscillator, cfg.h)
    taus = list(sample_times(cfg.dt, cfg.n_steps))
    rows = time_series(cfg.oscillator, (tau / TIME_SCALE for tau in taus))
    records = [
        ObservableRecord(
            tau, float(sum(row[3:])), energy, tuple(row[3:]), row[1], row[2], 0.0, 0.0
        )
        for tau, row in zip(taus, rows)
    ]
    return SchemeRun(
        Scheme.OSCILLATOR_ANALYTIC,
        records,
        {"final": dataclasses.asdict(records[-1]), "trace_drift": 0.0, "energy_drift": 0.0},
    )


def _flow_error(cfg: RunConfig, records: Sequence[ObservableRecord]) -> float:
    """Largest distance of the mean classical point from Hamilton's flow."""
    z0 = complex(*cfg.classical_point())
    worst = 0.0
    for record in records:
        _centroid, expected = exact_flow(cfg.oscillator.alpha, record.t / TIME_SCALE, 0j, z0)
        worst = max(worst, abs(complex(record.mean_k, record.mean_x) - expected))
    return worst


def run_scheme(cfg: RunConfig, scheme: Scheme) -> SchemeRun:
    """
    Run one scheme of a configuration.

    Raises
    ------
    InstabilityError
        If a propagated state stops being finite.
    ConfigError
        If the configuration does not fit the scheme.
    """
    if scheme == Scheme.OSCILLATOR_ANALYTIC:
        return _analytic_run(cfg)
    series = propagate(
        cfg.initial(scheme),
        cfg.build_hamiltonian(),
        cfg.h,
        cfg.dt,
        cfg.n_steps,
        snapshot_stride=cfg.snapshot_stride,
    )
    summary: dict[str, Any] = conservation_report(series, final_hermiticity(series.final))
    summary["final"] = dataclasses.asdict(series.records[-1])
    if cfg.hamiltonian["type"] == "oscillator" and cfg.initial_state.amplitudes is None:
        summary["classical_flow_error"] = _flow_error(cfg, series.records)
    return SchemeRun(scheme, series.records, summary, series.snapshots)


def compare_runs(first: SchemeRun, second: SchemeRun) -> dict[str, dict[str, float]]:
    """
    Absolute differences of every observable both runs report.

    Populations are compared over the states both runs share. Each entry
    holds the largest difference over time and the difference at the end.
    """
    steps = min(len(first.records), len(second.records))
    shared = min(len(first.records[0].populations), len(second.records[0].populations))
    columns = ["trace", "energy", *(f"pop_{i}" for i in range(shared)), "mean_k", "mean_x"]

    def values(run: SchemeRun, name: str) -> np.ndarray:
        if name.startswith("pop_"):
            index = int(name[4:])
            return np.array([r.populations[index] for r in run.records[:steps]])
        return np.array([getattr(r, name) for r in run.records[:steps]])

    metrics = {}
    for name in columns:
        diff = np.abs(values(first, name) - values(second, name))
        metrics[name] = {"max_abs_diff": float(np.max(diff)), "final_abs_diff": float(diff[-1])}
    return metrics


def _write_run(out_dir: Path, run: SchemeRun, prefix: str, digits: int) -> None:
    write_observables(out_dir / f"{prefix}_observables.csv", run.records, digits)
    write_snapshots(out_dir, prefix, run.snapshots)


def _print_summary(run: SchemeRun) -> None:
    print(term.bold + f"Scheme: {run.scheme.value}" + term.normal)
    for key in ("trace_drift", "energy_drift", "relative_energy_drift", "hermiticity",
                "classical_flow_error"):
        if key in run.summary:
            print(f"  {key:<24}{run.summary[key]:.3e}")


def cmd_verify(args: argparse.Namespace) -> ExitCode:
    """
    Run the identity suite and report every residual.
    """
    settings = _settings()
    document = {"trials": settings.verify_trials, "seed": settings.verify_seed}
    document.update(_load_document(args.config))
    cfg = VerifyConfig.from_json_dict(
        document, seed=args.seed, trials=args.trials, identities=args.identity
    )
    out_dir = _output_dir(args, None, settings)
    write_json(out_dir / EFFECTIVE_CONFIG, cfg.to_json_dict())
    results = run_identities(
        cfg.seed,
        cfg.trials,
        names=cfg.identities,
        h_values=cfg.h_sweep,
        composition_trials=cfg.composition_trials,
        n_points=cfg.composition_points,
        max_degree=cfg.max_degree,
    )
    passed = all(result.passed for result in results)
    write_json(out_dir / "verify_report.json", _verify_report(cfg, results, passed=passed))
    if not args.quiet:
        _print_verify_table(results)
    return ExitCode.SUCCESS if passed else ExitCode.IDENTITY_FAILURE


def _verify_report(
    cfg: VerifyConfig, results: Sequence[IdentityResult], *, passed: bool
) -> dict[str, Any]:
    return {
        "seed": cfg.seed,
        "trials": cfg.trials,
        "passed": passed,
        "results": [{**dataclasses.asdict(r), "passed": r.passed} for r in results],
    }


def _print_verify_table(results: Sequence[IdentityResult]) -> None:
    print(term.bold + f"{'Identity':<18}{'Residual':>14}{'Tolerance':>14}" + term.normal)
    for result in results:
        print(
            f"{result.name:<18}{result.residual:>14.3e}{result.tolerance:>14.3e}  "
            + _status(result.passed)
        )


def cmd_simulate(args: argparse.Namespace) -> ExitCode:
    """
    Propagate the configured scheme and write its observables.
    """
    cfg = _run_config(args)
    settings = _settings()
    out_dir = _output_dir(args, cfg.output_dir, settings)
    write_json(out_dir / EFFECTIVE_CONFIG, cfg.to_json_dict())
    run = run_scheme(cfg, cfg.scheme)
    _write_run(out_dir, run, cfg.scheme.value, settings.csv_digits)
    write_json(out_dir / "summary.json", {"scheme": cfg.scheme.value, **run.summary})
    if not args.quiet:
        _print_summary(run)
    return ExitCode.SUCCESS


def cmd_oscillator(args: argparse.Namespace) -> ExitCode:
    """
    Write the analytic oscillator series in analytic time.

    ``oscillator_series.csv`` has columns t, re_z, im_z and P(n → k) for
    k = 0 … n; ``oscillator_analytic_observables.csv`` has the same data in
    the observables layout on Hamilton time.
    """
    cfg = dataclasses.replace(_run_config(args), scheme=Scheme.OSCILLATOR_ANALYTIC)
    settings = _settings()
    out_dir = _output_dir(args, cfg.output_dir, settings)
    write_json(out_dir / EFFECTIVE_CONFIG, cfg.to_json_dict())
    times = [tau / TIME_SCALE for tau in sample_times(cfg.dt, cfg.n_steps)]
    header = ["t", "re_z", "im_z", *(f"p_{k}" for k in range(cfg.oscillator.n_quantum + 1))]
    write_csv(
        out_dir / "oscillator_series.csv",
        header,
        time_series(cfg.oscillator, times),
        settings.csv_digits,
    )
    run = _analytic_run(cfg)
    _write_run(out_dir, run, cfg.scheme.value, settings.csv_digits)
    if not args.quiet:
        _print_summary(run)
    return ExitCode.SUCCESS


def cmd_compare(args: argparse.Namespace) -> ExitCode:
    """
    Run two schemes on one configuration and report their differences.
    """
    cfg = _run_config(args)
    settings = _settings()
    out_dir = _output_dir(args, cfg.output_dir, settings)
    write_json(out_dir / EFFECTIVE_CONFIG, cfg.to_json_dict())
    first, second = cfg.schemes
    prefixes = (
        (first.value, second.value)
        if first != second
        else (f"{first.value}_1", f"{second.value}_2")
    )
    runs = [run_scheme(cfg, scheme) for scheme in cfg.schemes]
    for run, prefix in zip(runs, prefixes):
        _write_run(out_dir, run, prefix, settings.csv_digits)
    metrics = compare_runs(*runs)
    write_json(
        out_dir / "compare.json",
        {"schemes": list(prefixes), "metrics": metrics, "summaries": [r.summary for r in runs]},
    )
    if not args.quiet:
        for name, values in metrics.items():
            print(f"{name:<12}{values['max_abs_diff']:>14.3e}{values['final_abs_diff']:>14.3e}")
    return ExitCode.SUCCESS


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    options = common.add_argument_group("Run Options")
    options.add_argument(
        "-c", "--config", metavar="PATH",
        help="JSON configuration document"
    )
    options.add_argument(
        "-o", "--out", metavar="DIR",
        help="output directory (overrides the environment and the configuration)"
    )
    options.add_argument(
        "-s", "--seed", type=int, metavar="N",
        help="random seed, recorded in the output"
    )
    options.add_argument(
        "-q", "--quiet", action="store_true",
        help="only print warnings and errors"
    )
    options.add_argument(
        "-V", "--verbose", action="count", dest="verbose", default=0,
        help="give more output"
    )
    return common


def _add_commands(parser: argparse.ArgumentParser) -> None:
    common = _common_parser()
    commands = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    verify = commands.add_parser(
        "verify", parents=[common], help="check the bracket identities on random symbols"
    )
    verify.add_argument(
        "-i", "--identity", action="append", choices=IDENTITY_NAMES,
        help="identity to check; repeat for several (default: all)"
    )
    verify.add_argument(
        "-n", "--trials", type=int, metavar="N",
        help="random instances per identity"
    )
    verify.set_defaults(func=cmd_verify)
    simulate = commands.add_parser(
        "simulate", parents=[common], help="propagate a mixed quantum-classical state"
    )
    simulate.add_argument(
        "--scheme", choices=[s.value for s in Scheme],
        help="propagation scheme (overrides the configuration)"
    )
    simulate.set_defaults(func=cmd_simulate)
    oscillator = commands.add_parser(
        "oscillator", parents=[common], help="write the analytic coupled-oscillator series"
    )
    oscillator.set_defaults(func=cmd_oscillator)
    compare = commands.add_parser(
        "compare", parents=[common], help="run two schemes and report their differences"
    )
    compare.add_argument(
        "--schemes", nargs=2, choices=[s.value for s in Scheme], metavar="SCHEME",
        help="the two schemes to compare (overrides the configuration)"
    )
    compare.set_defaults(func=cmd_compare)


def get_parser() -> argparse.ArgumentParser:
    """
    Build the command line parser.
    """
    app_desc = (
        "Quantum-classical bracket toolkit: verify the bracket identities, "
        "propagate mixed states and compare them with the analytic oscillator"
    )
    epilog = (
        "Exit codes: 0 success, 1 identity check failed, 2 usage error, "
        "3 numerical instability."
    )
    parser = argparse.ArgumentParser(
        prog=about.__app_name__, description=app_desc, epilog=epilog, add_help=False
    )
    options = parser.add_argument_group("Options")
    options.add_argument(
        "-h", "-?", "--help", action="help",
        help="show this help message and exit"
    )
    options.add_argument(
        "-v", "--version", action="version",
        version=f"{about.__app_name__} {about.__version__}",
        help="show program's version number and exit"
    )
    _add_commands(parser)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    """
    Parse `argv`, run the chosen command and return its exit code.
    """
    args = get_parser().parse_args(argv)
    coloredlogs.install(
        fmt="%(asctime)s %(name)s %(levelname)s %(message)s",
        level=get_logging_level(args.verbose, quiet=args.quiet),
    )
    try:
        return int(args.func(args))
    except InstabilityError as err:
        logger.error("%s", err)  # noqa: TRY400
        return ExitCode.INSTABILITY
    except (OverflowError, FloatingPointError) as err:
        logger.error("numerical overflow: %s", err)  # noqa: TRY400
        return ExitCode.INSTABILITY
    except (QCBracketError, OSError) as err:
        logger.error("%s", err)  # noqa: TRY400
        return ExitCode.USAGE_ERROR


def main() -> NoReturn:
    """
    Entry point for the command line.
    """
    sys.exit(run())


if __name__ == "__main__":
    main()
