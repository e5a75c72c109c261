"""Command line interface for the verification suites and experiment reports."""

from __future__ import annotations

import argparse
import logging
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from .base import ConfigError, DunklLabError, ParameterError
from .config import FORMATS, ExperimentConfig
from .heat_poisson import EXPORT_COLUMNS, KernelEvaluator, export_kernel_rows
from .lipschitz_norms import REPORT_COLUMNS, EquivalenceSettings, equivalence_report
from .reporting import CALCULUS_COLUMNS, calculus_records, write_report
from .root_system import make_product_z2
from .suites import CHECK_COLUMNS, SUITES, run_suite

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=Path, help="JSON experiment configuration.")
    parent.add_argument("--k", type=float, nargs="+", help="Multiplicities to sweep.")
    parent.add_argument("--beta", type=float, nargs="+", help="Smoothness exponents to sweep.")
    parent.add_argument("--tol", type=float, help="Replace every check tolerance.")
    parent.add_argument("--out", type=Path, help="Report file (standard output when omitted).")
    parent.add_argument("--format", choices=FORMATS, help="Report format.")
    parent.add_argument("--mirror", action="store_true", help="Also write a JSON copy of a CSV report.")
    parent.add_argument("--generators", nargs="+", help="Matrix generators to include.")
    parent.add_argument("--threads", type=int, help="Worker threads (default: $DUNKL_LAB_THREADS or 1).")
    parent.add_argument(
        "--log-level",
        default="WARNING",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        help="Logging threshold.",
    )
    return parent


def build_parser() -> argparse.ArgumentParser:
    """Create the argument parser for the CLI."""

    parser = argparse.ArgumentParser(
        prog="dunkl-lab",
        description="Verify Dunkl heat/Poisson kernels, Lipschitz norms and semigroup calculus.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    common = _common_options()
    verify = commands.add_parser("verify", parents=[common], help="Run a verification suite.")
    verify.add_argument("--suite", required=True, choices=tuple(SUITES), help="Suite to run.")
    commands.add_parser("norms", parents=[common], help="Norm-equivalence report over corpus x beta x k.")
    commands.add_parser("calculus", parents=[common], help="Matrix calculus and interpolation experiments.")
    export = commands.add_parser("kernels-export", parents=[common], help="Tabulate kernels and time derivatives.")
    export.add_argument("--t", type=float, nargs="+", default=[0.1, 0.5, 1.0, 2.0], help="Sample times.")
    export.add_argument("--x", type=float, nargs="+", default=[-2.0, -1.0, 0.0, 1.0, 2.0], help="Sample points.")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """File values, then ``DUNKL_LAB_THREADS``, then command-line flags."""

    config = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    config = config.with_environment()
    return config.override(
        k_values=args.k,
        betas=args.beta,
        tol=args.tol,
        output=args.out,
        format=args.format,
        generators=args.generators,
        threads=args.threads,
    )


def cmd_verify(config: ExperimentConfig, suite: str, mirror: bool = False) -> int:
    """Run one suite; exit 0 iff every hard check passes."""

    report = run_suite(suite, config)
    write_report(report.to_records(), CHECK_COLUMNS, config.output, config.format, mirror)
    for check in report.failures:
        logger.error("FAILED %s %s %s: %.4g (bound %.4g)", check.name, check.subject, check.parameter, check.value, check.bound)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_norms(config: ExperimentConfig, mirror: bool = False) -> int:
    """Norm-equivalence table; out-of-band ratios are flagged, not failed."""

    settings = EquivalenceSettings(
        time_grid=config.time_grid,
        space_grid=config.space_grid,
        tol=config.tolerance("norms"),
        band=config.ratio_band,
        dimension=config.root_system.N,
        threads=config.threads,
    )
    rows = equivalence_report(config.corpus, config.betas, config.k_values, settings, config.corpus_params)
    flagged = [row for row in rows if row.flagged]
    for row in flagged:
        logger.warning("Out-of-band ratios for %s, k=%g, beta=%g: %s", row.function, row.k, row.beta, row.ratios)
    records = [record for row in rows for record in row.to_records()]
    write_report(records, REPORT_COLUMNS, config.output, config.format, mirror)
    return EXIT_OK


def cmd_calculus(config: ExperimentConfig, mirror: bool = False) -> int:
    """Calculus and interpolation experiments on the generator test set."""

    calculus = run_suite("calculus", config)
    interpolation = run_suite("interpolation", config)
    records = calculus_records(calculus.to_records() + interpolation.to_records())
    write_report(records, CALCULUS_COLUMNS, config.output, config.format, mirror)
    passed = calculus.passed and interpolation.passed
    return EXIT_OK if passed else EXIT_FAILED


def cmd_kernels_export(
    config: ExperimentConfig,
    times: Sequence[float],
    points: Sequence[float],
    mirror: bool = False,
) -> int:
    """Rank-one kernel table for every configured multiplicity."""

    rows = []
    for k in config.k_values:
        ke = KernelEvaluator(make_product_z2(1, k), tol=config.tolerance("quadrature"))
        rows.extend(export_kernel_rows(ke, times, np.asarray(points), np.asarray(points)))
    write_report(rows, EXPORT_COLUMNS, config.output, config.format, mirror)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point used by ``python -m dunkl_lab`` and ``dunkl-lab``."""

    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT)
    try:
        config = load_config(args)
        if args.command == "verify":
            return cmd_verify(config, args.suite, args.mirror)
        if args.command == "norms":
            return cmd_norms(config, args.mirror)
        if args.command == "calculus":
            return cmd_calculus(config, args.mirror)
        return cmd_kernels_export(config, args.t, args.x, args.mirror)
    except (ConfigError, ParameterError) as error:
        logger.error("%s", error)
        return EXIT_USAGE
    except DunklLabError as error:
        logger.error("%s: %s", type(error).__name__, error)
        return EXIT_FAILED


if __name__ == "__main__":  # pragma: no cover - CLI shim
    raise SystemExit(main())
