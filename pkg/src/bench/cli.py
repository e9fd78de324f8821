"""Command-line interface for the shrinkage benchmark.

Subcommands:
    sweep-b           PRIAL of the Haff-type estimator over a grid of b
    sweep-alpha       PRIAL over a grid of alpha at b = b0
    compare-loss      data-based loss (b0) against quadratic loss (b1)
    compare-families  Haff against James-Stein and Efron-Morris-Dey
    verify            identity checks, certificate, a0 scan, matrix suite

Exit codes: 0 success, 1 failed check, 2 invalid configuration.
"""

import argparse
from collections.abc import Sequence
from pathlib import Path

from src.bench.compare_families_pipeline import CompareFamiliesPipeline
from src.bench.compare_loss_pipeline import CompareLossPipeline
from src.bench.prial_pipeline import PrialPipeline
from src.bench.sweep_alpha_pipeline import SweepAlphaPipeline
from src.bench.sweep_b_pipeline import SweepBPipeline
from src.bench.verify_pipeline import VerifyPipeline
from src.config.experiment_config import (
    B_SELECTORS,
    COMMAND_DEFAULTS,
    LOSS_KINDS,
    ExperimentConfig,
)
from src.config.logging_config import get_logger, set_console_level
from src.utils.error_handling import (
    CheckFailedError,
    InvalidConfigError,
    InvalidInputError,
    ShrinkageError,
)

logger = get_logger("bench.cli")

PIPELINES: dict[str, type[PrialPipeline]] = {
    "sweep-b": SweepBPipeline,
    "sweep-alpha": SweepAlphaPipeline,
    "compare-loss": CompareLossPipeline,
    "compare-families": CompareFamiliesPipeline,
    "verify": VerifyPipeline,
}

SUMMARIES = {
    "sweep-b": "PRIAL of the Haff-type estimator over a grid of b",
    "sweep-alpha": "PRIAL of the Haff-type estimator over a grid of alpha",
    "compare-loss": "Data-based loss with b0 against quadratic loss with b1",
    "compare-families": "Haff against James-Stein and Efron-Morris-Dey shrinkage",
    "verify": "Identity checks, g(Psi) certificate, a0 scan and matrix suite",
}

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID_CONFIG = 2


def _name_list(value: str) -> tuple[str, ...]:
    names = tuple(part.strip() for part in value.split(",") if part.strip())
    if not names:
        raise argparse.ArgumentTypeError("expected a comma-separated list")
    return names


def _float_list(value: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in _name_list(value))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected numbers, got {value!r}") from e


def _b_option(value: str) -> tuple[float, ...] | str:
    if value in B_SELECTORS:
        return value
    return _float_list(value)


def _threads(value: str) -> int | str:
    if value == "auto":
        return value
    try:
        return int(value)
    except ValueError as e:
        raise argparse.ArgumentTypeError(
            f"expected an integer or 'auto', got {value!r}"
        ) from e


def _experiment_options() -> argparse.ArgumentParser:
    """Flags shared by every subcommand; unset flags keep the command defaults."""
    parent = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    parent.add_argument("--p", type=int, help="Dimension p")
    parent.add_argument("--m", type=int, help="Residual rows m")
    parent.add_argument("--dist", type=_name_list, help="gaussian and/or student")
    parent.add_argument("--df", type=float, help="Student-t degrees of freedom (> 2)")
    parent.add_argument("--sigma", type=_name_list, help="identity, ar1 and/or dense")
    parent.add_argument("--rho", type=float, help="AR1 coefficient")
    parent.add_argument(
        "--sigma-file", dest="sigma_file", type=Path, help="CSV of a dense Sigma"
    )
    parent.add_argument(
        "--alpha", type=_float_list, help="Comma-separated alpha values"
    )
    parent.add_argument(
        "--b", type=_b_option, help=f"Comma-separated b values or one of {B_SELECTORS}"
    )
    parent.add_argument(
        "--b-points", dest="b_points", type=int, help="Grid size of --b auto"
    )
    parent.add_argument("--loss", choices=LOSS_KINDS, help="Loss function")
    parent.add_argument("--reps", type=int, help="Monte-Carlo replications")
    parent.add_argument("--seed", type=int, help="Base seed (unsigned 64-bit)")
    parent.add_argument("--out", type=Path, help="Output file, '-' for stdout")
    parent.add_argument(
        "--losses-dir",
        dest="losses_dir",
        type=Path,
        help="Directory for paired losses (parquet)",
    )
    parent.add_argument("--threads", type=_threads, help="Worker threads or 'auto'")
    parent.add_argument("--trials", type=int, help="verify: certificate triples")
    parent.add_argument(
        "--scan-center-factor",
        dest="scan_center_factor",
        type=float,
        help="verify: center of the a0 scan grid, as a multiple of a0",
    )
    parent.add_argument(
        "--log-level",
        dest="log_level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        default="INFO",
        help="Set the console logging level",
    )
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shrinkage-bench",
        description="PRIAL benchmark of orthogonally invariant scale-matrix estimators",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    parent = _experiment_options()
    for command in COMMAND_DEFAULTS:
        summary = SUMMARIES[command]
        defaults = ExperimentConfig.from_defaults(command).describe()
        subparsers.add_parser(
            command,
            parents=[parent],
            help=summary,
            description=summary,
            epilog=f"Defaults: {defaults}",
            formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point for the benchmark CLI.

    Args:
        argv: Argument list without the program name (default: sys.argv)

    Returns:
        Process exit code
    """
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    set_console_level(args.log_level)

    try:
        config = ExperimentConfig.from_namespace(args)
        PIPELINES[config.command](config).run()
    except CheckFailedError as e:
        logger.error(f"Verification failed: {e}")
        return EXIT_CHECK_FAILED
    except (InvalidConfigError, InvalidInputError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_INVALID_CONFIG
    except ShrinkageError as e:
        logger.error(f"Run aborted: {e}")
        return EXIT_CHECK_FAILED

    return EXIT_OK
