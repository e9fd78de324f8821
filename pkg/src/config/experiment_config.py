"""Configuration settings for the shrinkage benchmark.

This module contains the default settings of every benchmark subcommand,
the numerical tolerances shared by the library, and the ExperimentConfig
record that the CLI builds from those defaults and its flags.
"""

import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from src.utils.error_handling import InvalidConfigError

# Define base directories
ROOT_DIR = Path(__file__).parents[2].absolute()
RESULTS_DIR = ROOT_DIR / "results"

ARTIFACT_VERSION = "0.1.0"

# Numerical constants of the library
NUMERICS = {
    "symmetry_tol": 1e-10,  # eigen_sym_truncated / generic symmetric inputs
    "sqrt_symmetry_tol": 1e-12,  # sym_sqrt input check
    "psd_tol": 1e-8,  # eigenvalues below -psd_tol reject a PSD input
    "sign_tol": 1e-12,  # "nonzero" component for the eigenvector sign rule
    "qr_rank_tol": 1e-10,  # relative |R_ii| cutoff for full column rank
    "tie_tol": 1e-9,  # relative eigenvalue gap for divided differences
    "fd_step": 1e-6,  # finite-difference step, absolute and relative
    "max_skip_fraction": 0.01,  # skipped replications abort the run at 1 %
    "z_gate": 4.0,  # |z| bound of the statistical identity checks
    "bound_slack": 1e-9,  # slack of the g(Psi) certificate
    "variant_tol": 1e-9,  # printed vs symmetrized g(Psi) discrepancy logging
}

DISTRIBUTIONS = ("gaussian", "student")
SIGMA_KINDS = ("identity", "ar1", "dense")
LOSS_KINDS = ("data-based", "quadratic")
B_SELECTORS = ("auto", "b0", "b1")

ALPHA_GRID = (0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0)

# Effect of b at fixed alpha
SWEEP_B_CONFIG = {
    "p": 25,
    "m": 10,
    "dist": ("gaussian",),
    "df": 5.0,
    "sigma": ("identity",),
    "rho": 0.9,
    "alpha": (1.0,),
    "b": "auto",  # b_points values over (0, 4 b0]
    "b_points": 40,
    "loss": "data-based",
    "reps": 1000,
    "seed": 42,
    "output_path": RESULTS_DIR / "sweep_b.csv",
}

# Effect of alpha at b = b0
SWEEP_ALPHA_CONFIG = {
    "p": 50,
    "m": 20,
    "dist": ("gaussian", "student"),
    "df": 5.0,
    "sigma": ("identity", "ar1"),
    "rho": 0.9,
    "alpha": ALPHA_GRID,
    "b": "b0",
    "b_points": 40,
    "loss": "data-based",
    "reps": 1000,
    "seed": 42,
    "output_path": RESULTS_DIR / "sweep_alpha.csv",
}

# Data-based loss (b0) against quadratic loss (b1)
COMPARE_LOSS_CONFIG = {
    "p": 20,
    "m": 10,
    "dist": ("gaussian",),
    "df": 5.0,
    "sigma": ("identity", "ar1"),
    "rho": 0.9,
    "alpha": ALPHA_GRID,
    "b": "b0",
    "b_points": 40,
    "loss": "data-based",
    "reps": 1000,
    "seed": 42,
    "output_path": RESULTS_DIR / "compare_loss.csv",
}

# Haff against James-Stein and Efron-Morris-Dey shrinkage
COMPARE_FAMILIES_CONFIG = {
    "p": 25,
    "m": 10,
    "dist": ("gaussian", "student"),
    "df": 5.0,
    "sigma": ("identity", "ar1"),
    "rho": 0.9,
    "alpha": (1.0,),
    "b": "b0",
    "b_points": 40,
    "loss": "data-based",
    "reps": 1000,
    "seed": 42,
    "output_path": RESULTS_DIR / "compare_families.csv",
}

# Identity checks, certificate sweep, a0 scan and matrix suite
VERIFY_CONFIG = {
    "p": 5,
    "m": 15,
    "dist": ("gaussian", "student"),
    "df": 5.0,
    "sigma": ("identity", "ar1"),
    "rho": 0.9,
    "alpha": (1.0,),
    "b": "b0",
    "b_points": 40,
    "loss": "data-based",
    "reps": 20000,  # Stein-Haff replications; the a0 scan uses reps // 4
    "seed": 42,
    "output_path": RESULTS_DIR / "verify.txt",
    "trials": 1000,  # certificate triples; the matrix suite uses trials // 2
    "scan_center_factor": 1.0,
    "identity_dims": ((5, 10), (10, 4), (4, 12)),
    "bound_dims": ((25, 10), (50, 20), (10, 5)),
    "scan_grid": (0.5, 0.75, 1.0, 1.25, 1.5),
    "regression_dims": (20, 3, 4),  # n, q, p
}

COMMAND_DEFAULTS: dict[str, dict[str, Any]] = {
    "sweep-b": SWEEP_B_CONFIG,
    "sweep-alpha": SWEEP_ALPHA_CONFIG,
    "compare-loss": COMPARE_LOSS_CONFIG,
    "compare-families": COMPARE_FAMILIES_CONFIG,
    "verify": VERIFY_CONFIG,
}


def _format_number(value: float | int) -> str:
    return repr(value) if isinstance(value, float) else str(value)


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark run: the command plus every knob it reads.

    Built from the command's default dictionary overridden by CLI flags.
    `to_argv` renders flags that parse back to an equal config.
    """

    command: str
    p: int
    m: int
    dist: tuple[str, ...]
    df: float
    sigma: tuple[str, ...]
    rho: float
    alpha: tuple[float, ...]
    b: tuple[float, ...] | str
    b_points: int
    loss: str
    reps: int
    seed: int
    out: Path | None = None
    losses_dir: Path | None = None
    sigma_file: Path | None = None
    threads: int | str = "auto"
    trials: int = 1000
    scan_center_factor: float = 1.0
    extras: dict[str, Any] = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_defaults(cls, command: str, **overrides: Any) -> "ExperimentConfig":
        """Build a config from a command's defaults, ignoring None overrides.

        Args:
            command: Benchmark subcommand name
            **overrides: Field values replacing the defaults

        Returns:
            Validated ExperimentConfig

        Raises:
            InvalidConfigError: If the command is unknown or a value is invalid
        """
        if command not in COMMAND_DEFAULTS:
            raise InvalidConfigError(f"unknown command {command!r}")
        defaults = COMMAND_DEFAULTS[command]
        values: dict[str, Any] = {
            name: defaults[name]
            for name in (
                "p", "m", "dist", "df", "sigma", "rho", "alpha",
                "b", "b_points", "loss", "reps", "seed",
            )
        }
        values["out"] = defaults["output_path"]
        values["trials"] = defaults.get("trials", 1000)
        values["scan_center_factor"] = defaults.get("scan_center_factor", 1.0)
        values.update({k: v for k, v in overrides.items() if v is not None})
        for name in ("dist", "sigma", "alpha"):
            values[name] = tuple(values[name])
        if not isinstance(values["b"], str):
            values["b"] = tuple(float(b) for b in values["b"])
        values["alpha"] = tuple(float(a) for a in values["alpha"])
        config = cls(
            command=command,
            extras={k: v for k, v in defaults.items() if k not in values},
            **values,
        )
        config.validate()
        return config

    @classmethod
    def from_namespace(cls, args: Any) -> "ExperimentConfig":
        """Build a config from parsed CLI arguments (argparse.Namespace)."""
        overrides = {
            name: getattr(args, name, None)
            for name in cls.__dataclass_fields__
            if name not in ("command", "extras")
        }
        return cls.from_defaults(args.command, **overrides)

    @property
    def n_threads(self) -> int:
        if self.threads == "auto":
            return os.cpu_count() or 1
        return int(self.threads)

    def validate(self) -> None:
        """Check every field, raising InvalidConfigError on the first problem."""
        if self.p < 1 or self.m < 1:
            raise InvalidConfigError(f"p and m must be >= 1, got ({self.p}, {self.m})")
        if self.reps < 2:
            raise InvalidConfigError(f"reps must be >= 2, got {self.reps}")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfigError(
                f"seed must be an unsigned 64-bit integer, got {self.seed}"
            )
        if not self.dist or any(d not in DISTRIBUTIONS for d in self.dist):
            raise InvalidConfigError(
                f"dist must be among {DISTRIBUTIONS}, got {self.dist}"
            )
        if "student" in self.dist and not self.df > 2:
            raise InvalidConfigError(f"Student-t needs df > 2, got {self.df}")
        if not self.sigma or any(s not in SIGMA_KINDS for s in self.sigma):
            raise InvalidConfigError(
                f"sigma must be among {SIGMA_KINDS}, got {self.sigma}"
            )
        if "dense" in self.sigma and self.sigma_file is None:
            raise InvalidConfigError("--sigma dense requires --sigma-file")
        if self.sigma_file is not None and not Path(self.sigma_file).is_file():
            raise InvalidConfigError(f"sigma file {self.sigma_file} does not exist")
        if not abs(self.rho) < 1:
            raise InvalidConfigError(f"rho must satisfy |rho| < 1, got {self.rho}")
        if not self.alpha or any(a <= 0 for a in self.alpha):
            raise InvalidConfigError(f"alpha values must be > 0, got {self.alpha}")
        if isinstance(self.b, str):
            if self.b not in B_SELECTORS:
                raise InvalidConfigError(f"b must be numbers or one of {B_SELECTORS}")
        elif not self.b or any(b <= 0 for b in self.b):
            raise InvalidConfigError(f"b values must be > 0, got {self.b}")
        if self.b_points < 1:
            raise InvalidConfigError(f"b_points must be >= 1, got {self.b_points}")
        if self.loss not in LOSS_KINDS:
            raise InvalidConfigError(
                f"loss must be one of {LOSS_KINDS}, got {self.loss}"
            )
        threads = str(self.threads)
        if threads != "auto" and (not threads.isdigit() or int(threads) < 1):
            raise InvalidConfigError(
                f"threads must be a positive integer or 'auto', got {self.threads}"
            )
        if self.trials < 1:
            raise InvalidConfigError(f"trials must be >= 1, got {self.trials}")
        if self.scan_center_factor <= 0:
            raise InvalidConfigError("scan_center_factor must be > 0")

    def to_argv(self) -> list[str]:
        """Render the config as a CLI argument list that parses back to it."""
        argv = [
            self.command,
            "--p", str(self.p),
            "--m", str(self.m),
            "--dist", ",".join(self.dist),
            "--df", _format_number(self.df),
            "--sigma", ",".join(self.sigma),
            "--rho", _format_number(self.rho),
            "--alpha", ",".join(_format_number(a) for a in self.alpha),
            "--b", self.b if isinstance(self.b, str) else ",".join(map(repr, self.b)),
            "--b-points", str(self.b_points),
            "--loss", self.loss,
            "--reps", str(self.reps),
            "--seed", str(self.seed),
            "--threads", str(self.threads),
            "--trials", str(self.trials),
            "--scan-center-factor", _format_number(self.scan_center_factor),
        ]
        for flag, path in (
            ("--out", self.out),
            ("--losses-dir", self.losses_dir),
            ("--sigma-file", self.sigma_file),
        ):
            if path is not None:
                argv += [flag, str(path)]
        return argv

    def describe(self) -> str:
        """One-line description recorded in the comment line of every CSV.

        Output paths and the thread count are left out: they do not change
        the numbers, and the CSV must not depend on them.
        """
        record = asdict(self)
        for name in ("out", "losses_dir", "threads", "extras"):
            record.pop(name)
        if record["sigma_file"] is not None:
            record["sigma_file"] = Path(record["sigma_file"]).name
        parts = []
        for key, value in record.items():
            if isinstance(value, tuple):
                value = ",".join(
                    v if isinstance(v, str) else _format_number(v) for v in value
                )
            elif isinstance(value, float):
                value = _format_number(value)
            parts.append(f"{key}={value}")
        return " ".join(parts)
