from pathlib import Path

import pytest

from src.bench.cli import build_parser
from src.config.experiment_config import (
    COMMAND_DEFAULTS,
    NUMERICS,
    ExperimentConfig,
)
from src.utils.error_handling import InvalidConfigError


class TestDefaults:
    @pytest.mark.parametrize("command", list(COMMAND_DEFAULTS))
    def test_every_command_builds(self, command):
        config = ExperimentConfig.from_defaults(command)
        assert config.command == command
        assert config.reps >= 2

    def test_sweep_b_defaults(self):
        config = ExperimentConfig.from_defaults("sweep-b")
        assert (config.p, config.m) == (25, 10)
        assert config.b == "auto"
        assert config.alpha == (1.0,)

    def test_verify_extras(self):
        config = ExperimentConfig.from_defaults("verify")
        assert config.extras["identity_dims"] == ((5, 10), (10, 4), (4, 12))
        assert "output_path" in config.extras

    def test_none_overrides_are_ignored(self):
        config = ExperimentConfig.from_defaults("sweep-alpha", p=None, reps=7)
        assert config.p == 50
        assert config.reps == 7

    def test_numeric_b_is_stored_as_floats(self):
        config = ExperimentConfig.from_defaults("sweep-b", b=[1, 2])
        assert config.b == (1.0, 2.0)

    def test_unknown_command(self):
        with pytest.raises(InvalidConfigError):
            ExperimentConfig.from_defaults("plot")

    def test_gate_constants(self):
        assert NUMERICS["z_gate"] == 4.0
        assert NUMERICS["max_skip_fraction"] == 0.01


class TestValidation:
    @pytest.mark.parametrize(
        "overrides",
        [
            {"reps": 1},
            {"seed": -1},
            {"seed": 2**64},
            {"p": 0},
            {"dist": ("cauchy",)},
            {"dist": ("student",), "df": 2.0},
            {"sigma": ("toeplitz",)},
            {"sigma": ("dense",)},
            {"sigma_file": Path("does/not/exist.csv")},
            {"rho": 1.0},
            {"alpha": (0.0,)},
            {"b": (-1.0,)},
            {"b": "b2"},
            {"b_points": 0},
            {"loss": "stein"},
            {"threads": "0"},
            {"threads": "many"},
            {"trials": 0},
            {"scan_center_factor": 0.0},
        ],
    )
    def test_invalid_values(self, overrides):
        with pytest.raises(InvalidConfigError):
            ExperimentConfig.from_defaults("sweep-alpha", **overrides)

    def test_n_threads(self):
        assert ExperimentConfig.from_defaults("sweep-b", threads=3).n_threads == 3
        assert ExperimentConfig.from_defaults("sweep-b").n_threads >= 1


class TestRendering:
    @pytest.mark.parametrize(
        "overrides",
        [
            {},
            {"threads": 4, "b": (0.5, 1.125), "alpha": (1.0, 2.5)},
            {"dist": ("gaussian", "student"), "df": 7.5, "loss": "quadratic"},
            {"out": Path("results/custom.csv"), "losses_dir": Path("losses")},
        ],
    )
    def test_argv_round_trip(self, overrides):
        config = ExperimentConfig.from_defaults("sweep-alpha", **overrides)
        args = build_parser().parse_args(config.to_argv())
        assert ExperimentConfig.from_namespace(args) == config

    def test_describe_ignores_outputs_and_threads(self, tmp_path):
        base = ExperimentConfig.from_defaults("sweep-b", threads=1)
        other = ExperimentConfig.from_defaults(
            "sweep-b", threads=8, out=tmp_path / "x.csv"
        )
        assert base.describe() == other.describe()
        assert "threads" not in base.describe()
        assert base.describe().startswith("command=sweep-b p=25 m=10")

    def test_describe_changes_with_seed(self):
        base = ExperimentConfig.from_defaults("sweep-b")
        reseeded = ExperimentConfig.from_defaults("sweep-b", seed=1)
        assert base.describe() != reseeded.describe()
