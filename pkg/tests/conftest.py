"""Shared fixtures for the shrinkage test-suite."""

from collections.abc import Callable
from typing import Any

import numpy as np
import pytest

from src.config.experiment_config import ExperimentConfig
from src.shrinkage.elliptical_model import replication_rng


@pytest.fixture
def rng() -> np.random.Generator:
    return replication_rng(20240917, 0, stream=9)


@pytest.fixture
def make_config(tmp_path) -> Callable[..., ExperimentConfig]:
    """Small, fast configurations writing into the test's temporary directory."""

    def factory(command: str, **overrides: Any) -> ExperimentConfig:
        values: dict[str, Any] = {
            "reps": 40,
            "threads": 1,
            "out": tmp_path / f"{command}.csv",
        }
        values.update(overrides)
        return ExperimentConfig.from_defaults(command, **values)

    return factory


def random_spd(rng: np.random.Generator, p: int) -> np.ndarray:
    g = rng.standard_normal((p, p))
    return g @ g.T + p * np.eye(p)
