"""Base pipeline for the PRIAL benchmark experiments.

Every experiment runs the same two stages:
1. Simulate paired losses for each (distribution, Sigma) combination of the
   configuration and tabulate PRIALs
2. Load the table as CSV (and the paired losses as parquet when requested)
"""

from collections.abc import Iterator, Sequence

import numpy as np
import pandas as pd

from src.bench.loaders.result_loader import ResultLoader
from src.config.experiment_config import NUMERICS, ExperimentConfig
from src.config.logging_config import get_logger
from src.shrinkage.elliptical_model import ModelSpec
from src.shrinkage.estimators import EstimatorSpec, ShrinkagePsi, b0_bound, b1_bound
from src.shrinkage.losses_risk import (
    LossKind,
    LossTask,
    PrialReport,
    RiskSetting,
    prial,
    simulate_losses,
)
from src.shrinkage.matrix_core import SigmaSpec
from src.utils.error_handling import InvalidConfigError, InvalidInputError
from src.utils.run_metrics import RunMetrics

logger = get_logger("bench.pipeline")


class PrialPipeline:
    """Pipeline base class for the benchmark subcommands.

    Subclasses implement `simulate`, which returns the result table; `run`
    times the stages, writes the table and saves the run metrics.
    """

    columns: tuple[str, ...] = ()

    def __init__(self, config: ExperimentConfig):
        """Initialize the pipeline with an experiment configuration.

        Args:
            config: Validated experiment configuration
        """
        self.config = config
        self.loader = ResultLoader(config)
        self.metrics = RunMetrics(config.command)
        self._dense_sigma: np.ndarray | None = None

        logger.info(f"{type(self).__name__} initialized")

    def run(self) -> pd.DataFrame:
        """Run the experiment and write its results.

        Returns:
            The result table
        """
        metrics = self.metrics
        config = self.config
        logger.info(f"Starting {config.command} with {config.reps} replications")

        try:
            metrics.start_stage("simulate")
            table = self.simulate()
            duration = metrics.end_stage("simulate")
            logger.info(f"Simulation completed in {duration:.2f} seconds")

            metrics.start_stage("load")
            self.load(table)
            duration = metrics.end_stage("load")
            logger.info(f"Results written in {duration:.2f} seconds")

            metrics.finalize()
            metrics_file = metrics.save()
            logger.info(
                f"{config.command} completed in "
                f"{metrics.metrics['total_duration']:.2f} seconds"
            )
            logger.debug(f"Metrics saved to {metrics_file}")
            logger.info("\n" + metrics.summary())

        except Exception as e:
            metrics.save("failed")
            logger.error(f"{config.command} failed: {e}")
            raise

        return table

    def simulate(self) -> pd.DataFrame:
        raise NotImplementedError

    def load(self, table: pd.DataFrame) -> None:
        self.loader.load_table(table)

    def model_for(self, dist: str) -> ModelSpec:
        if dist == "student":
            return ModelSpec.student_t(self.config.df)
        return ModelSpec.gaussian()

    def sigma_spec_for(self, kind: str) -> SigmaSpec:
        """Build the Sigma structure named on the command line.

        Raises:
            InvalidConfigError: If the dense Sigma file does not hold a p x p matrix
        """
        p = self.config.p
        if kind == "identity":
            return SigmaSpec.identity(p)
        if kind == "ar1":
            return SigmaSpec.ar1(p, self.config.rho)
        if self._dense_sigma is None:
            path = self.config.sigma_file
            try:
                matrix = pd.read_csv(path, header=None).to_numpy(dtype=float)
            except (OSError, ValueError) as e:
                raise InvalidConfigError(f"cannot read Sigma from {path}: {e}") from e
            if matrix.shape != (p, p):
                raise InvalidConfigError(
                    f"{path} holds a {matrix.shape} matrix, expected {p} x {p}"
                )
            self._dense_sigma = matrix
        return SigmaSpec.dense(self._dense_sigma)

    def settings(self) -> Iterator[tuple[str, str, RiskSetting]]:
        """Yield (dist, sigma, setting) for every combination of the configuration."""
        config = self.config
        for dist in config.dist:
            for sigma in config.sigma:
                try:
                    setting = RiskSetting.build(
                        self.model_for(dist),
                        self.sigma_spec_for(sigma),
                        config.p,
                        config.m,
                    )
                except InvalidInputError as e:
                    raise InvalidConfigError(str(e)) from e
                yield dist, sigma, setting

    def b_values(self, setting: RiskSetting, loss_kind: LossKind) -> list[float]:
        """Resolve the b option against the dimensions of a setting.

        "b0" and "b1" select one bound; "auto" spreads b_points values over
        (0, 4 bound] with the bound itself on the grid when b_points is a
        multiple of 4. The bound is b0 under the data-based loss and b1 under
        the quadratic loss.
        """
        b = self.config.b
        if not isinstance(b, str):
            return list(b)
        if b == "b0":
            bound = b0_bound(setting.v, setting.r)
        elif b == "b1":
            bound = b1_bound(setting.v, setting.r)
        else:
            bound = self.improvement_bound(setting, loss_kind)
        if not bound > 0:
            raise InvalidConfigError(
                f"b bound is 0 at (p, m) = ({setting.p}, {setting.m}); "
                "pass --b explicitly"
            )
        if b != "auto":
            return [bound]
        points = self.config.b_points
        return list(4.0 * bound * np.arange(1, points + 1) / points)

    @staticmethod
    def improvement_bound(setting: RiskSetting, loss_kind: LossKind) -> float:
        if loss_kind is LossKind.QUADRATIC:
            return b1_bound(setting.v, setting.r)
        return b0_bound(setting.v, setting.r)

    @staticmethod
    def is_certified(psi: ShrinkagePsi, bound: float) -> bool:
        """Whether psi is a Haff family with alpha >= 1 and 0 < b <= bound."""
        slack = 1.0 + NUMERICS["bound_slack"]
        return psi.certified_alpha and 0 < psi.b <= bound * slack

    def compare(
        self,
        label: str,
        setting: RiskSetting,
        tasks: Sequence[LossTask],
        pairs: Sequence[tuple[int, int]],
    ) -> list[PrialReport]:
        """Simulate tasks on common draws and compare them pairwise.

        Args:
            label: Name of the setting, used in metrics and file names
            setting: Fixed design
            tasks: Estimators and losses evaluated on every draw
            pairs: (baseline column, alternative column) of each comparison

        Returns:
            One PrialReport per pair
        """
        config = self.config
        table = simulate_losses(
            setting, tasks, config.reps, config.seed, config.n_threads
        )
        self.metrics.record_replications(label, len(table.losses), table.skipped)
        columns = [task.label or f"task{k}" for k, task in enumerate(tasks)]
        self.loader.save_losses(label, table.losses, columns)
        return [
            prial(table.losses[:, base], table.losses[:, alt], config.seed)
            for base, alt in pairs
        ]

    @staticmethod
    def baseline_task(
        setting: RiskSetting, loss_kind: LossKind, label: str = "baseline"
    ) -> LossTask:
        return LossTask(EstimatorSpec.usual(setting.a0(loss_kind)), loss_kind, label)

    @staticmethod
    def haff_task(alpha: float, b: float, loss_kind: LossKind, label: str) -> LossTask:
        psi = ShrinkagePsi.haff(alpha, b)
        return LossTask(EstimatorSpec.orth_invariant(psi), loss_kind, label)

    @staticmethod
    def flag(value: bool) -> str:
        return "true" if value else "false"
