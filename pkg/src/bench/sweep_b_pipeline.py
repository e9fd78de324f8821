"""Effect of the shrink weight b on the PRIAL of the Haff-type estimator.

For one model, one Sigma and one alpha, every b of the grid is compared with
the usual estimator a0 S on the same draws.
"""

import pandas as pd

from src.bench.prial_pipeline import PrialPipeline
from src.config.logging_config import get_logger
from src.shrinkage.losses_risk import LossKind
from src.utils.error_handling import InvalidConfigError

logger = get_logger("bench.sweep_b")


class SweepBPipeline(PrialPipeline):
    """Pipeline for the `sweep-b` subcommand."""

    columns = (
        "b", "prial_percent", "prial_se", "base_mean", "alt_mean",
        "reps", "seed", "certified",
    )

    def simulate(self) -> pd.DataFrame:
        config = self.config
        if len(config.dist) != 1 or len(config.sigma) != 1 or len(config.alpha) != 1:
            raise InvalidConfigError(
                "sweep-b takes a single --dist, --sigma and --alpha"
            )
        alpha = config.alpha[0]
        loss_kind = LossKind(config.loss)

        _, _, setting = next(self.settings())
        b_grid = self.b_values(setting, loss_kind)
        bound = self.improvement_bound(setting, loss_kind)
        logger.info(
            f"Sweeping {len(b_grid)} values of b on {setting.label}, alpha={alpha:g}"
        )

        tasks = [self.baseline_task(setting, loss_kind)]
        tasks += [self.haff_task(alpha, b, loss_kind, f"b={b:.10g}") for b in b_grid]
        pairs = [(0, k) for k in range(1, len(tasks))]
        reports = self.compare(setting.label, setting, tasks, pairs)

        rows = [
            {
                "b": b,
                "prial_percent": report.prial_percent,
                "prial_se": report.std_error_prial,
                "base_mean": report.baseline_mean,
                "alt_mean": report.alt_mean,
                "reps": report.replications,
                "seed": report.seed,
                "certified": self.flag(self.is_certified(task.estimator.psi, bound)),
            }
            for b, task, report in zip(b_grid, tasks[1:], reports, strict=True)
        ]
        return pd.DataFrame(rows, columns=list(self.columns))
