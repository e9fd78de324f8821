"""Effect of the exponent alpha on the PRIAL of the Haff-type estimator."""

import pandas as pd

from src.bench.prial_pipeline import PrialPipeline
from src.config.logging_config import get_logger
from src.shrinkage.losses_risk import LossKind

logger = get_logger("bench.sweep_alpha")


class SweepAlphaPipeline(PrialPipeline):
    """Pipeline for the `sweep-alpha` subcommand.

    Each (distribution, Sigma) combination is one paired simulation in which
    every (alpha, b) estimator shares the draws of the baseline a0 S.
    """

    columns = (
        "dist", "sigma", "alpha", "b", "prial_percent", "prial_se",
        "base_mean", "alt_mean", "reps", "seed", "certified",
    )

    def simulate(self) -> pd.DataFrame:
        config = self.config
        loss_kind = LossKind(config.loss)
        rows = []

        for dist, sigma, setting in self.settings():
            bound = self.improvement_bound(setting, loss_kind)
            b_grid = self.b_values(setting, loss_kind)
            grid = [(alpha, b) for alpha in config.alpha for b in b_grid]
            logger.info(f"Sweeping {len(grid)} (alpha, b) pairs on {setting.label}")

            tasks = [self.baseline_task(setting, loss_kind)]
            tasks += [
                self.haff_task(alpha, b, loss_kind, f"alpha={alpha:g},b={b:.10g}")
                for alpha, b in grid
            ]
            pairs = [(0, k) for k in range(1, len(tasks))]
            reports = self.compare(f"{dist}_{sigma}", setting, tasks, pairs)

            for (alpha, b), task, report in zip(grid, tasks[1:], reports, strict=True):
                rows.append(
                    {
                        "dist": dist,
                        "sigma": sigma,
                        "alpha": alpha,
                        "b": b,
                        "prial_percent": report.prial_percent,
                        "prial_se": report.std_error_prial,
                        "base_mean": report.baseline_mean,
                        "alt_mean": report.alt_mean,
                        "reps": report.replications,
                        "seed": report.seed,
                        "certified": self.flag(
                            self.is_certified(task.estimator.psi, bound)
                        ),
                    }
                )

        return pd.DataFrame(rows, columns=list(self.columns))
