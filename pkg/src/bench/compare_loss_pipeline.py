"""Data-based loss against quadratic loss.

For each alpha the Haff-type estimator with b = b0 is compared with S / v
under the data-based loss, and the one with b = b1 with S / (v + r + 1)
under the quadratic loss. Both comparisons use the same draws.
"""

import pandas as pd

from src.bench.prial_pipeline import PrialPipeline
from src.config.logging_config import get_logger
from src.shrinkage.estimators import b0_bound, b1_bound
from src.shrinkage.losses_risk import LossKind

logger = get_logger("bench.compare_loss")


class CompareLossPipeline(PrialPipeline):
    """Pipeline for the `compare-loss` subcommand."""

    columns = (
        "dist", "sigma", "alpha", "b0", "b1",
        "prial_data_based", "prial_data_based_se",
        "prial_quadratic", "prial_quadratic_se",
        "reps", "seed", "certified",
    )

    def simulate(self) -> pd.DataFrame:
        alphas = list(self.config.alpha)
        n = len(alphas)
        data_based, quadratic = LossKind.DATA_BASED, LossKind.QUADRATIC
        rows = []

        for dist, sigma, setting in self.settings():
            b0 = b0_bound(setting.v, setting.r)
            b1 = b1_bound(setting.v, setting.r)
            logger.info(
                f"Comparing losses on {setting.label}: b0={b0:.6g}, b1={b1:.6g}"
            )

            # columns: data-based baseline, n Haff(b0), quadratic baseline, n Haff(b1)
            tasks = [self.baseline_task(setting, data_based)]
            tasks += [
                self.haff_task(a, b0, data_based, f"data_based_{a:g}") for a in alphas
            ]
            tasks += [self.baseline_task(setting, quadratic, "baseline_quadratic")]
            tasks += [
                self.haff_task(a, b1, quadratic, f"quadratic_{a:g}") for a in alphas
            ]
            pairs = [(0, 1 + k) for k in range(n)]
            pairs += [(n + 1, n + 2 + k) for k in range(n)]
            reports = self.compare(f"{dist}_{sigma}", setting, tasks, pairs)

            for k, alpha in enumerate(alphas):
                db, quad = reports[k], reports[n + k]
                rows.append(
                    {
                        "dist": dist,
                        "sigma": sigma,
                        "alpha": alpha,
                        "b0": b0,
                        "b1": b1,
                        "prial_data_based": db.prial_percent,
                        "prial_data_based_se": db.std_error_prial,
                        "prial_quadratic": quad.prial_percent,
                        "prial_quadratic_se": quad.std_error_prial,
                        "reps": db.replications,
                        "seed": db.seed,
                        "certified": self.flag(
                            self.is_certified(tasks[1 + k].estimator.psi, b0)
                        ),
                    }
                )

        return pd.DataFrame(rows, columns=list(self.columns))
