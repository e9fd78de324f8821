"""Haff-type shrinkage against the James-Stein and Efron-Morris-Dey families.

All families are scored under the data-based loss against a0 S on common
draws. The James-Stein family has no (alpha, b) parameters; its rows leave
those columns empty.
"""

import pandas as pd

from src.bench.prial_pipeline import PrialPipeline
from src.config.logging_config import get_logger
from src.shrinkage.estimators import EstimatorSpec, ShrinkagePsi
from src.shrinkage.losses_risk import LossKind, LossTask

logger = get_logger("bench.compare_families")


class CompareFamiliesPipeline(PrialPipeline):
    """Pipeline for the `compare-families` subcommand."""

    columns = (
        "dist", "sigma", "family", "alpha", "b", "prial_percent", "prial_se",
        "base_mean", "alt_mean", "reps", "seed",
    )

    def simulate(self) -> pd.DataFrame:
        config = self.config
        loss_kind = LossKind.DATA_BASED
        rows = []

        for dist, sigma, setting in self.settings():
            b_grid = self.b_values(setting, loss_kind)
            families: list[tuple[str, float | None, float | None, ShrinkagePsi]] = [
                ("james-stein", None, None, ShrinkagePsi.james_stein())
            ]
            for alpha in config.alpha:
                for b in b_grid:
                    families.append(("haff", alpha, b, ShrinkagePsi.haff(alpha, b)))
                    emd = ShrinkagePsi.efron_morris_dey(alpha, b)
                    families.append(("efron-morris-dey", alpha, b, emd))
            logger.info(f"Comparing {len(families)} estimators on {setting.label}")

            tasks = [self.baseline_task(setting, loss_kind)]
            tasks += [
                LossTask(
                    EstimatorSpec.orth_invariant(psi), loss_kind, f"{name}_{alpha}_{b}"
                )
                for name, alpha, b, psi in families
            ]
            pairs = [(0, k) for k in range(1, len(tasks))]
            reports = self.compare(f"{dist}_{sigma}", setting, tasks, pairs)

            for (name, alpha, b, _), report in zip(families, reports, strict=True):
                rows.append(
                    {
                        "dist": dist,
                        "sigma": sigma,
                        "family": name,
                        "alpha": alpha,
                        "b": b,
                        "prial_percent": report.prial_percent,
                        "prial_se": report.std_error_prial,
                        "base_mean": report.baseline_mean,
                        "alt_mean": report.alt_mean,
                        "reps": report.replications,
                        "seed": report.seed,
                    }
                )

        return pd.DataFrame(rows, columns=list(self.columns))
