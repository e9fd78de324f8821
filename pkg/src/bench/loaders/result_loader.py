"""Result writing module for the benchmark pipelines."""

import os
import sys
from pathlib import Path

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from src.config.experiment_config import ARTIFACT_VERSION, ExperimentConfig
from src.config.logging_config import get_logger
from src.utils.error_handling import retry

logger = get_logger(__name__)

STDOUT = "-"


class ResultLoader:
    """Loader class for benchmark result tables.

    This class writes the result table of an experiment as CSV, preceded by
    a comment line recording the configuration, seed and artifact version,
    and optionally saves the paired per-replication losses as parquet.
    """

    def __init__(self, config: ExperimentConfig):
        """Initialize the loader with an experiment configuration.

        Args:
            config: Experiment whose results are written
        """
        self.config = config
        self.output_path = config.out
        self.losses_dir = config.losses_dir

        if not self.to_stdout and self.output_path is not None:
            os.makedirs(Path(self.output_path).parent, exist_ok=True)
        if self.losses_dir is not None:
            os.makedirs(self.losses_dir, exist_ok=True)

        logger.debug(f"ResultLoader initialized with output path: {self.output_path}")

    @property
    def to_stdout(self) -> bool:
        return str(self.output_path) == STDOUT

    def header_line(self) -> str:
        return (
            f"# {self.config.describe()}; seed={self.config.seed}; "
            f"version={ARTIFACT_VERSION}"
        )

    def render(self, df: pd.DataFrame) -> str:
        """Render a result table as the comment line plus CSV text.

        Args:
            df: Result table

        Returns:
            CSV text with '\\n' line endings and floats written as %.10g
        """
        body = df.to_csv(index=False, float_format="%.10g", lineterminator="\n")
        return f"{self.header_line()}\n{body}"

    def load_table(self, df: pd.DataFrame) -> None:
        """Write a result table to the configured output.

        Args:
            df: Result table

        Raises:
            OSError: If the file cannot be written after retries
        """
        self._write(self.render(df))
        logger.info(f"Wrote {len(df)} result rows to {self.output_path}")

    def load_report(self, text: str) -> None:
        """Write a plain-text report to the configured output."""
        self._write(text if text.endswith("\n") else text + "\n")

    @retry(OSError, tries=3, delay=2.0)
    def _write(self, text: str) -> None:
        if self.output_path is None:
            return
        if self.to_stdout:
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        try:
            with open(self.output_path, "w", newline="", encoding="utf-8") as f:
                f.write(text)
        except OSError as e:
            logger.error(f"IOError while writing to {self.output_path}: {e}")
            raise

    def save_losses(
        self, label: str, losses: NDArray, columns: list[str]
    ) -> Path | None:
        """Save paired per-replication losses as parquet, when enabled.

        Args:
            label: Name of the simulated setting, used in the file name
            losses: Kept replications x estimators loss matrix
            columns: Estimator names, one per column

        Returns:
            Path of the parquet file, or None when --losses-dir is not set
        """
        if self.losses_dir is None:
            return None
        safe_label = "".join(c if c.isalnum() or c in "-_." else "_" for c in label)
        path = Path(self.losses_dir) / f"{self.config.command}_{safe_label}.parquet"
        frame = pd.DataFrame(np.asarray(losses), columns=columns)
        frame.insert(0, "row", np.arange(len(frame)))
        frame.to_parquet(path, index=False, engine="pyarrow", compression="snappy")
        logger.debug(f"Saved {len(frame)} paired losses to {path}")
        return path
