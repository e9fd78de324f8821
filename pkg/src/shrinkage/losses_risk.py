"""Loss functions, Monte-Carlo risk estimation and PRIAL.

Every risk in this package comes out of `simulate_losses`: each replication
draws one canonical sample from its private generator, decomposes it once,
and evaluates all requested estimators on it (common random numbers), so
PRIALs and risk scans are paired comparisons.
"""

from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from typing import NamedTuple, TypeVar

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from src.config.experiment_config import NUMERICS
from src.config.logging_config import get_logger
from src.shrinkage.elliptical_model import (
    CanonicalSample,
    ModelSpec,
    replication_rng,
    sample_canonical,
)
from src.shrinkage.estimators import EstimatorSpec, baseline_a, estimate
from src.shrinkage.matrix_core import (
    EigenSystem,
    SigmaSpec,
    pinv_from_eigen,
    sigma_build,
    spectral_inverse,
    sym_sqrt,
)
from src.utils.error_handling import (
    DegenerateSampleError,
    InvalidInputError,
    NearTieError,
    check_skip_budget,
    skip_on,
)
from src.utils.validation import validate_dimensions

logger = get_logger(__name__)

EstimatorFn = Callable[[CanonicalSample, EigenSystem], NDArray]
T = TypeVar("T")


class LossKind(str, Enum):
    """Loss used to score an estimate of Sigma."""

    DATA_BASED = "data-based"
    QUADRATIC = "quadratic"


def _trace_product(a: NDArray, b: NDArray) -> float:
    """tr(a b) without forming the product."""
    return float(np.sum(a * b.T))


def loss(
    kind: LossKind | str,
    sigma_hat: NDArray,
    sigma: NDArray,
    sigma_inv: NDArray,
    s_pinv: NDArray | None = None,
) -> float:
    """Evaluate the data-based or the quadratic loss of an estimate.

    With D = sigma_hat - sigma the losses are computed in the symmetric forms
    tr(D Sigma^-1 D S+) and tr(D Sigma^-1 D Sigma^-1), which equal
    tr(S+ Sigma (Sigma^-1 sigma_hat - I)^2) and tr((Sigma^-1 sigma_hat - I)^2).

    Args:
        kind: Loss kind
        sigma_hat: p x p estimate
        sigma: p x p true scale matrix
        sigma_inv: Precomputed inverse of sigma
        s_pinv: Moore-Penrose inverse of S, data-based loss only

    Returns:
        Nonnegative loss, up to round-off

    Raises:
        InvalidInputError: On a dimension mismatch or a missing S+
    """
    kind = LossKind(kind)
    p = sigma.shape[0]
    shapes = [sigma_hat.shape, sigma.shape, sigma_inv.shape]
    if kind is LossKind.DATA_BASED:
        if s_pinv is None:
            raise InvalidInputError("the data-based loss needs S+")
        shapes.append(s_pinv.shape)
    if any(shape != (p, p) for shape in shapes):
        raise InvalidInputError(f"loss inputs must all be {p} x {p}, got {shapes}")

    diff = sigma_hat - sigma
    weighted = diff @ sigma_inv @ diff
    weight = s_pinv if kind is LossKind.DATA_BASED else sigma_inv
    return _trace_product(weighted, weight)


@dataclass(frozen=True)
class PrialReport:
    """Paired comparison of a baseline estimator against an alternative.

    Attributes:
        baseline_losses: Per-replication losses of the baseline
        alt_losses: Per-replication losses of the alternative, same draws
        baseline_mean: Mean baseline loss
        alt_mean: Mean alternative loss
        prial_percent: 100 (baseline_mean - alt_mean) / baseline_mean
        std_error_prial: Delta-method standard error of prial_percent
        replications: Number of paired replications
        seed: Base seed of the replications
    """

    baseline_losses: NDArray = field(repr=False)
    alt_losses: NDArray = field(repr=False)
    baseline_mean: float
    alt_mean: float
    prial_percent: float
    std_error_prial: float
    replications: int
    seed: int


def prial(baseline: NDArray, alt: NDArray, seed: int = 0) -> PrialReport:
    """Percentage reduction in average loss of alt relative to baseline.

    The standard error linearizes the ratio of means: with
    R = mean(alt) / mean(baseline) and z_i = alt_i - R baseline_i,
    se = 100 sd(z) / (sqrt(n) mean(baseline)).

    Args:
        baseline: Baseline losses
        alt: Alternative losses on the same draws
        seed: Base seed recorded in the report

    Returns:
        PrialReport

    Raises:
        InvalidInputError: If the lengths differ, are empty, or the baseline
            mean is not positive
    """
    baseline = np.asarray(baseline, dtype=np.float64)
    alt = np.asarray(alt, dtype=np.float64)
    if baseline.ndim != 1 or baseline.shape != alt.shape:
        raise InvalidInputError(
            f"paired losses differ in shape: {baseline.shape} vs {alt.shape}"
        )
    n = baseline.shape[0]
    if n == 0:
        raise InvalidInputError("no replications to compare")

    base_mean = float(baseline.mean())
    alt_mean = float(alt.mean())
    if not base_mean > 0:
        raise InvalidInputError(f"baseline mean loss must be positive, got {base_mean}")

    ratio = alt_mean / base_mean
    if n > 1:
        residual = alt - ratio * baseline
        se = 100.0 * float(residual.std(ddof=1)) / (np.sqrt(n) * base_mean)
    else:
        se = float("nan")

    return PrialReport(
        baseline_losses=baseline,
        alt_losses=alt,
        baseline_mean=base_mean,
        alt_mean=alt_mean,
        prial_percent=100.0 * (1.0 - ratio),
        std_error_prial=se,
        replications=n,
        seed=int(seed),
    )


@dataclass(frozen=True)
class RiskSetting:
    """The fixed design of an experiment: model, Sigma and dimensions.

    Sigma^-1 and Sigma^{1/2} are computed once here and shared by every
    replication.
    """

    model: ModelSpec
    sigma_spec: SigmaSpec
    p: int
    m: int
    sigma: NDArray = field(repr=False, compare=False)
    sigma_inv: NDArray = field(repr=False, compare=False)
    sqrt_sigma: NDArray = field(repr=False, compare=False)

    @classmethod
    def build(
        cls, model: ModelSpec, sigma_spec: SigmaSpec, p: int, m: int
    ) -> "RiskSetting":
        validate_dimensions(p=p, m=m)
        if sigma_spec.p != p:
            raise InvalidInputError(
                f"Sigma is {sigma_spec.p} x {sigma_spec.p}, expected p={p}"
            )
        sigma = sigma_build(sigma_spec)
        return cls(
            model=model,
            sigma_spec=sigma_spec,
            p=p,
            m=m,
            sigma=sigma,
            sigma_inv=spectral_inverse(sigma),
            sqrt_sigma=sym_sqrt(sigma),
        )

    @property
    def v(self) -> int:
        return max(self.p, self.m)

    @property
    def r(self) -> int:
        return min(self.p, self.m)

    @property
    def label(self) -> str:
        return f"{self.model.label}/{self.sigma_spec.kind} p={self.p} m={self.m}"

    def a0(self, loss_kind: LossKind | str = LossKind.DATA_BASED) -> float:
        return baseline_a(self.model, self.p, self.m, LossKind(loss_kind).value)


@dataclass(frozen=True)
class LossTask:
    """One estimator scored under one loss on every replication.

    Attributes:
        estimator: EstimatorSpec, or a callable (sample, eigensystem) -> estimate
        loss_kind: Loss used to score it; also selects the scale a0 of an
            orthogonally invariant estimator
        label: Name used in logs
    """

    estimator: EstimatorSpec | EstimatorFn
    loss_kind: LossKind = LossKind.DATA_BASED
    label: str = ""

    def evaluate(
        self, setting: RiskSetting, sample: CanonicalSample, es: EigenSystem
    ) -> NDArray:
        if isinstance(self.estimator, EstimatorSpec):
            return estimate(self.estimator, sample, es, setting.a0(self.loss_kind))
        return self.estimator(sample, es)


class LossTable(NamedTuple):
    """Paired losses of a simulation: one row per kept replication."""

    losses: NDArray
    skipped: int


@skip_on((DegenerateSampleError, NearTieError), default_value=None)
def _replicate(
    setting: RiskSetting, tasks: Sequence[LossTask], base_seed: int, rep: int
) -> NDArray | None:
    rng = replication_rng(base_seed, rep)
    sample = sample_canonical(
        setting.model,
        setting.p,
        setting.m,
        setting.sigma,
        rng,
        sqrt_sigma=setting.sqrt_sigma,
    )
    es = sample.eigensystem()
    s_pinv = pinv_from_eigen(es)
    row = np.empty(len(tasks))
    for k, task in enumerate(tasks):
        sigma_hat = task.evaluate(setting, sample, es)
        row[k] = loss(
            task.loss_kind, sigma_hat, setting.sigma, setting.sigma_inv, s_pinv
        )
    return row


def simulate_losses(
    setting: RiskSetting,
    tasks: Sequence[LossTask],
    reps: int,
    base_seed: int,
    threads: int = 1,
) -> LossTable:
    """Run the paired Monte-Carlo simulation behind every risk estimate.

    Replication i uses the generator replication_rng(base_seed, i). Results
    are gathered in replication order, so the table does not depend on the
    number of threads.

    Args:
        setting: Fixed design
        tasks: Estimators and losses to evaluate on each draw
        reps: Number of replications
        base_seed: Experiment seed
        threads: Worker threads

    Returns:
        LossTable with a (kept reps) x len(tasks) loss matrix

    Raises:
        ReplicationBudgetError: If 1 % or more of the replications were skipped
    """
    if not tasks:
        raise InvalidInputError("no estimators to simulate")
    logger.debug(
        f"Simulating {reps} replications of {setting.label} "
        f"for {len(tasks)} estimators"
    )

    work = partial(_replicate, setting, tuple(tasks), base_seed)
    kept, skipped = map_replications(work, reps, threads)
    losses = np.vstack(kept) if kept else np.empty((0, len(tasks)))
    return LossTable(losses=losses, skipped=skipped)


def map_replications(
    work: Callable[[int], T | None], reps: int, threads: int = 1
) -> tuple[list[T], int]:
    """Run work(0..reps-1) on a thread pool, keeping results in index order.

    Args:
        work: Replication function returning None for a skipped replication
        reps: Number of replications
        threads: Worker threads

    Returns:
        (kept results in replication order, number skipped)

    Raises:
        ReplicationBudgetError: If 1 % or more of the replications were skipped
    """
    validate_dimensions(reps=reps, threads=threads)
    if threads == 1:
        results = list(map(work, range(reps)))
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(work, range(reps)))

    kept = [result for result in results if result is not None]
    skipped = reps - len(kept)
    check_skip_budget(skipped, reps, NUMERICS["max_skip_fraction"])
    return kept, skipped


class RiskEstimate(NamedTuple):
    mean: float
    std_error: float
    losses: NDArray


def mc_risk(
    model: ModelSpec,
    sigma_spec: SigmaSpec,
    p: int,
    m: int,
    estimator: EstimatorSpec | EstimatorFn,
    loss_kind: LossKind | str = LossKind.DATA_BASED,
    reps: int = 1000,
    base_seed: int = 0,
    threads: int = 1,
) -> RiskEstimate:
    """Monte-Carlo risk of one estimator.

    Args:
        model: Sampling distribution
        sigma_spec: Structure of Sigma
        p: Dimension
        m: Residual rows
        estimator: Estimator to score
        loss_kind: Loss
        reps: Replications, at least 2
        base_seed: Experiment seed
        threads: Worker threads

    Returns:
        (mean, stdev / sqrt(kept reps), per-replication losses)
    """
    if reps < 2:
        raise InvalidInputError(f"mc_risk needs reps >= 2, got {reps}")
    setting = RiskSetting.build(model, sigma_spec, p, m)
    task = LossTask(estimator, LossKind(loss_kind))
    table = simulate_losses(setting, [task], reps, base_seed, threads)
    losses = table.losses[:, 0]
    std_error = float(losses.std(ddof=1) / np.sqrt(losses.shape[0]))
    return RiskEstimate(float(losses.mean()), std_error, losses)


class ScanResult(NamedTuple):
    table: pd.DataFrame
    argmin: float


def risk_optimality_scan(
    model: ModelSpec,
    sigma_spec: SigmaSpec,
    p: int,
    m: int,
    a_grid: Sequence[float],
    loss_kind: LossKind | str = LossKind.DATA_BASED,
    reps: int = 5000,
    seed: int = 0,
    threads: int = 1,
) -> ScanResult:
    """Paired risks of the usual estimators a S over a grid of constants.

    The same draws score every a, so the empirical risk curve is an exact
    parabola in a.

    Args:
        model: Sampling distribution
        sigma_spec: Structure of Sigma
        p: Dimension
        m: Residual rows
        a_grid: Positive constants to compare
        loss_kind: Loss
        reps: Replications
        seed: Experiment seed
        threads: Worker threads

    Returns:
        ScanResult with a table of (a, mean_risk, std_error) and the grid
        point of smallest mean risk
    """
    grid = [float(a) for a in a_grid]
    if not grid:
        raise InvalidInputError("a_grid is empty")
    kind = LossKind(loss_kind)
    setting = RiskSetting.build(model, sigma_spec, p, m)
    tasks = [LossTask(EstimatorSpec.usual(a), kind, label=f"a={a:g}") for a in grid]
    losses = simulate_losses(setting, tasks, reps, seed, threads).losses

    n = losses.shape[0]
    table = pd.DataFrame(
        {
            "a": grid,
            "mean_risk": losses.mean(axis=0),
            "std_error": losses.std(axis=0, ddof=1) / np.sqrt(n),
        }
    )
    argmin = float(table["a"].iloc[int(np.argmin(table["mean_risk"].to_numpy()))])
    logger.debug(f"Risk scan on {setting.label}: argmin a = {argmin:.6g}")
    return ScanResult(table, argmin)


def usual_risk_expansion(a: float, k_star: float, r: int, v: int, e_tr: float) -> float:
    """Risk a^2 K* r v - 2 a r + E[tr(S+ Sigma)] of the usual estimator a S."""
    return a * a * k_star * r * v - 2.0 * a * r + e_tr
