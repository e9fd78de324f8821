"""Usual and orthogonally invariant estimators of the scale matrix.

The usual estimators are a S. The orthogonally invariant estimators shrink
the spectrum of S = H L H^T through a diagonal Psi(L):

    Sigma_Psi = a0 H L (I_r + Psi(L)) H^T

with a0 the optimal constant of the loss in use. Four psi-families are
provided (Haff, James-Stein, Efron-Morris-Dey, Zero) plus a Constant family
used by the Stein-Haff identity checks.
"""

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from scipy.special import logsumexp

from src.config.experiment_config import NUMERICS
from src.shrinkage.elliptical_model import CanonicalSample, ModelSpec, k_star
from src.shrinkage.matrix_core import EigenSystem
from src.utils.error_handling import DegenerateSampleError, InvalidInputError
from src.utils.validation import validate_dimensions, validate_positive_spectrum

PsiFamily = Literal["haff", "james-stein", "efron-morris-dey", "zero", "constant"]


@dataclass(frozen=True)
class ShrinkagePsi:
    """A psi-family mapping a spectrum L to diag(psi_1, ..., psi_r).

    Attributes:
        family: Family name
        alpha: Exponent of the Haff and Efron-Morris-Dey families
        b: Shrink weight of the Haff and Efron-Morris-Dey families
        value: Constant of the Constant family
    """

    family: PsiFamily
    alpha: float = 1.0
    b: float = 0.0
    value: float = 0.0

    def __post_init__(self) -> None:
        if self.family == "haff" and not (self.alpha > 0 and self.b > 0):
            raise InvalidInputError(
                f"Haff family needs alpha > 0 and b > 0, got {self}"
            )
        if self.family == "efron-morris-dey" and not (self.alpha > 0 and self.b > 0):
            raise InvalidInputError(
                f"Efron-Morris-Dey needs alpha > 0 and b > 0, got {self}"
            )

    @classmethod
    def haff(cls, alpha: float, b: float) -> "ShrinkagePsi":
        return cls("haff", alpha=float(alpha), b=float(b))

    @classmethod
    def james_stein(cls) -> "ShrinkagePsi":
        return cls("james-stein")

    @classmethod
    def efron_morris_dey(cls, alpha: float, b: float) -> "ShrinkagePsi":
        return cls("efron-morris-dey", alpha=float(alpha), b=float(b))

    @classmethod
    def zero(cls) -> "ShrinkagePsi":
        return cls("zero")

    @classmethod
    def constant(cls, value: float) -> "ShrinkagePsi":
        return cls("constant", value=float(value))

    @property
    def certified_alpha(self) -> bool:
        """Whether alpha lies in the range covered by the improvement condition."""
        return self.family == "haff" and self.alpha >= 1

    def derivatives(self, spectrum: NDArray, v: int) -> NDArray:
        """Vector of d psi_i / d l_i, i = 1..r."""
        spectrum = validate_positive_spectrum(spectrum)
        return _analytic_derivatives(self, spectrum, v)


@dataclass(frozen=True)
class EstimatorSpec:
    """An estimator of Sigma: usual a S, or orthogonally invariant Sigma_Psi.

    Attributes:
        kind: "usual" or "orth-invariant"
        a: Constant of the usual estimator
        psi: Psi-family of the orthogonally invariant estimator, whose scale
            is always the optimal constant a0 of the loss in use
    """

    kind: Literal["usual", "orth-invariant"]
    a: float | None = None
    psi: ShrinkagePsi | None = None

    def __post_init__(self) -> None:
        if self.kind == "usual" and not (self.a is not None and self.a > 0):
            raise InvalidInputError(f"usual estimator needs a > 0, got {self.a}")
        if self.kind == "orth-invariant" and self.psi is None:
            raise InvalidInputError(
                "orthogonally invariant estimator needs a psi-family"
            )

    @classmethod
    def usual(cls, a: float) -> "EstimatorSpec":
        return cls("usual", a=float(a))

    @classmethod
    def orth_invariant(cls, psi: ShrinkagePsi) -> "EstimatorSpec":
        return cls("orth-invariant", psi=psi)


def _log_weights(spectrum: NDArray, exponent: float) -> NDArray:
    """log of l_i^exponent / sum_j l_j^exponent, computed without overflow."""
    logs = exponent * np.log(spectrum)
    return logs - logsumexp(logs)


def _check_spectrum(spectrum: NDArray, v: int, r: int) -> NDArray:
    spectrum = validate_positive_spectrum(spectrum)
    validate_dimensions(v=int(v), r=int(r))
    if spectrum.shape[0] != r:
        raise InvalidInputError(
            f"spectrum has {spectrum.shape[0]} values, expected r={r}"
        )
    return spectrum


def psi_eval(psi: ShrinkagePsi, spectrum: NDArray, v: int, r: int) -> NDArray:
    """Evaluate psi_1..psi_r on a spectrum.

    Args:
        psi: Psi-family
        spectrum: Positive eigenvalues l_1 >= ... >= l_r
        v: max(p, m)
        r: Rank, the length of the spectrum

    Returns:
        Length-r vector of psi_i

    Raises:
        InvalidInputError: If an eigenvalue is nonpositive or r mismatches
    """
    spectrum = _check_spectrum(spectrum, v, r)
    if psi.family == "haff":
        return psi.b * np.exp(_log_weights(spectrum, -psi.alpha))
    if psi.family == "james-stein":
        i = np.arange(1, r + 1)
        return 1.0 / (v + r - 2 * i + 1)
    if psi.family == "efron-morris-dey":
        weights = np.exp(_log_weights(spectrum, psi.alpha))
        return 1.0 / ((1.0 + psi.b * weights) * v)
    if psi.family == "zero":
        return np.zeros(r)
    return np.full(r, psi.value)


def _analytic_derivatives(psi: ShrinkagePsi, spectrum: NDArray, v: int) -> NDArray:
    if psi.family == "haff":
        weights = np.exp(_log_weights(spectrum, -psi.alpha))
        return psi.b * psi.alpha * weights * (weights - 1.0) / spectrum
    if psi.family == "efron-morris-dey":
        weights = np.exp(_log_weights(spectrum, psi.alpha))
        dweights = psi.alpha * weights * (1.0 - weights) / spectrum
        return -psi.b * dweights / (v * (1.0 + psi.b * weights) ** 2)
    return np.zeros(spectrum.shape[0])


def psi_derivative(
    psi: ShrinkagePsi,
    spectrum: NDArray,
    v: int,
    r: int,
    i: int,
    method: Literal["analytic", "finite-difference"] = "analytic",
) -> float:
    """Partial derivative d psi_i / d l_i.

    Args:
        psi: Psi-family
        spectrum: Positive eigenvalues l_1 >= ... >= l_r
        v: max(p, m)
        r: Rank, the length of the spectrum
        i: One-based index of the eigenvalue
        method: "analytic" or the central finite-difference fallback with step
            max(1e-6, 1e-6 l_i)

    Returns:
        The derivative (nonpositive for the Haff family)
    """
    spectrum = _check_spectrum(spectrum, v, r)
    if not 1 <= i <= r:
        raise InvalidInputError(f"index i must lie in 1..{r}, got {i}")
    if method == "analytic":
        return float(_analytic_derivatives(psi, spectrum, v)[i - 1])
    return float(finite_difference_derivatives(psi, spectrum, v)[i - 1])


def finite_difference_derivatives(
    psi: ShrinkagePsi, spectrum: NDArray, v: int
) -> NDArray:
    """Central finite differences of psi_i in l_i, for every i."""
    spectrum = validate_positive_spectrum(spectrum)
    r = spectrum.shape[0]
    steps = np.maximum(NUMERICS["fd_step"], NUMERICS["fd_step"] * spectrum)
    result = np.empty(r)
    for k in range(r):
        up, down = spectrum.copy(), spectrum.copy()
        up[k] += steps[k]
        down[k] -= steps[k]
        rise = psi_eval(psi, up, v, r)[k] - psi_eval(psi, down, v, r)[k]
        result[k] = rise / (2 * steps[k])
    return result


def trace_lower_bound(psi: ShrinkagePsi, v: int, r: int) -> float:
    """A constant lambda with tr(Psi(L)) >= lambda for every spectrum.

    Args:
        psi: Psi-family
        v: max(p, m)
        r: Rank

    Returns:
        b (Haff), 1/(v+r-1) (James-Stein), r/((b+1) v) (Efron-Morris-Dey),
        0 (Zero), r c (Constant c)
    """
    if psi.family == "haff":
        return psi.b
    if psi.family == "james-stein":
        return 1.0 / (v + r - 1)
    if psi.family == "efron-morris-dey":
        return r / ((psi.b + 1.0) * v)
    if psi.family == "zero":
        return 0.0
    return r * psi.value


def optimal_a(model: ModelSpec, p: int, m: int) -> float:
    """Optimal constant a0 = 1 / (K* max(p, m)) under the data-based loss."""
    validate_dimensions(p=p, m=m)
    return 1.0 / (k_star(model) * max(p, m))


def quadratic_loss_a(model: ModelSpec, p: int, m: int) -> float:
    """Optimal constant 1 / (K* (p + m + 1)) under the quadratic loss."""
    validate_dimensions(p=p, m=m)
    return 1.0 / (k_star(model) * (p + m + 1))


def baseline_a(model: ModelSpec, p: int, m: int, loss_kind: str) -> float:
    """Optimal constant of the usual estimator for the loss in use.

    Args:
        model: Sampling distribution
        p: Dimension
        m: Residual rows
        loss_kind: "data-based" or "quadratic"

    Returns:
        optimal_a or quadratic_loss_a
    """
    if str(loss_kind) == "quadratic":
        return quadratic_loss_a(model, p, m)
    return optimal_a(model, p, m)


def b0_bound(v: int, r: int) -> float:
    """Largest Haff weight b certified under the data-based loss, 2(r-1)/(v-r+1)."""
    _check_bound_args(v, r)
    return 2.0 * (r - 1) / (v - r + 1)


def b1_bound(v: int, r: int) -> float:
    """Konno's bound under the quadratic loss, 2(r-1)(v+r+1)/((v-r+1)(v-r+3))."""
    _check_bound_args(v, r)
    return 2.0 * (r - 1) * (v + r + 1) / ((v - r + 1) * (v - r + 3))


def _check_bound_args(v: int, r: int) -> None:
    validate_dimensions(v=int(v), r=int(r))
    if v < r:
        raise InvalidInputError(f"need v >= r, got v={v}, r={r}")


def estimate(
    spec: EstimatorSpec,
    sample: CanonicalSample,
    es: EigenSystem,
    a0: float,
) -> NDArray:
    """Evaluate an estimator on one sample.

    Args:
        spec: Estimator
        sample: Canonical sample holding S
        es: Truncated eigendecomposition of sample.S
        a0: Scale of the orthogonally invariant estimator

    Returns:
        p x p symmetric PSD estimate of Sigma

    Raises:
        DegenerateSampleError: If the sample has rank 0
    """
    if spec.kind == "usual":
        return spec.a * sample.S
    if es.r == 0:
        raise DegenerateSampleError("cannot shrink a rank-0 sample")
    p, m, _ = sample.dims
    psi = psi_eval(spec.psi, es.L, max(p, m), es.r)
    shrunk = (es.H * (a0 * es.L * (1.0 + psi))) @ es.H.T
    return (shrunk + shrunk.T) / 2
