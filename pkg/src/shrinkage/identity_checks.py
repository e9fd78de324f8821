"""Numerical checks of the Stein-Haff identity and the g(Psi) improvement bound.

For an orthogonally invariant G = H L Phi(L) H^T the Stein-Haff identity reads

    E[tr(Sigma^-1 H L Phi H^T)]
        = K* E*[ sum_i ( (v-r+1) phi_i + 2 l_i dphi_i/dl_i
                         + sum_{j!=i} (l_i phi_i - l_j phi_j)/(l_i - l_j) ) ]

where E* samples under the companion density. In the Gaussian model K* = 1
and E* = E, so both sides can be estimated from the same draws.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from functools import partial
from typing import Literal, NamedTuple

import numpy as np
from numpy.typing import NDArray

from src.config.experiment_config import NUMERICS
from src.config.logging_config import get_logger
from src.shrinkage.elliptical_model import (
    ModelSpec,
    k_star,
    replication_rng,
    sample_canonical,
    sample_companion_mixing,
    sample_noise,
)
from src.shrinkage.estimators import (
    ShrinkagePsi,
    b0_bound,
    finite_difference_derivatives,
    psi_eval,
)
from src.shrinkage.losses_risk import map_replications
from src.shrinkage.matrix_core import (
    eigen_sym_truncated,
    gram,
    spectral_inverse,
    sym_sqrt,
)
from src.utils.error_handling import (
    DegenerateSampleError,
    InvalidInputError,
    NearTieError,
    skip_on,
)
from src.utils.validation import validate_positive_spectrum

logger = get_logger(__name__)

DerivativeMethod = Literal["analytic", "finite-difference"]


@dataclass(frozen=True)
class IdentityCheckResult:
    """Monte-Carlo estimates of both sides of an identity.

    Attributes:
        lhs_mean: Mean of the left-hand side
        lhs_se: Standard error of lhs_mean
        rhs_mean: Mean of the right-hand side
        rhs_se: Standard error of rhs_mean
        z_score: (lhs_mean - rhs_mean) / sqrt(lhs_se^2 + rhs_se^2)
        reps: Replications kept
        skipped: Replications rejected as near-tied or degenerate
    """

    lhs_mean: float
    lhs_se: float
    rhs_mean: float
    rhs_se: float
    z_score: float
    reps: int
    skipped: int = 0

    @property
    def passed(self) -> bool:
        return abs(self.z_score) < NUMERICS["z_gate"]

    @classmethod
    def from_samples(
        cls, lhs: NDArray, rhs: NDArray, skipped: int = 0
    ) -> "IdentityCheckResult":
        n = lhs.shape[0]
        lhs_se = float(lhs.std(ddof=1) / np.sqrt(n))
        rhs_se = float(rhs.std(ddof=1) / np.sqrt(rhs.shape[0]))
        gap = float(lhs.mean() - rhs.mean())
        spread = np.hypot(lhs_se, rhs_se)
        if spread > 0:
            z_score = gap / spread
        else:
            z_score = 0.0 if gap == 0 else float(np.copysign(np.inf, gap))
        return cls(
            lhs_mean=float(lhs.mean()),
            lhs_se=lhs_se,
            rhs_mean=float(rhs.mean()),
            rhs_se=rhs_se,
            z_score=z_score,
            reps=n,
            skipped=skipped,
        )


def check_spectrum_gaps(spectrum: NDArray) -> NDArray:
    """Reject spectra whose divided differences are ill-conditioned.

    Args:
        spectrum: Positive eigenvalues in decreasing order

    Returns:
        The spectrum as a float64 array

    Raises:
        InvalidInputError: If an eigenvalue is nonpositive or the order is wrong
        NearTieError: If two consecutive eigenvalues differ by at most tie_tol * l_1
    """
    spectrum = validate_positive_spectrum(spectrum)
    gaps = -np.diff(spectrum)
    if np.any(gaps < 0):
        raise InvalidInputError("spectrum must be in decreasing order")
    if np.any(gaps <= NUMERICS["tie_tol"] * spectrum[0]):
        raise NearTieError(f"eigenvalue gap {gaps.min():.3e} below tie tolerance")
    return spectrum


def _derivatives(
    psi: ShrinkagePsi, spectrum: NDArray, v: int, method: DerivativeMethod
) -> NDArray:
    if method == "finite-difference":
        return finite_difference_derivatives(psi, spectrum, v)
    return psi.derivatives(spectrum, v)


def _divided_sums(numerator: NDArray, spectrum: NDArray) -> NDArray:
    """Row sums over j != i of numerator[i, j] / (l_i - l_j)."""
    denominator = np.subtract.outer(spectrum, spectrum)
    np.fill_diagonal(denominator, 1.0)
    ratios = numerator / denominator
    np.fill_diagonal(ratios, 0.0)
    return ratios.sum(axis=1)


def corollary_rhs_integrand(
    spectrum: NDArray,
    phi: ShrinkagePsi,
    v: int,
    r: int,
    method: DerivativeMethod = "analytic",
) -> float:
    """Divergence term of the orthogonally invariant Stein-Haff identity.

    Args:
        spectrum: Eigenvalues l_1 > ... > l_r > 0
        phi: Family defining Phi(L)
        v: max(p, m)
        r: Rank
        method: How dphi_i/dl_i is computed

    Returns:
        sum_i ((v-r+1) phi_i + 2 l_i dphi_i
               + sum_{j!=i} (l_i phi_i - l_j phi_j)/(l_i - l_j))

    Raises:
        NearTieError: If two eigenvalues are closer than the tie tolerance
    """
    spectrum = check_spectrum_gaps(spectrum)
    values = psi_eval(phi, spectrum, v, r)
    derivatives = _derivatives(phi, spectrum, v, method)
    weighted = spectrum * values
    cross = _divided_sums(np.subtract.outer(weighted, weighted), spectrum)
    return float(np.sum((v - r + 1) * values + 2.0 * spectrum * derivatives + cross))


@skip_on((DegenerateSampleError, NearTieError), default_value=None)
def _stein_haff_replicate(
    model: ModelSpec,
    sigma: NDArray,
    sigma_inv: NDArray,
    sqrt_sigma: NDArray,
    p: int,
    m: int,
    phi: ShrinkagePsi,
    seed: int,
    rep: int,
) -> tuple[float, float]:
    rng = replication_rng(seed, rep)
    sample = sample_canonical(model, p, m, sigma, rng, sqrt_sigma)
    es = sample.eigensystem()
    values = psi_eval(phi, es.L, max(p, m), es.r)
    g = (es.H * (es.L * values)) @ es.H.T
    lhs = float(np.sum(sigma_inv * g))
    rhs = corollary_rhs_integrand(es.L, phi, max(p, m), es.r)
    return lhs, rhs


def stein_haff_check(
    sigma: NDArray,
    p: int,
    m: int,
    phi: ShrinkagePsi,
    reps: int,
    seed: int,
    threads: int = 1,
) -> IdentityCheckResult:
    """Paired Monte-Carlo check of the Stein-Haff identity, Gaussian model.

    Each draw contributes lhs = tr(Sigma^-1 H L Phi H^T) and the divergence
    term of the same spectrum.

    Args:
        sigma: p x p scale matrix
        p: Dimension
        m: Residual rows
        phi: Family defining Phi(L)
        reps: Replications
        seed: Experiment seed
        threads: Worker threads

    Returns:
        IdentityCheckResult; the identity holds when |z| < 4

    Raises:
        ReplicationBudgetError: If 1 % or more of the draws were near-tied
    """
    model = ModelSpec.gaussian()
    work = partial(
        _stein_haff_replicate,
        model,
        sigma,
        spectral_inverse(sigma),
        sym_sqrt(sigma),
        p,
        m,
        phi,
        seed,
    )
    kept, skipped = map_replications(work, reps, threads)
    pairs = np.asarray(kept)
    result = IdentityCheckResult.from_samples(pairs[:, 0], pairs[:, 1], skipped)
    logger.debug(f"Stein-Haff check p={p} m={m} {phi.family}: z = {result.z_score:.3f}")
    return result


@skip_on((DegenerateSampleError, NearTieError), default_value=None)
def _companion_replicate(
    model: ModelSpec,
    sigma: NDArray,
    sqrt_sigma: NDArray,
    p: int,
    m: int,
    phi: ShrinkagePsi,
    seed: int,
    rep: int,
) -> float:
    rng = replication_rng(seed, rep, stream=1)
    mixing = sample_companion_mixing(model, rng)
    u = sample_noise(model, m, sigma, sqrt_sigma, rng, mixing=mixing)
    es = eigen_sym_truncated(gram(u), max_rank=min(p, m))
    return corollary_rhs_integrand(es.L, phi, max(p, m), es.r)


def stein_haff_check_elliptical(
    model: ModelSpec,
    sigma: NDArray,
    p: int,
    m: int,
    phi: ShrinkagePsi,
    reps: int,
    seed: int,
    threads: int = 1,
) -> IdentityCheckResult:
    """Stein-Haff check for any model, with the divergence under the companion law.

    The left side is sampled under the model and the right side under the
    companion mixing law, then multiplied by K*. The two samples are
    independent, so the z-score is unpaired and this check is informational.

    Args:
        model: Sampling distribution
        sigma: p x p scale matrix
        p: Dimension
        m: Residual rows
        phi: Family defining Phi(L)
        reps: Replications of each side
        seed: Experiment seed
        threads: Worker threads

    Returns:
        IdentityCheckResult
    """
    sigma_inv = spectral_inverse(sigma)
    sqrt_sigma = sym_sqrt(sigma)
    lhs_work = partial(
        _stein_haff_replicate, model, sigma, sigma_inv, sqrt_sigma, p, m, phi, seed
    )
    rhs_work = partial(_companion_replicate, model, sigma, sqrt_sigma, p, m, phi, seed)

    lhs_kept, lhs_skipped = map_replications(lhs_work, reps, threads)
    rhs_kept, rhs_skipped = map_replications(rhs_work, reps, threads)
    lhs = np.asarray([pair[0] for pair in lhs_kept])
    rhs = k_star(model) * np.asarray(rhs_kept)
    return IdentityCheckResult.from_samples(lhs, rhs, lhs_skipped + rhs_skipped)


def g_psi(
    spectrum: NDArray,
    psi: ShrinkagePsi,
    v: int,
    r: int,
    lam: float,
    symmetrized: bool = False,
    method: DerivativeMethod = "analytic",
) -> float:
    """Upper-bound function g(Psi) of the risk difference.

    Evaluated term by term as

        sum_i { 2(v-r+1) psi_i + (v-r+1) psi_i^2 + 4 l_i (1+psi_i) dpsi_i/dl_i
                + sum_{j!=i} (l_i (2 psi_i + psi_i^2) - l_j (2 psi_j + psi_i^2))
                             / (l_i - l_j)
                - 2 v lam }

    The symmetrized variant uses psi_j^2 in the l_j numerator term. When the
    two variants differ by more than variant_tol the gap is logged.

    Args:
        spectrum: Eigenvalues l_1 > ... > l_r > 0
        psi: Psi-family
        v: max(p, m)
        r: Rank
        lam: Trace lower bound of the family, see trace_lower_bound
        symmetrized: Use psi_j^2 in the l_j numerator term
        method: How dpsi_i/dl_i is computed

    Returns:
        g(Psi); a nonpositive value certifies improvement over a0 S

    Raises:
        NearTieError: If two eigenvalues are closer than the tie tolerance
    """
    spectrum = check_spectrum_gaps(spectrum)
    values = psi_eval(psi, spectrum, v, r)
    derivatives = _derivatives(psi, spectrum, v, method)
    c = v - r + 1

    own = spectrum * (2.0 * values + values**2)
    twice = 2.0 * spectrum * values
    printed = np.subtract.outer(own, twice) - np.outer(values**2, spectrum)
    symmetric = np.subtract.outer(own, own)

    diagonal = (
        2 * c * values
        + c * values**2
        + 4.0 * spectrum * (1.0 + values) * derivatives
        - 2.0 * v * lam
    )
    g_printed = float(np.sum(diagonal + _divided_sums(printed, spectrum)))
    g_symmetric = float(np.sum(diagonal + _divided_sums(symmetric, spectrum)))
    if abs(g_printed - g_symmetric) > NUMERICS["variant_tol"]:
        logger.debug(
            f"g(Psi) variants differ: printed {g_printed:.6g}, "
            f"symmetrized {g_symmetric:.6g}"
        )
    return g_symmetric if symmetrized else g_printed


def haff_improvement_margin(v: int, r: int, b: float) -> float:
    """Spectrum-free bound -2(r-1) b + (v-r+1) b^2 on g(Psi) for the Haff family."""
    if not b > 0:
        raise InvalidInputError(f"b must be > 0, got {b}")
    return -2.0 * (r - 1) * b + (v - r + 1) * b * b


class CertificateResult(NamedTuple):
    worst_excess: float
    max_margin: float
    trials: int
    resampled: int


def random_spectrum(
    r: int, rng: np.random.Generator, low: float = 1e-3, high: float = 1e3
) -> NDArray:
    """Log-uniform eigenvalues on [low, high], in decreasing order."""
    return np.sort(np.exp(rng.uniform(np.log(low), np.log(high), size=r)))[::-1]


def certify_haff_bound(
    v: int,
    r: int,
    trials: int,
    rng: np.random.Generator,
    alpha_range: Sequence[float] = (1.0, 10.0),
) -> CertificateResult:
    """Compare g(Psi) of the Haff family with its improvement margin.

    Draws random (spectrum, alpha, b) triples with alpha uniform on
    alpha_range and b uniform on (0, b0], resampling near-tied spectra.

    Args:
        v: max(p, m)
        r: Rank, at least 2
        trials: Number of triples
        rng: Generator of the sweep
        alpha_range: Range of alpha

    Returns:
        CertificateResult with the largest g - margin and the largest margin;
        the bound is certified when both are <= 1e-9
    """
    b0 = b0_bound(v, r)
    if not b0 > 0:
        raise InvalidInputError(f"b0({v}, {r}) = 0 leaves no improvement range")

    worst_excess = -np.inf
    max_margin = -np.inf
    resampled = 0
    done = 0
    while done < trials:
        spectrum = random_spectrum(r, rng)
        alpha = rng.uniform(*alpha_range)
        b = b0 * (1.0 - rng.uniform())
        psi = ShrinkagePsi.haff(alpha, b)
        try:
            g = g_psi(spectrum, psi, v, r, lam=b)
        except NearTieError:
            resampled += 1
            continue
        margin = haff_improvement_margin(v, r, b)
        worst_excess = max(worst_excess, g - margin)
        max_margin = max(max_margin, margin)
        done += 1

    return CertificateResult(float(worst_excess), float(max_margin), trials, resampled)
