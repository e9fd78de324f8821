"""Sampling from the elliptical model and the canonical reduction.

The noise matrix of the regression model is a variance mixture of normals:
one mixing value v is drawn per matrix, then E = sqrt(v) G Sigma^{1/2} with
G standard normal. The Gaussian model fixes v = 1; the Student-t model with
k degrees of freedom draws v from the inverse-gamma IG(k/2, k/2).
"""

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from scipy import linalg

from src.config.experiment_config import NUMERICS
from src.shrinkage.matrix_core import EigenSystem, eigen_sym_truncated, gram, sym_sqrt
from src.utils.error_handling import InvalidInputError
from src.utils.validation import validate_dimensions

ModelKind = Literal["gaussian", "student"]


@dataclass(frozen=True)
class ModelSpec:
    """Sampling distribution of the noise matrix.

    Attributes:
        kind: "gaussian" or "student"
        df: Degrees of freedom k > 2, Student-t only
    """

    kind: ModelKind = "gaussian"
    df: float | None = None

    def __post_init__(self) -> None:
        if self.kind == "student":
            if self.df is None or not self.df > 2:
                raise InvalidInputError(f"Student-t model needs df > 2, got {self.df}")
        elif self.kind != "gaussian":
            raise InvalidInputError(f"unknown model kind {self.kind!r}")

    @classmethod
    def gaussian(cls) -> "ModelSpec":
        return cls("gaussian")

    @classmethod
    def student_t(cls, df: float) -> "ModelSpec":
        return cls("student", float(df))

    @property
    def label(self) -> str:
        return "gaussian" if self.kind == "gaussian" else f"student({self.df:g})"


@dataclass(frozen=True)
class CanonicalSample:
    """One draw of the canonical form (Z, U) with S = U^T U.

    Attributes:
        U: m x p residual block
        S: p x p Gram matrix of U
        Z: q x p mean block, regression path only
        theta: q x p mean of Z, when known
    """

    U: NDArray
    S: NDArray
    Z: NDArray | None = None
    theta: NDArray | None = None

    @property
    def dims(self) -> tuple[int, int, int]:
        """(p, m, q), with q = 0 when the mean block is absent."""
        m, p = self.U.shape
        q = 0 if self.Z is None else int(self.Z.shape[0])
        return p, m, q

    def eigensystem(self, rank_tol: float | None = None) -> EigenSystem:
        p, m, _ = self.dims
        return eigen_sym_truncated(self.S, rank_tol=rank_tol, max_rank=min(p, m))


def replication_rng(base_seed: int, rep: int, stream: int = 0) -> np.random.Generator:
    """Private generator of one replication.

    The seed sequence mixes (base_seed, rep, stream) into 128 bits of PCG64
    state, so replications can run in any order on any number of threads.

    Args:
        base_seed: Experiment seed
        rep: Replication index
        stream: Independent stream within the replication

    Returns:
        Seeded numpy Generator
    """
    seed_seq = np.random.SeedSequence([base_seed, rep, stream])
    return np.random.Generator(np.random.PCG64(seed_seq))


def k_star(model: ModelSpec) -> float:
    """Normalizing constant K* of the F*-companion density.

    Args:
        model: Sampling distribution

    Returns:
        1 for the Gaussian model, k / (k - 2) for Student-t(k)
    """
    if model.kind == "gaussian":
        return 1.0
    return model.df / (model.df - 2.0)


def sample_mixing(model: ModelSpec, rng: np.random.Generator) -> float:
    """Draw the mixing variable v of one noise matrix.

    Args:
        model: Sampling distribution
        rng: Generator of the replication

    Returns:
        1 for the Gaussian model; 1/g with g ~ Gamma(shape k/2, rate k/2)
        for Student-t(k)
    """
    if model.kind == "gaussian":
        return 1.0
    half = model.df / 2.0
    return 1.0 / rng.gamma(shape=half, scale=1.0 / half)


def sample_companion_mixing(model: ModelSpec, rng: np.random.Generator) -> float:
    """Draw the mixing variable of the F*-companion density.

    The companion mixing density is v h(v) / K*; for h = IG(k/2, k/2) this is
    IG(k/2 - 1, k/2).

    Args:
        model: Sampling distribution
        rng: Generator of the replication

    Returns:
        1 for the Gaussian model; 1/g with g ~ Gamma(k/2 - 1, rate k/2) for
        Student-t(k)
    """
    if model.kind == "gaussian":
        return 1.0
    half = model.df / 2.0
    return 1.0 / rng.gamma(shape=half - 1.0, scale=1.0 / half)


def sample_noise(
    model: ModelSpec,
    rows: int,
    sigma: NDArray,
    sqrt_sigma: NDArray,
    rng: np.random.Generator,
    mixing: float | None = None,
) -> NDArray:
    """Draw a rows x p noise matrix sharing one mixing value.

    Args:
        model: Sampling distribution
        rows: Number of rows
        sigma: p x p scale matrix
        sqrt_sigma: Symmetric square root of sigma
        rng: Generator of the replication
        mixing: Mixing value to use instead of drawing one

    Returns:
        sqrt(v) * G @ sqrt_sigma with G iid standard normal
    """
    validate_dimensions(rows=rows)
    p = sigma.shape[0]
    v = sample_mixing(model, rng) if mixing is None else mixing
    normals = rng.standard_normal((rows, p))
    return np.sqrt(v) * (normals @ sqrt_sigma)


def canonical_reduce(
    y: NDArray, x: NDArray, beta: NDArray | None = None
) -> CanonicalSample:
    """Canonical form of the regression model Y = X beta + E.

    Completes the QR factorization of X to a full orthogonal Q = (Q1 Q2) and
    returns Z = Q1^T Y, U = Q2^T Y and S = U^T U = Y^T (I - P_X) Y.

    Args:
        y: n x p response matrix
        x: n x q design matrix of full column rank
        beta: q x p coefficients, when known

    Returns:
        CanonicalSample with Z set, and theta = Q1^T X beta when beta is given

    Raises:
        InvalidInputError: If the shapes disagree, q >= n, or X is rank deficient
    """
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if y.ndim != 2 or x.ndim != 2 or y.shape[0] != x.shape[0]:
        raise InvalidInputError(f"Y {y.shape} and X {x.shape} must share their rows")
    n, q = x.shape
    if q >= n:
        raise InvalidInputError(f"need q < n for a residual block, got q={q}, n={n}")

    q_full, r_factor = linalg.qr(x, mode="full")
    diag = np.abs(np.diag(r_factor[:q]))
    if diag.size and diag.min() <= NUMERICS["qr_rank_tol"] * max(diag.max(), 1e-300):
        raise InvalidInputError("X must have full column rank")

    q1 = q_full[:, :q]
    u = q_full[:, q:].T @ y
    theta = None if beta is None else q1.T @ (x @ beta)
    return CanonicalSample(U=u, S=gram(u), Z=q1.T @ y, theta=theta)


def sample_canonical(
    model: ModelSpec,
    p: int,
    m: int,
    sigma: NDArray,
    rng: np.random.Generator,
    sqrt_sigma: NDArray | None = None,
) -> CanonicalSample:
    """Draw U directly from its marginal law, the fast benchmark path.

    Args:
        model: Sampling distribution
        p: Dimension
        m: Number of residual rows
        sigma: p x p scale matrix
        rng: Generator of the replication
        sqrt_sigma: Precomputed symmetric square root of sigma

    Returns:
        CanonicalSample with S = gram(U) and no mean block
    """
    validate_dimensions(p=p, m=m)
    if sqrt_sigma is None:
        sqrt_sigma = sym_sqrt(sigma)
    u = sample_noise(model, m, sigma, sqrt_sigma, rng)
    return CanonicalSample(U=u, S=gram(u))


def default_design(n: int, q: int, seed: int = 0) -> NDArray:
    """Orthonormalized seeded standard-normal n x q design matrix."""
    rng = replication_rng(seed, 0, stream=1)
    x, _ = linalg.qr(rng.standard_normal((n, q)), mode="economic")
    return x


def sample_regression(
    model: ModelSpec,
    n: int,
    q: int,
    sigma: NDArray,
    rng: np.random.Generator,
    beta: NDArray | None = None,
    x: NDArray | None = None,
    sqrt_sigma: NDArray | None = None,
) -> CanonicalSample:
    """Draw Y = X beta + E and reduce it to canonical form.

    One mixing value is shared by the whole n x p noise matrix, so the Z and
    U blocks come from the same elliptical draw.

    Args:
        model: Sampling distribution
        n: Number of observations
        q: Number of covariates
        sigma: p x p scale matrix
        rng: Generator of the replication
        beta: q x p coefficients (default zero)
        x: n x q design (default `default_design(n, q)`)
        sqrt_sigma: Precomputed symmetric square root of sigma

    Returns:
        CanonicalSample with Z and theta = Q1^T X beta
    """
    validate_dimensions(n=n, q=q)
    p = sigma.shape[0]
    if x is None:
        x = default_design(n, q)
    if beta is None:
        beta = np.zeros((q, p))
    if sqrt_sigma is None:
        sqrt_sigma = sym_sqrt(sigma)

    y = x @ beta + sample_noise(model, n, sigma, sqrt_sigma, rng)
    return canonical_reduce(y, x, beta)
