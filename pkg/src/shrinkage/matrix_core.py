"""Dense symmetric-matrix primitives.

Scale-matrix constructors, the symmetric square root, the truncated
eigendecomposition of a sample matrix S, its Moore-Penrose inverse and the
Gram product S = U^T U. All functions are pure and safe to call from many
threads at once.
"""

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from scipy import linalg

from src.config.experiment_config import NUMERICS
from src.utils.error_handling import DegenerateSampleError, InvalidInputError
from src.utils.validation import (
    relative_frobenius_error,
    validate_dimensions,
    validate_symmetric,
)

SigmaKind = Literal["identity", "ar1", "dense"]


@dataclass(frozen=True)
class SigmaSpec:
    """Structure of the true scale matrix Sigma.

    Attributes:
        kind: "identity", "ar1" (entry rho^|i-j|) or "dense" (user matrix)
        p: Dimension of Sigma
        rho: Autoregressive coefficient, AR1 only
        matrix: User-supplied dense matrix, dense only
    """

    kind: SigmaKind
    p: int
    rho: float = 0.0
    matrix: NDArray | None = field(default=None, compare=False, repr=False)

    @classmethod
    def identity(cls, p: int) -> "SigmaSpec":
        return cls("identity", p)

    @classmethod
    def ar1(cls, p: int, rho: float = 0.9) -> "SigmaSpec":
        return cls("ar1", p, rho)

    @classmethod
    def dense(cls, matrix: NDArray) -> "SigmaSpec":
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls("dense", int(matrix.shape[0]), matrix=matrix)


@dataclass(frozen=True)
class EigenSystem:
    """Truncated spectral decomposition S = H diag(L) H^T.

    Attributes:
        H: p x r semi-orthogonal matrix of eigenvectors
        L: Length-r vector of positive eigenvalues, in decreasing order
    """

    H: NDArray
    L: NDArray

    @property
    def r(self) -> int:
        return int(self.L.shape[0])

    @property
    def p(self) -> int:
        return int(self.H.shape[0])

    def reconstruct(self) -> NDArray:
        return (self.H * self.L) @ self.H.T


def sigma_build(spec: SigmaSpec) -> NDArray:
    """Build the p x p scale matrix described by a SigmaSpec.

    Args:
        spec: Structure of Sigma

    Returns:
        Symmetric positive-definite p x p matrix

    Raises:
        InvalidInputError: If p < 1, |rho| >= 1, or a dense matrix is not SPD
    """
    validate_dimensions(p=spec.p)
    if spec.kind == "identity":
        return np.eye(spec.p)
    if spec.kind == "ar1":
        if not abs(spec.rho) < 1:
            raise InvalidInputError(
                f"AR1 coefficient must satisfy |rho| < 1, got {spec.rho}"
            )
        lags = np.abs(np.subtract.outer(np.arange(spec.p), np.arange(spec.p)))
        return np.power(float(spec.rho), lags)
    if spec.kind == "dense":
        if spec.matrix is None:
            raise InvalidInputError("dense Sigma requires a matrix")
        sigma = validate_symmetric(spec.matrix, NUMERICS["symmetry_tol"], "Sigma")
        if sigma.shape[0] != spec.p:
            raise InvalidInputError(
                f"dense Sigma is {sigma.shape}, expected p={spec.p}"
            )
        if linalg.eigvalsh(sigma)[0] <= 0:
            raise InvalidInputError("dense Sigma must be positive definite")
        return (sigma + sigma.T) / 2
    raise InvalidInputError(f"unknown Sigma kind {spec.kind!r}")


def sym_sqrt(a: NDArray) -> NDArray:
    """Symmetric square root of a symmetric positive semi-definite matrix.

    Eigenvalues in [-psd_tol, 0) are treated as round-off and clipped to 0.

    Args:
        a: p x p symmetric PSD matrix

    Returns:
        Symmetric B with B @ B = a

    Raises:
        InvalidInputError: If a is asymmetric or has an eigenvalue below -psd_tol
    """
    a = validate_symmetric(a, NUMERICS["sqrt_symmetry_tol"], "matrix")
    w, v = linalg.eigh((a + a.T) / 2)
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    if w.size and w[0] < -NUMERICS["psd_tol"] * scale:
        raise InvalidInputError(f"matrix is not PSD (smallest eigenvalue {w[0]:.3e})")
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    return (root + root.T) / 2


def spectral_inverse(a: NDArray) -> NDArray:
    """Inverse of a symmetric positive-definite matrix via its eigendecomposition.

    Args:
        a: p x p SPD matrix

    Returns:
        Symmetric a^{-1}

    Raises:
        InvalidInputError: If a is not symmetric positive definite
    """
    a = validate_symmetric(a, NUMERICS["symmetry_tol"], "matrix")
    w, v = linalg.eigh(a)
    if w[0] <= 0:
        raise InvalidInputError("matrix must be positive definite to be inverted")
    inv = (v / w) @ v.T
    return (inv + inv.T) / 2


def _fix_signs(vectors: NDArray) -> NDArray:
    """Make the first nonzero component of every column positive."""
    if vectors.size == 0:
        return vectors
    magnitude = np.abs(vectors)
    cutoff = NUMERICS["sign_tol"] * magnitude.max(axis=0)
    first = np.argmax(magnitude > cutoff, axis=0)
    signs = np.sign(vectors[first, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def eigen_sym_truncated(
    s: NDArray,
    rank_tol: float | None = None,
    max_rank: int | None = None,
) -> EigenSystem:
    """Truncated eigendecomposition of a symmetric PSD matrix.

    Keeps the eigenvalues above rank_tol times the largest one, in decreasing
    order (ties keep their index order), at most max_rank of them.

    Args:
        s: p x p symmetric PSD matrix
        rank_tol: Relative cutoff; defaults to p * machine epsilon
        max_rank: Structural bound on the rank, e.g. min(p, m) for a Gram
            matrix of an m x p matrix

    Returns:
        EigenSystem with H^T H = I_r and strictly positive L

    Raises:
        InvalidInputError: If s is not symmetric
        DegenerateSampleError: If s has numerical rank 0
    """
    s = validate_symmetric(s, NUMERICS["symmetry_tol"], "S")
    p = s.shape[0]
    if rank_tol is None:
        rank_tol = p * np.finfo(np.float64).eps

    w, v = linalg.eigh((s + s.T) / 2)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]

    top = float(w[0]) if w.size else 0.0
    if top <= 0:
        raise DegenerateSampleError("S has numerical rank 0")
    keep = int(np.count_nonzero(w > rank_tol * top))
    if max_rank is not None:
        keep = min(keep, max_rank)

    return EigenSystem(H=_fix_signs(v[:, :keep]), L=w[:keep].copy())


def pinv_from_eigen(es: EigenSystem) -> NDArray:
    """Moore-Penrose inverse S^+ = H diag(1/L) H^T.

    Args:
        es: Truncated eigendecomposition of S

    Returns:
        Symmetric p x p matrix S^+
    """
    pinv = (es.H / es.L) @ es.H.T
    return (pinv + pinv.T) / 2


def gram(u: NDArray) -> NDArray:
    """Gram product U^T U, symmetrized bit-exactly.

    Args:
        u: m x p matrix

    Returns:
        p x p symmetric PSD matrix
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2:
        raise InvalidInputError(f"U must be a matrix, got shape {u.shape}")
    a = u.T @ u
    return (a + a.T) / 2


def penrose_residuals(s: NDArray, s_pinv: NDArray) -> tuple[float, float, float, float]:
    """Relative Frobenius residuals of the four Penrose conditions.

    Args:
        s: Symmetric matrix S
        s_pinv: Candidate Moore-Penrose inverse of S

    Returns:
        Residuals of S S+ S = S, S+ S S+ = S+, (S S+)^T = S S+ and (S+ S)^T = S+ S
    """
    left = s @ s_pinv
    right = s_pinv @ s
    return (
        relative_frobenius_error(left @ s, s),
        relative_frobenius_error(right @ s_pinv, s_pinv),
        relative_frobenius_error(left.T, left),
        relative_frobenius_error(right.T, right),
    )


def reconstruction_error(es: EigenSystem, s: NDArray) -> float:
    """Relative Frobenius error of H diag(L) H^T against S."""
    return relative_frobenius_error(es.reconstruct(), s)
