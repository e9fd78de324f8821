"""Orthogonally invariant scale-matrix estimation under elliptical models.

Modules:
    matrix_core: Gram matrices, truncated eigensystems, pseudo-inverses, Sigma builders
    elliptical_model: Gaussian and Student-t models, samplers, canonical reduction
    estimators: Psi families, the usual and orthogonally invariant estimators
    losses_risk: Data-based and quadratic losses, PRIAL, Monte-Carlo risk
    identity_checks: Stein-Haff identity checks and the g(Psi) certificate
"""
