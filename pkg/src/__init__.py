"""Elliptical shrinkage benchmark package.

This package contains a numerical library for orthogonally invariant
estimators of the scale matrix of an elliptical regression model, together
with the Monte-Carlo pipelines that measure their risk improvement over the
usual estimator a0 S.

Modules:
    shrinkage: Matrix primitives, samplers, estimators, losses and identity checks
    bench: Experiment pipelines, result writers and the command-line interface
    config: Experiment defaults and logging
    utils: Validation, error handling and run metrics
"""
