"""Configuration package for the shrinkage benchmark.

Modules:
    experiment_config: Numerical tolerances, per-command defaults and ExperimentConfig
    logging_config: Configuration for logging
"""
