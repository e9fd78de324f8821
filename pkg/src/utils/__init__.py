"""Utility package for the shrinkage benchmark.

This package contains utility functions and classes shared by the
library and the experiment pipelines.

Modules:
    validation: Input validation for matrices, spectra and dimensions
    error_handling: Exception hierarchy, retry and skip decorators
    run_metrics: Timing, replication and check tracking for a run
"""
