"""Benchmark pipelines for the shrinkage library.

Modules:
    prial_pipeline: Base pipeline that simulates paired losses and writes results
    sweep_b_pipeline: PRIAL over a grid of b
    sweep_alpha_pipeline: PRIAL over a grid of alpha
    compare_loss_pipeline: Data-based loss against quadratic loss
    compare_families_pipeline: Haff against James-Stein and Efron-Morris-Dey
    verify_pipeline: Verification gate
    cli: Command-line interface
"""
