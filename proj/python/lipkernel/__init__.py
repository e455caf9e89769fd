"""Lipschitz-constrained kernel machines."""

from ._lipkernel import (
    KernelSpec,
    Model,
    __version__,
    decay_condition,
    gaussian_eigenvalues,
    lipschitz_bounds,
    make_dataset,
    median_bandwidth,
    periodic_eigenvalues,
    robust_accuracy,
    run_cli,
    run_suite,
    set_thread_cap,
    train,
)

__all__ = [
    "KernelSpec",
    "Model",
    "__version__",
    "decay_condition",
    "gaussian_eigenvalues",
    "lipschitz_bounds",
    "make_dataset",
    "median_bandwidth",
    "periodic_eigenvalues",
    "robust_accuracy",
    "run_cli",
    "run_suite",
    "set_thread_cap",
    "train",
]
