"""Karhunen-Loeve expansions of stochastic processes on an interval."""

from .estimator import KarhunenLoeve
from .exceptions import ConvergenceError, NotUsableModeError
from .kernels import Domain, Kernel, KernelKind, eval_kernel, kernel_matrix
from .mercer import ReconstructionReport, error_surface, mercer_truncation, reconstruction_report, truncated_variance
from .quadrature import Grid, Rule, gauss_legendre, inner_product, integrate, make_grid
from .rng import normal_matrix, standard_normal_stream
from .simulate import (
    KLModel,
    SampleBatch,
    coefficient_statistics,
    empirical_covariance,
    marginal_normality,
    project_coefficients,
    refinement_trajectories,
    sample_batch,
)
from .spectral import (
    Method,
    Spectrum,
    analytic_spectrum_exponential,
    jacobi_eigen_symmetric,
    mode_count_for_energy,
    nystrom_interpolate,
    nystrom_spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "Domain",
    "Grid",
    "KLModel",
    "KarhunenLoeve",
    "Kernel",
    "KernelKind",
    "Method",
    "NotUsableModeError",
    "ReconstructionReport",
    "Rule",
    "SampleBatch",
    "Spectrum",
    "analytic_spectrum_exponential",
    "coefficient_statistics",
    "empirical_covariance",
    "error_surface",
    "eval_kernel",
    "gauss_legendre",
    "inner_product",
    "integrate",
    "jacobi_eigen_symmetric",
    "kernel_matrix",
    "make_grid",
    "marginal_normality",
    "mercer_truncation",
    "mode_count_for_energy",
    "normal_matrix",
    "nystrom_interpolate",
    "nystrom_spectrum",
    "project_coefficients",
    "reconstruction_report",
    "refinement_trajectories",
    "sample_batch",
    "standard_normal_stream",
    "truncated_variance",
]
