"""scikit-learn style front end for the KL expansion."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .kernels import Kernel
from .mercer import mercer_truncation
from .quadrature import make_grid
from .simulate import KLModel, sample_batch, project_coefficients
from .spectral import Method, analytic_spectrum_exponential, nystrom_spectrum
from .validation import check_domain, check_fields, check_positive_int, check_seed


class KarhunenLoeve(TransformerMixin, BaseEstimator):
    """Truncated Karhunen-Loeve expansion of a centered process with a known kernel.

    ``fit`` solves the eigenproblem of the autocorrelation operator on a
    quadrature grid. ``transform`` maps realizations sampled at the grid
    nodes to their normalized KL coefficients, ``inverse_transform`` maps
    coefficients back to fields.

    Parameters
    ----------
    kernel : {"exponential", "squared_exponential"}, default="exponential"
    sigma2 : float, default=1.0
        Process variance.
    corr_len : float, default=1.0
        Correlation length.
    domain : tuple of float, default=(0.0, 1.0)
    n_nodes : int, default=101
        Quadrature nodes.
    rule : {"trapezoid", "gauss_legendre"}, default="trapezoid"
    n_components : int, default=6
        Truncation order N.
    method : {"nystrom", "analytic"}, default="nystrom"
        "analytic" is only available for the exponential kernel.
    solver : {"jacobi", "lapack"}, default="jacobi"
        Eigensolver for the Nystrom matrix.

    Attributes
    ----------
    kernel_ : Kernel
    grid_ : Grid
    spectrum_ : Spectrum
    model_ : KLModel
    eigenvalues_ : ndarray of shape (n_components,)
    components_ : ndarray of shape (n_components, n_nodes)
        Eigenfunction values at the grid nodes, one mode per row.
    explained_variance_ratio_ : ndarray of shape (n_components,)
        Share of the kernel's trace, ``lambda_i / (sigma2 * |D|)``.
    """

    def __init__(self, kernel="exponential", sigma2=1.0, corr_len=1.0, domain=(0.0, 1.0), n_nodes=101,
                 rule="trapezoid", n_components=6, method="nystrom", solver="jacobi"):
        self.kernel = kernel
        self.sigma2 = sigma2
        self.corr_len = corr_len
        self.domain = domain
        self.n_nodes = n_nodes
        self.rule = rule
        self.n_components = n_components
        self.method = method
        self.solver = solver

    def fit(self, X=None, y=None):
        """Compute the spectrum. ``X`` is only checked for shape; the kernel is given."""
        domain = check_domain(self.domain)
        n_nodes = check_positive_int(self.n_nodes, "n_nodes", minimum=2)
        n_components = check_positive_int(self.n_components, "n_components")
        if n_components > n_nodes:
            raise ValueError(f"n_components={n_components} exceeds n_nodes={n_nodes}")
        kernel = Kernel(self.kernel, self.sigma2, self.corr_len, domain)
        grid = make_grid(domain, n_nodes, self.rule)
        if X is not None:
            check_fields(X, n_nodes)
        method = Method(self.method)
        if method is Method.ANALYTIC:
            spectrum = analytic_spectrum_exponential(kernel, n_components, grid)
        else:
            spectrum = nystrom_spectrum(kernel, grid, n_components, solver=self.solver)
        self.kernel_ = kernel
        self.grid_ = grid
        self.spectrum_ = spectrum
        self.model_ = KLModel(spectrum, n_components)
        self.eigenvalues_ = np.asarray(spectrum.eigenvalues)
        self.components_ = np.asarray(spectrum.eigenfunctions).T
        self.explained_variance_ratio_ = self.eigenvalues_ / (kernel.sigma2 * domain.length)
        self.n_features_in_ = n_nodes
        return self

    def transform(self, X):
        """Normalized KL coefficients of each row of ``X``."""
        check_is_fitted(self, "model_")
        X = check_fields(X, self.grid_.n)
        return project_coefficients(self.model_, X)

    def inverse_transform(self, X):
        """Fields at the grid nodes from coefficient rows."""
        check_is_fitted(self, "model_")
        Z = check_array(X, dtype=np.float64)
        if Z.shape[1] != self.model_.n_terms:
            raise ValueError(f"expected {self.model_.n_terms} coefficient columns, got {Z.shape[1]}")
        return self.model_.synthesize(Z)

    def sample(self, n_samples=1, seed=0):
        """Draw realizations at the grid nodes; returns ``(fields, xi)``."""
        check_is_fitted(self, "model_")
        n_samples = check_positive_int(n_samples, "n_samples")
        batch = sample_batch(self.model_, n_samples, check_seed(seed))
        return batch.fields, batch.xi

    def eigenfunctions(self, t):
        """Kept eigenfunctions at arbitrary points, shape ``t.shape + (n_components,)``."""
        check_is_fitted(self, "model_")
        return self.spectrum_.evaluate(t, self.model_.n_terms)

    def covariance(self, s, t):
        """Truncated kernel ``R^N(s, t)``."""
        check_is_fitted(self, "model_")
        return mercer_truncation(self.spectrum_, self.model_.n_terms, s, t)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "model_")
        return np.array([f"xi{i}" for i in range(self.model_.n_terms)], dtype=object)
