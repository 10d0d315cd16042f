"""Sampling truncated KL realizations and checking their statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import NotUsableModeError
from .kernels import Kernel, eval_kernel
from .mercer import truncated_variance
from .quadrature import Grid
from .rng import normal_matrix
from .spectral import Spectrum

#: asymptotic two-sided KS critical value at alpha ~ 0.01, times sqrt(M)
KS_CRITICAL_001 = 1.63
MIN_KS_SAMPLES = 100


@dataclass(frozen=True, eq=False)
class KLModel:
    """A spectrum truncated to its leading ``n_terms`` usable modes."""

    spectrum: Spectrum
    n_terms: int

    def __post_init__(self):
        n = self.n_terms
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise ValueError(f"truncation order must be a positive integer, got {n!r}")
        if n > self.spectrum.n_usable:
            raise NotUsableModeError(
                f"truncation order {n} exceeds the {self.spectrum.n_usable} modes above the zero cutoff"
            )

    @property
    def kernel(self) -> Kernel:
        return self.spectrum.kernel

    @property
    def grid(self) -> Grid:
        return self.spectrum.grid

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectrum.eigenvalues[: self.n_terms]

    @property
    def modes(self) -> np.ndarray:
        """Node values of the kept eigenfunctions, shape ``(n_nodes, n_terms)``."""
        return self.spectrum.eigenfunctions[:, : self.n_terms]

    def variance(self, t=None):
        """Truncated variance ``v_N``; at the grid nodes when ``t`` is None."""
        if t is None:
            e = self.modes
            return np.sum(self.eigenvalues * (e * e), axis=-1)
        return truncated_variance(self.spectrum, self.n_terms, t)

    def synthesize(self, xi) -> np.ndarray:
        """Fields ``sum_i sqrt(lambda_i) xi[:, i] e_i`` at the grid nodes.

        Accumulated mode by mode in a fixed order (no BLAS), so results do
        not depend on thread count.
        """
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        if xi.shape[1] != self.n_terms:
            raise ValueError(f"xi has {xi.shape[1]} columns, model has {self.n_terms} terms")
        amp = np.sqrt(self.eigenvalues)
        out = np.zeros((xi.shape[0], self.grid.n))
        for i in range(self.n_terms):
            out += (amp[i] * xi[:, i])[:, None] * self.modes[None, :, i]
        return out


@dataclass(frozen=True, eq=False)
class SampleBatch:
    model: KLModel
    seed: int | None
    xi: np.ndarray = field(repr=False)
    fields: np.ndarray = field(repr=False)

    @property
    def M(self) -> int:
        return self.xi.shape[0]

    @classmethod
    def from_xi(cls, model: KLModel, xi, seed=None) -> SampleBatch:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        return cls(model, seed, xi, model.synthesize(xi))


def sample_batch(model: KLModel, M: int, seed: int) -> SampleBatch:
    """``M`` realizations driven by ``xi[m, i]`` keyed on ``(seed, m, i)``."""
    if isinstance(M, bool) or not isinstance(M, (int, np.integer)) or M < 1:
        raise ValueError(f"M must be a positive integer, got {M!r}")
    xi = normal_matrix(seed, int(M), model.n_terms)
    return SampleBatch(model, int(seed), xi, model.synthesize(xi))


def project_coefficients(model: KLModel, field_values) -> np.ndarray:
    """Normalized KL coefficients ``(1/sqrt(lambda_i)) <X, e_i>`` on the grid.

    Accepts one field (1-D) or a stack of fields (2-D, one per row).
    """
    f = np.asarray(field_values, dtype=float)
    if f.shape[-1] != model.grid.n:
        raise ValueError(f"field has {f.shape[-1]} values, grid has {model.grid.n} nodes")
    lam = model.eigenvalues
    if np.any(lam <= 0):
        raise NotUsableModeError("model contains a non-positive eigenvalue")
    return (f * model.grid.weights) @ model.modes / np.sqrt(lam)


@dataclass(frozen=True, eq=False)
class CoefficientStats:
    M: int
    mean: np.ndarray
    var: np.ndarray
    second_moments: np.ndarray = field(repr=False)
    mean_tol: float
    var_tol: float
    corr_tol: float
    mean_flags: np.ndarray
    var_flags: np.ndarray
    corr_flags: np.ndarray = field(repr=False)

    @property
    def passed(self) -> bool:
        return not (self.mean_flags.any() or self.var_flags.any() or self.corr_flags.any())

    @property
    def max_offdiag(self) -> float:
        s = self.second_moments
        if s.shape[0] < 2:
            return 0.0
        return float(np.max(np.abs(s[~np.eye(s.shape[0], dtype=bool)])))

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "mean": self.mean.tolist(),
            "var": self.var.tolist(),
            "second_moments": self.second_moments.tolist(),
            "max_abs_offdiag": self.max_offdiag,
            "tolerances": {"mean": self.mean_tol, "var": self.var_tol, "corr": self.corr_tol},
            "flags": {
                "mean": np.flatnonzero(self.mean_flags).tolist(),
                "var": np.flatnonzero(self.var_flags).tolist(),
                "corr": [[int(i), int(j)] for i, j in zip(*np.nonzero(np.triu(self.corr_flags, 1)))],
            },
            "passed": self.passed,
        }


def coefficient_statistics(batch: SampleBatch) -> CoefficientStats:
    """Empirical moments of the normalized coefficients against N(0, I).

    Off-diagonal entries are raw second moments ``mean(xi_i xi_j)``, the
    quantity that vanishes for uncorrelated centered unit-variance draws.
    Flags use 4-sigma CLT envelopes.
    """
    xi = batch.xi
    M = xi.shape[0]
    if M < 2:
        raise ValueError("coefficient statistics need M >= 2")
    mean = xi.mean(axis=0)
    var = xi.var(axis=0, ddof=1)
    second = (xi.T @ xi) / M
    mean_tol = 4.0 / math.sqrt(M)
    var_tol = 4.0 * math.sqrt(2.0 / M)
    corr_tol = 4.0 / math.sqrt(M)
    corr_flags = np.abs(second) > corr_tol
    np.fill_diagonal(corr_flags, False)
    return CoefficientStats(
        M=M,
        mean=mean,
        var=var,
        second_moments=second,
        mean_tol=mean_tol,
        var_tol=var_tol,
        corr_tol=corr_tol,
        mean_flags=np.abs(mean) > mean_tol,
        var_flags=np.abs(var - 1.0) > var_tol,
        corr_flags=corr_flags,
    )


@dataclass(frozen=True, eq=False)
class CovarianceReport:
    covariance: np.ndarray = field(repr=False)
    sup_vs_truncated: float
    sup_vs_kernel: float
    mc_envelope: float


def empirical_covariance(batch: SampleBatch, envelope_sigmas: float = 5.0) -> CovarianceReport:
    """``C[j, k] = mean_m X_m(t_j) X_m(t_k)`` compared with ``R^N`` and ``R``.

    No mean is subtracted: the process is centered.
    """
    M = batch.M
    if M < 2:
        raise ValueError("empirical covariance needs M >= 2")
    model = batch.model
    f = batch.fields
    cov = (f.T @ f) / M
    cov = 0.5 * (cov + cov.T)
    t = model.grid.nodes
    e = model.modes
    trunc = (e * model.eigenvalues) @ e.T
    exact = eval_kernel(model.kernel, t[:, None], t[None, :])
    return CovarianceReport(
        covariance=cov,
        sup_vs_truncated=float(np.max(np.abs(cov - trunc))),
        sup_vs_kernel=float(np.max(np.abs(cov - exact))),
        mc_envelope=envelope_sigmas * math.sqrt(2.0 / M) * model.kernel.sigma2,
    )


def ks_statistic(x) -> float:
    """Two-sided one-sample KS distance between ``x`` and the standard normal."""
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    cdf = 0.5 * np.array([math.erfc(-v / math.sqrt(2.0)) for v in x])
    d_plus = np.max(np.arange(1, n + 1) / n - cdf)
    d_minus = np.max(cdf - np.arange(n) / n)
    return float(max(d_plus, d_minus))


@dataclass(frozen=True)
class KSReport:
    t: float
    M: int
    statistic: float
    threshold: float
    std: float

    @property
    def passed(self) -> bool:
        return self.statistic <= self.threshold

    def to_dict(self) -> dict:
        return {"t": self.t, "M": self.M, "statistic": self.statistic,
                "threshold": self.threshold, "std": self.std, "passed": self.passed}


def field_at(batch: SampleBatch, t) -> np.ndarray:
    """Each realization's value at ``t``, from the eigenfunctions extended off-grid."""
    model = batch.model
    e_t = model.spectrum.evaluate(t, model.n_terms)
    return batch.xi @ (np.sqrt(model.eigenvalues) * e_t)


def marginal_normality(batch: SampleBatch, t: float) -> KSReport:
    """KS test of ``X(t) / sqrt(v_N(t))`` against the standard normal."""
    model = batch.model
    M = batch.M
    if M < MIN_KS_SAMPLES:
        raise ValueError(f"marginal normality needs M >= {MIN_KS_SAMPLES}, got {M}")
    v = truncated_variance(model.spectrum, model.n_terms, float(t))
    if v < 1e-12 * model.kernel.sigma2:
        raise ValueError(f"truncated variance at t={t} is numerically zero")
    z = field_at(batch, float(t)) / math.sqrt(v)
    return KSReport(float(t), M, ks_statistic(z), KS_CRITICAL_001 / math.sqrt(M), math.sqrt(v))


def refinement_trajectories(spectrum: Spectrum, n_list, seed: int, realization: int = 0, t=None) -> np.ndarray:
    """One realization truncated at each order in ``n_list``.

    All curves share the draws ``xi[realization, i]``, so consecutive rows
    differ exactly by the added modes. Rows are evaluated at the grid nodes,
    or at ``t`` when given.
    """
    n_list = [int(n) for n in n_list]
    if not n_list:
        raise ValueError("n_list is empty")
    if any(b < a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be nondecreasing")
    n_max = n_list[-1]
    KLModel(spectrum, n_max)  # validates against the usable-mode count
    if n_list[0] < 1:
        raise ValueError("truncation orders must be >= 1")
    xi = normal_matrix(seed, [realization], n_max)[0]
    e = spectrum.eigenfunctions[:, :n_max] if t is None else spectrum.evaluate(t, n_max)
    terms = np.sqrt(spectrum.eigenvalues[:n_max]) * xi * e
    curves = []
    acc = np.zeros(terms.shape[:-1])
    done = 0
    for n in n_list:
        for i in range(done, n):
            acc = acc + terms[..., i]
        done = n
        curves.append(acc.copy())
    return np.array(curves)

