"""Eigenpairs of the autocorrelation integral operator.

Two independent routes are provided: a Nystrom discretization solved with
a cyclic Jacobi eigensolver, and closed-form eigenpairs for the
exponential kernel obtained from the roots of its characteristic
equations. Mode indices are 0-based throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numba
import numpy as np

from .exceptions import ConvergenceError, NotUsableModeError
from .kernels import Kernel, KernelKind, eval_kernel, kernel_matrix
from .quadrature import Grid

#: modes with eigenvalue <= USABLE_RTOL * lambda_1 carry no KL content
USABLE_RTOL = 1e-12

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100


class Method(str, Enum):
    NYSTROM = "nystrom"
    ANALYTIC = "analytic"


@numba.njit(cache=True)
def _jacobi_sweeps(a, tol, max_sweeps):
    # a is overwritten; rows of vt hold the eigenvectors.
    n = a.shape[0]
    vt = np.eye(n)
    fro = math.sqrt(np.sum(a * a))
    skip = tol * fro / n
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += a[i, j] * a[i, j]
        if math.sqrt(2.0 * off) <= tol * fro:
            return vt, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                theta = (aqq - app) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rp = a[p]
                rq = a[q]
                for k in range(n):
                    x = rp[k]
                    y = rq[k]
                    rp[k] = c * x - s * y
                    rq[k] = s * x + c * y
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                # the matrix stays symmetric: mirror the two updated rows
                for k in range(n):
                    if k != p and k != q:
                        a[k, p] = rp[k]
                        a[k, q] = rq[k]
                vp = vt[p]
                vq = vt[q]
                for k in range(n):
                    x = vp[k]
                    y = vq[k]
                    vp[k] = c * x - s * y
                    vq[k] = s * x + c * y
    return vt, -1


def jacobi_eigen_symmetric(a, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps every off-diagonal pair in row order until the off-diagonal
    Frobenius norm falls below ``tol * ||A||_F``.

    Returns
    -------
    eigenvalues : ndarray, shape (n,)
        Sorted in descending order.
    eigenvectors : ndarray, shape (n, n)
        Orthogonal; column ``k`` pairs with ``eigenvalues[k]``.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric to within 1e-12 relative")
    a = np.ascontiguousarray(0.5 * (a + a.T))
    if a.shape[0] == 0:
        return np.empty(0), np.empty((0, 0))
    vt, sweeps = _jacobi_sweeps(a, float(tol), int(max_sweeps))
    if sweeps < 0:
        raise ConvergenceError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")
    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], vt[order].T.copy()


def _fix_signs(e: np.ndarray) -> np.ndarray:
    """Flip columns so the first nonzero node value is positive."""
    e = np.array(e, dtype=float)
    nz = e != 0.0
    first = np.where(nz.any(axis=0), nz.argmax(axis=0), 0)
    sign = np.where(e[first, np.arange(e.shape[1])] < 0.0, -1.0, 1.0)
    return e * sign, sign


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ordered eigenpairs ``(lambda_i, e_i)`` with ``e_i`` sampled on ``grid``.

    ``eigenfunctions[:, i]`` holds ``e_i`` at the grid nodes, normalized in
    the grid's discrete L2 inner product.
    """

    grid: Grid
    kernel: Kernel
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray = field(repr=False)
    method: Method = Method.NYSTROM
    # analytic modes: e_i(t) = scale_i * trig(omega_i * (t - midpoint))
    omegas: np.ndarray | None = field(default=None, repr=False)
    even: np.ndarray | None = field(default=None, repr=False)
    scales: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        for arr in (self.eigenvalues, self.eigenfunctions):
            arr.setflags(write=False)

    @property
    def n_modes(self) -> int:
        return self.eigenvalues.size

    @property
    def n_usable(self) -> int:
        """Number of leading modes above the numerically-zero cutoff."""
        if self.n_modes == 0:
            return 0
        lam1 = self.eigenvalues[0]
        if lam1 <= 0:
            return 0
        return int(np.count_nonzero(self.eigenvalues > USABLE_RTOL * lam1))

    def is_usable(self, i: int) -> bool:
        return i < self.n_usable

    def eigenfunction(self, i: int) -> Eigenfunction:
        return Eigenfunction(self, i)

    def evaluate(self, t, n_terms: int | None = None) -> np.ndarray:
        """Values of the first ``n_terms`` eigenfunctions at points ``t``.

        Returns an array of shape ``t.shape + (n_terms,)``.
        """
        n_terms = self.n_modes if n_terms is None else n_terms
        _check_mode_count(self, n_terms)
        t = np.asarray(t, dtype=float)
        if not self.grid.domain.contains(t):
            raise ValueError("evaluation points lie outside the domain")
        if self.method is Method.ANALYTIC:
            x = t[..., None] - self.grid.domain.midpoint
            arg = self.omegas[:n_terms] * x
            vals = np.where(self.even[:n_terms], np.cos(arg), np.sin(arg))
            return vals * self.scales[:n_terms]
        if n_terms > self.n_usable:
            raise NotUsableModeError(
                f"cannot interpolate mode {self.n_usable}: eigenvalue "
                f"{self.eigenvalues[self.n_usable]:.3e} is numerically zero"
            )
        g = self.grid
        k = eval_kernel(self.kernel, t[..., None], g.nodes)
        coef = (g.weights[:, None] * self.eigenfunctions[:, :n_terms]) / self.eigenvalues[:n_terms]
        return k @ coef


def _check_mode_count(spectrum: Spectrum, n_terms: int):
    if isinstance(n_terms, bool) or not isinstance(n_terms, (int, np.integer)):
        raise TypeError(f"mode count must be an integer, got {n_terms!r}")
    if not 0 <= n_terms <= spectrum.n_modes:
        raise ValueError(f"requested {n_terms} modes, spectrum stores {spectrum.n_modes}")


@dataclass(frozen=True)
class Eigenfunction:
    """Callable view of one eigenfunction, valid anywhere in the domain."""

    spectrum: Spectrum
    index: int

    def __post_init__(self):
        if not 0 <= self.index < self.spectrum.n_modes:
            raise IndexError(f"mode index {self.index} out of range")

    @property
    def eigenvalue(self) -> float:
        return float(self.spectrum.eigenvalues[self.index])

    @property
    def node_values(self) -> np.ndarray:
        return self.spectrum.eigenfunctions[:, self.index]

    def __call__(self, t):
        if self.spectrum.method is Method.NYSTROM:
            return nystrom_interpolate(self.spectrum, self.index, t)
        out = self.spectrum.evaluate(t, self.index + 1)[..., self.index]
        return float(out) if out.ndim == 0 else out


def _check_n_modes(n_modes, n):
    if n_modes is None:
        return n
    if isinstance(n_modes, bool) or not isinstance(n_modes, (int, np.integer)):
        raise TypeError(f"n_modes must be an integer, got {n_modes!r}")
    if not 1 <= n_modes <= n:
        raise ValueError(f"n_modes must lie in [1, {n}], got {n_modes}")
    return int(n_modes)


def nystrom_spectrum(kernel: Kernel, grid: Grid, n_modes: int | None = None, solver: str = "jacobi") -> Spectrum:
    """Nystrom eigenpairs of the integral operator on ``grid``.

    The symmetric matrix ``W^1/2 A W^1/2`` shares its eigenvalues with the
    quadrature-discretized operator; eigenvector ``v`` maps back to node
    values ``v / sqrt(w)``, which are orthonormal in the weighted inner
    product.

    ``solver`` is ``"jacobi"`` (in-package cyclic Jacobi) or ``"lapack"``
    (``numpy.linalg.eigh``); the latter is much faster for n above a few
    hundred.
    """
    n_modes = _check_n_modes(n_modes, grid.n)
    sw = np.sqrt(grid.weights)
    b = sw[:, None] * kernel_matrix(kernel, grid) * sw[None, :]
    if solver == "jacobi":
        lam, v = jacobi_eigen_symmetric(b)
    elif solver == "lapack":
        lam, v = np.linalg.eigh(b)
        order = np.argsort(-lam, kind="stable")
        lam, v = lam[order], v[:, order]
    else:
        raise ValueError(f"unknown solver {solver!r}")
    lam = lam[:n_modes].copy()
    e, _ = _fix_signs(v[:, :n_modes] / sw[:, None])
    return Spectrum(grid, kernel, lam, e, Method.NYSTROM)


def nystrom_interpolate(spectrum: Spectrum, i: int, t):
    """Extend eigenfunction ``i`` off the grid.

    Uses ``e_i(t) = (1/lambda_i) sum_j w_j k(t, t_j) e_i(t_j)``, which
    reproduces the stored node values at the nodes.
    """
    if not 0 <= i < spectrum.n_modes:
        raise IndexError(f"mode index {i} out of range")
    if not spectrum.is_usable(i):
        raise NotUsableModeError(f"mode {i} has a numerically zero eigenvalue")
    t_arr = np.asarray(t, dtype=float)
    if not spectrum.grid.domain.contains(t_arr):
        raise ValueError("interpolation point outside the domain")
    g = spectrum.grid
    k = eval_kernel(spectrum.kernel, t_arr[..., None], g.nodes)
    out = (k @ (g.weights * spectrum.eigenfunctions[:, i])) / spectrum.eigenvalues[i]
    return float(out) if out.ndim == 0 else out


def _bisect(f, lo, hi, xtol=1e-13, max_iter=200):
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ConvergenceError(f"root not bracketed in [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol or mid in (lo, hi):
            return mid
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    raise ConvergenceError("bisection did not converge")


def characteristic_roots(c: float, half_width: float, n: int, xtol: float = 1e-13):
    """Frequencies of the first ``n`` exponential-kernel modes on ``[-T, T]``.

    Root ``k`` (0-based) lies in ``(k pi / 2T, (k+1) pi / 2T)``. Even ``k``
    solves ``c cos(wT) - w sin(wT) = 0`` (cosine modes), odd ``k`` solves
    ``w cos(wT) + c sin(wT) = 0`` (sine modes). Each function has exactly
    one sign change inside its bracket, so bisection cannot miss.

    Returns ``(omegas, even)``.
    """
    T = half_width
    step = math.pi / (2.0 * T)
    omegas = np.empty(n)
    even = np.zeros(n, dtype=bool)

    def f_even(w):
        return c * math.cos(w * T) - w * math.sin(w * T)

    def f_odd(w):
        return w * math.cos(w * T) + c * math.sin(w * T)

    for k in range(n):
        lo, hi = k * step, (k + 1) * step
        is_even = k % 2 == 0
        f = f_even if is_even else f_odd
        # the sign changes strictly inside; nudge off the bracket ends
        eps = 1e-12 * step
        omegas[k] = _bisect(f, lo + eps if k else lo, hi - eps, xtol=xtol)
        even[k] = is_even
    return omegas, even


def analytic_spectrum_exponential(kernel: Kernel, n_modes: int, grid: Grid) -> Spectrum:
    """Closed-form eigenpairs of the exponential kernel, sampled on ``grid``.

    With ``c = 1 / corr_len`` each frequency ``w`` gives the eigenvalue
    ``2 c sigma2 / (w^2 + c^2)``. Eigenfunctions are cosines and sines about
    the domain midpoint, scaled to unit norm in the grid's inner product.
    """
    if kernel.kind is not KernelKind.EXPONENTIAL:
        raise ValueError(f"analytic eigenpairs exist only for the exponential kernel, got {kernel.kind.value}")
    if kernel.domain != grid.domain:
        raise ValueError("kernel and grid domains differ")
    if isinstance(n_modes, bool) or not isinstance(n_modes, (int, np.integer)) or n_modes < 1:
        raise ValueError(f"n_modes must be a positive integer, got {n_modes!r}")
    c = 1.0 / kernel.corr_len
    T = 0.5 * grid.domain.length
    omegas, even = characteristic_roots(c, T, int(n_modes))
    lam = 2.0 * c * kernel.sigma2 / (omegas**2 + c**2)
    x = grid.nodes[:, None] - grid.domain.midpoint
    raw = np.where(even, np.cos(omegas * x), np.sin(omegas * x))
    norms = np.sqrt(grid.weights @ (raw * raw))
    e, sign = _fix_signs(raw / norms)
    # strictly decreasing in omega already; sort defensively
    order = np.argsort(-lam, kind="stable")
    return Spectrum(
        grid,
        kernel,
        lam[order],
        e[:, order],
        Method.ANALYTIC,
        omegas=omegas[order],
        even=even[order],
        scales=(sign / norms)[order],
    )


def mode_count_for_energy(spectrum: Spectrum, fraction: float) -> int:
    """Smallest ``N`` whose leading eigenvalues hold ``fraction`` of the stored total."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    if spectrum.n_modes == 0:
        raise ValueError("empty spectrum")
    lam = np.clip(spectrum.eigenvalues, 0.0, None)
    total = lam.sum()
    if total <= 0:
        raise ValueError("spectrum has no positive eigenvalues")
    cum = np.cumsum(lam) / total
    # cumsum round-off may leave the last entry a hair below 1
    cum[-1] = 1.0
    return int(np.searchsorted(cum, fraction, side="left")) + 1


def eigen_residuals(spectrum: Spectrum) -> np.ndarray:
    """Grid norms ``||A W e_i - lambda_i e_i||`` for every stored mode."""
    g = spectrum.grid
    a = kernel_matrix(spectrum.kernel, g)
    e = spectrum.eigenfunctions
    r = a @ (g.weights[:, None] * e) - e * spectrum.eigenvalues
    return np.sqrt(g.weights @ (r * r))


def gram_matrix(spectrum: Spectrum) -> np.ndarray:
    """Weighted inner products ``<e_i, e_j>`` of the stored modes."""
    e = spectrum.eigenfunctions
    return e.T @ (spectrum.grid.weights[:, None] * e)
