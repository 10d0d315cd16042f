"""Truncated Mercer reconstruction of the kernel and its error."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import Kernel, eval_kernel
from .quadrature import Grid, Rule, make_grid
from .spectral import Spectrum, _check_mode_count

DEFAULT_EVAL_N = 101


def mercer_truncation(spectrum: Spectrum, n_terms: int, s, t):
    """``R^N(s, t) = sum_{i<N} lambda_i e_i(s) e_i(t)``; ``s`` and ``t`` broadcast.

    The sum is formed as ``lambda_i * (e_i(s) * e_i(t))`` so swapping the
    arguments gives bitwise-identical output.
    """
    _check_mode_count(spectrum, n_terms)
    if n_terms < 1:
        raise ValueError("truncation order must be >= 1")
    s_arr, t_arr = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    es = spectrum.evaluate(s_arr, n_terms)
    et = spectrum.evaluate(t_arr, n_terms)
    out = np.sum(spectrum.eigenvalues[:n_terms] * (es * et), axis=-1)
    return float(out) if out.ndim == 0 else out


def truncated_variance(spectrum: Spectrum, n_terms: int, t):
    """``v_N(t) = sum_{i<N} lambda_i e_i(t)^2``."""
    _check_mode_count(spectrum, n_terms)
    e = spectrum.evaluate(t, n_terms)
    out = np.sum(spectrum.eigenvalues[:n_terms] * (e * e), axis=-1)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class ReconstructionReport:
    n_terms: int
    eval_grid: Grid
    max_abs_error: float
    l2_error: float
    per_N_curve: list[tuple[int, float]]
    l2_curve: list[float] = field(repr=False)


def _lattice(spectrum: Spectrum, eval_grid) -> Grid:
    if eval_grid is None:
        eval_grid = DEFAULT_EVAL_N
    if isinstance(eval_grid, Grid):
        if eval_grid.domain != spectrum.grid.domain:
            raise ValueError("evaluation grid domain differs from the spectrum's")
        return eval_grid
    return make_grid(spectrum.grid.domain, eval_grid, Rule.TRAPEZOID)


def reconstruction_report(spectrum: Spectrum, kernel: Kernel | None = None, n_max: int | None = None,
                          eval_grid: Grid | int | None = None) -> ReconstructionReport:
    """Sup and L2 errors of ``R^N`` for ``N = 1..n_max`` over a lattice.

    ``eval_grid`` is an integer for a uniform ``n x n`` lattice (default
    101) or a :class:`Grid` whose nodes form the lattice; the L2 error uses
    that grid's weights on both axes.
    """
    kernel = spectrum.kernel if kernel is None else kernel
    n_max = spectrum.n_modes if n_max is None else n_max
    _check_mode_count(spectrum, n_max)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    g = _lattice(spectrum, eval_grid)
    s = g.nodes
    exact = eval_kernel(kernel, s[:, None], s[None, :])
    w2 = g.weights[:, None] * g.weights[None, :]
    if spectrum.grid is g:
        e = np.asarray(spectrum.eigenfunctions[:, :n_max])
    else:
        e = spectrum.evaluate(s, n_max)
    lam = spectrum.eigenvalues
    approx = np.zeros_like(exact)
    curve, l2_curve = [], []
    for i in range(n_max):
        approx += lam[i] * (e[:, i, None] * e[None, :, i])
        diff = exact - approx
        curve.append((i + 1, float(np.max(np.abs(diff)))))
        l2_curve.append(float(np.sqrt(np.sum(w2 * diff * diff))))
    return ReconstructionReport(
        n_terms=n_max,
        eval_grid=g,
        max_abs_error=curve[-1][1],
        l2_error=l2_curve[-1],
        per_N_curve=curve,
        l2_curve=l2_curve,
    )


def error_surface(spectrum: Spectrum, n_terms: int, eval_grid: Grid | int | None = None, kernel: Kernel | None = None):
    """Lattice coordinates, ``R``, ``R^N`` and their difference, each ``n x n``."""
    kernel = spectrum.kernel if kernel is None else kernel
    g = _lattice(spectrum, eval_grid)
    s, t = np.meshgrid(g.nodes, g.nodes, indexing="ij")
    exact = eval_kernel(kernel, s, t)
    approx = mercer_truncation(spectrum, n_terms, s, t)
    return s, t, exact, approx, exact - approx
