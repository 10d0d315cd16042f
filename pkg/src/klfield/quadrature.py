"""Quadrature grids standing in for L2 on an interval."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .exceptions import ConvergenceError
from .kernels import Domain


class Rule(str, Enum):
    TRAPEZOID = "trapezoid"
    GAUSS_LEGENDRE = "gauss_legendre"


@dataclass(frozen=True, eq=False)
class Grid:
    domain: Domain
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    rule: Rule = Rule.TRAPEZOID

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n(self) -> int:
        return self.nodes.size

    def to_dict(self) -> dict:
        return {"rule": self.rule.value, "n": self.n, "domain": self.domain.to_list()}

    @classmethod
    def from_dict(cls, d: dict) -> Grid:
        unknown = set(d) - {"rule", "n", "domain"}
        if unknown:
            raise ValueError(f"unknown grid keys: {sorted(unknown)}")
        if "n" not in d:
            raise ValueError("grid descriptor needs 'n'")
        domain = d.get("domain", [0.0, 1.0])
        if len(domain) != 2:
            raise ValueError(f"domain must be [a, b], got {domain!r}")
        return make_grid(Domain(*domain), d["n"], d.get("rule", "trapezoid"))


def gauss_legendre(n: int, tol: float = 1e-14, max_iter: int = 100):
    """Nodes and weights of the ``n``-point Gauss-Legendre rule on [-1, 1].

    Newton iteration on ``P_n`` from the cosine initial guess; the
    three-term recurrence gives ``P_n`` and ``P_{n-1}`` together.
    """
    k = np.arange(1, n + 1)
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(max_iter):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for j in range(2, n + 1):
            p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
        # p1 = P_n(x), p0 = P_{n-1}(x)
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) <= tol:
            break
    else:
        raise ConvergenceError(f"Gauss-Legendre Newton iteration did not converge for n={n}")
    p0 = np.ones_like(x)
    p1 = x.copy()
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    # ascending order, and exact mirror symmetry
    x = x[::-1].copy()
    w = w[::-1].copy()
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return x, w


def make_grid(domain: Domain, n: int, rule: Rule | str = Rule.TRAPEZOID) -> Grid:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise TypeError(f"n must be an integer, got {n!r}")
    if n < 2:
        raise ValueError(f"a grid needs n >= 2 nodes, got {n}")
    rule = Rule(rule)
    a, b = domain.a, domain.b
    if rule is Rule.TRAPEZOID:
        h = (b - a) / (n - 1)
        nodes = a + h * np.arange(n)
        nodes[-1] = b
        weights = np.full(n, h)
        weights[0] = weights[-1] = 0.5 * h
    else:
        x, w = gauss_legendre(int(n))
        half = 0.5 * (b - a)
        nodes = domain.midpoint + half * x
        weights = half * w
    return Grid(domain, nodes, weights, rule)


def _check_len(grid: Grid, values, name="values") -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.shape[-1:] != (grid.n,):
        raise ValueError(f"{name} has trailing length {v.shape[-1:] or 'scalar'}, grid has {grid.n} nodes")
    return v


def integrate(grid: Grid, values) -> float:
    """Quadrature sum ``sum_i w_i f(t_i)``; a 2-D input integrates each row."""
    v = _check_len(grid, values)
    out = v @ grid.weights
    return float(out) if out.ndim == 0 else out


def inner_product(grid: Grid, u, v) -> float:
    u = _check_len(grid, u, "u")
    v = _check_len(grid, v, "v")
    return float(np.dot(grid.weights * u, v))


def l2_norm(grid: Grid, u) -> float:
    return math.sqrt(max(inner_product(grid, u, u), 0.0))
