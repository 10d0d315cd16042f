"""Autocorrelation kernels on a bounded interval."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


@dataclass(frozen=True)
class Domain:
    """Closed interval ``[a, b]`` with ``a < b``."""

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
            raise ValueError(f"domain needs finite a < b, got [{self.a}, {self.b}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    def contains(self, t) -> bool:
        t = np.asarray(t, dtype=float)
        return bool(np.all((t >= self.a) & (t <= self.b)))

    def to_list(self) -> list[float]:
        return [self.a, self.b]


class KernelKind(str, Enum):
    EXPONENTIAL = "exponential"
    SQUARED_EXPONENTIAL = "squared_exponential"


@dataclass(frozen=True)
class Kernel:
    """Stationary autocorrelation kernel ``R(s, t)``.

    Parameters are checked once here so evaluation stays branch-free.
    """

    kind: KernelKind = KernelKind.EXPONENTIAL
    sigma2: float = 1.0
    corr_len: float = 1.0
    domain: Domain = Domain(0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(self.kind))
        sigma2, corr_len = float(self.sigma2), float(self.corr_len)
        if not math.isfinite(sigma2) or sigma2 < 0:
            raise ValueError(f"sigma2 must be a finite number >= 0, got {self.sigma2!r}")
        if not math.isfinite(corr_len) or corr_len <= 0:
            raise ValueError(f"corr_len must be a finite number > 0, got {self.corr_len!r}")
        object.__setattr__(self, "sigma2", sigma2)
        object.__setattr__(self, "corr_len", corr_len)
        if not isinstance(self.domain, Domain):
            object.__setattr__(self, "domain", Domain(*self.domain))

    def __call__(self, s, t):
        return eval_kernel(self, s, t)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "sigma2": self.sigma2,
            "corr_len": self.corr_len,
            "domain": self.domain.to_list(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> Kernel:
        unknown = set(d) - {"kind", "sigma2", "corr_len", "domain"}
        if unknown:
            raise ValueError(f"unknown kernel keys: {sorted(unknown)}")
        try:
            domain = d.get("domain", [0.0, 1.0])
            if len(domain) != 2:
                raise ValueError(f"domain must be [a, b], got {domain!r}")
            return cls(
                kind=d.get("kind", "exponential"),
                sigma2=d.get("sigma2", 1.0),
                corr_len=d.get("corr_len", 1.0),
                domain=Domain(*domain),
            )
        except TypeError as exc:
            raise ValueError(f"malformed kernel descriptor: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> Kernel:
        return cls.from_dict(json.loads(text))


def eval_kernel(kernel: Kernel, s, t):
    """Evaluate ``R(s, t)``; ``s`` and ``t`` broadcast like numpy arrays.

    Scalars in give a Python float out.
    """
    r = np.abs(np.subtract(s, t, dtype=float))
    if kernel.kind is KernelKind.EXPONENTIAL:
        out = kernel.sigma2 * np.exp(-r / kernel.corr_len)
    else:
        out = kernel.sigma2 * np.exp(-(r * r) / (2.0 * kernel.corr_len**2))
    if np.ndim(out) == 0:
        return float(out)
    return out


def kernel_matrix(kernel: Kernel, nodes) -> np.ndarray:
    """Matrix ``A[i, j] = R(t_i, t_j)`` over the nodes of a grid.

    ``nodes`` may be a :class:`~klfield.quadrature.Grid` or an array of
    points. The upper triangle is computed and mirrored, so the result is
    bitwise symmetric.
    """
    t = np.asarray(getattr(nodes, "nodes", nodes), dtype=float)
    if t.ndim != 1:
        raise ValueError("nodes must be one-dimensional")
    n = t.size
    iu, ju = np.triu_indices(n)
    a = np.empty((n, n))
    vals = eval_kernel(kernel, t[iu], t[ju])
    a[iu, ju] = vals
    a[ju, iu] = vals
    return a
