"""Input checks shared by the estimator and the CLI."""

import numbers

import numpy as np
from sklearn.utils.validation import check_array

from .kernels import Domain


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_domain(domain) -> Domain:
    if isinstance(domain, Domain):
        return domain
    try:
        a, b = domain
    except (TypeError, ValueError):
        raise ValueError(f"domain must be a pair (a, b), got {domain!r}") from None
    return Domain(a, b)


def check_fields(X, n_nodes, name="X"):
    """2-D float array of realizations, one per row, on ``n_nodes`` nodes."""
    X = check_array(X, dtype=np.float64, ensure_2d=True, input_name=name)
    if X.shape[1] != n_nodes:
        raise ValueError(f"{name} has {X.shape[1]} columns; the quadrature grid has {n_nodes} nodes")
    return X


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral):
        raise TypeError(f"seed must be an integer, got {seed!r}")
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    return int(seed)
