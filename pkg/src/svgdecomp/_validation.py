"""Input validation helpers shared by the estimators and the functional API."""

import numbers

import numpy as np


class ConfigurationError(ValueError):
    """Raised when a problem or algorithm is configured inconsistently."""


class DomainError(ValueError):
    """Raised when an input lies outside the domain of an operation."""


def check_vector(x, name="x", n=None):
    """Return ``x`` as a finite 1-D float array, optionally of length ``n``."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise DomainError(f"{name} must be nonempty")
    if n is not None and arr.size != n:
        raise DomainError(f"{name} must have length {n}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


def check_bounds(lb, ub, n=None):
    lb = check_vector(lb, "lb", n)
    ub = check_vector(ub, "ub", lb.size)
    if np.any(ub <= lb):
        raise ConfigurationError("bounds must satisfy lb < ub in every coordinate")
    return lb, ub


def check_count(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ConfigurationError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigurationError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_index_set(indices, n, name="indices"):
    """Return ``indices`` as a list of distinct ints in ``range(n)``, order kept."""
    out = [int(i) for i in indices]
    if len(set(out)) != len(out):
        raise DomainError(f"{name} contains duplicates")
    for i in out:
        if not 0 <= i < n:
            raise DomainError(f"{name} entry {i} outside [0, {n})")
    return out


def check_random_state(seed):
    """Turn ``seed`` into a :class:`numpy.random.Generator`."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
