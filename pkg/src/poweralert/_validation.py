"""Small input-validation helpers used by the estimators and public functions."""

from numbers import Integral, Real

import numpy as np

from .exceptions import InvalidInputError


def as_generator(seed=None):
    """Turn ``None``, an int, a SeedSequence or a Generator into a ``np.random.Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, (Integral, np.random.SeedSequence)):
        return np.random.default_rng(seed)
    raise InvalidInputError(f"cannot build a random generator from {seed!r}")


def check_positive(name, value, *, strict=True, integer=False):
    kind = Integral if integer else Real
    if isinstance(value, bool) or not isinstance(value, kind):
        raise InvalidInputError(f"{name} must be {'an integer' if integer else 'a number'}, got {value!r}")
    if (strict and value <= 0) or (not strict and value < 0):
        bound = "> 0" if strict else ">= 0"
        raise InvalidInputError(f"{name} must be {bound}, got {value!r}")
    return value


def check_probability(name, value):
    if not isinstance(value, Real) or not 0.0 <= value <= 1.0:
        raise InvalidInputError(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)


def check_1d(name, values, *, min_length=1, dtype=float):
    arr = np.asarray(values, dtype=dtype)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.shape[0] < min_length:
        raise InvalidInputError(f"{name} needs at least {min_length} entries, got {arr.shape[0]}")
    if np.issubdtype(arr.dtype, np.floating) and not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr
