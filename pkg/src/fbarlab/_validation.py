"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

import numbers

import numpy as np

from .errors import InvalidInputError


def check_points(X, dim, name="X"):
    """Return ``X`` as a float64 array of shape ``(n, dim)``.

    A single point of length ``dim`` is promoted to shape ``(1, dim)``.
    """
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1 and arr.shape[0] == dim:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise InvalidInputError(f"{name} must have shape (n, {dim}), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


def check_word(w, name="word"):
    arr = np.asarray(w)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        raise InvalidInputError(f"{name} must contain integer symbols")
    return arr.astype(np.int64, copy=False)


def check_words(W, name="words"):
    arr = np.asarray(W)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must have shape (n_words, length), got {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        raise InvalidInputError(f"{name} must contain integer symbols")
    return arr.astype(np.int64, copy=False)


def check_positive_int(value, name, minimum=1):
    if not isinstance(value, numbers.Integral) or isinstance(value, bool):
        raise InvalidInputError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise InvalidInputError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_unit_interval(value, name, *, closed_right=False):
    value = float(value)
    ok = 0.0 <= value <= 1.0 if closed_right else 0.0 <= value < 1.0
    if not ok:
        bracket = "]" if closed_right else ")"
        raise InvalidInputError(f"{name} must lie in [0, 1{bracket}, got {value}")
    return value


def wrap01(x):
    """Reduce reals to ``[0, 1)``; guards the ``-0.0 % 1 == 1.0`` edge of float rounding."""
    y = np.mod(x, 1.0)
    return np.where(y >= 1.0, 0.0, y)
