import numpy as np

from .exceptions import DegenerateGroupError, DegenerateLabelError, InputError


def check_matrix(X, name="X", min_rows=1):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise InputError(f"{name} must be 2-dimensional, got shape {X.shape}")
    if X.shape[0] < min_rows:
        raise InputError(f"{name} needs at least {min_rows} rows, got {X.shape[0]}")
    if not np.all(np.isfinite(X)):
        raise InputError(f"{name} contains non-finite values")
    return X


def check_signs(v, n=None, name="y"):
    """Return ``v`` as a float vector in {-1, +1}, validating length."""
    v = np.asarray(v, dtype=float).ravel()
    if n is not None and v.shape[0] != n:
        raise InputError(f"{name} has length {v.shape[0]}, expected {n}")
    if not np.all((v == 1.0) | (v == -1.0)):
        raise InputError(f"{name} must contain only -1 and +1")
    return v


def check_both_labels(y, name="y"):
    if not (np.any(y > 0) and np.any(y < 0)):
        raise DegenerateLabelError(f"{name} contains a single label; both -1 and +1 are required")


def check_both_groups(z, min_size=1, name="z"):
    n_pos = int(np.sum(z > 0))
    n_neg = int(np.sum(z < 0))
    if n_pos < min_size or n_neg < min_size:
        raise DegenerateGroupError(
            f"{name} groups have sizes (+1: {n_pos}, -1: {n_neg}); each needs at least {min_size}"
        )


def check_positive(value, name):
    if not np.isfinite(value) or value <= 0:
        raise InputError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_nonnegative(value, name):
    if not np.isfinite(value) or value < 0:
        raise InputError(f"{name} must be a nonnegative finite number, got {value!r}")
    return float(value)
