"""Data-dependent fairness constraints.

Two kinds of constraint are built here:

* a linear constraint bounding the gap between the mean scores of the two
  protected groups, ``-d <= m'w <= d``;
* a covariance gap ``Sigma_plus - Sigma_minus`` whose quadratic form is the
  difference of the score variances of the two groups. It is indefinite in
  general, so it carries its spectral split into two PSD parts.

For kernel machines the same objects live in the space of
``beta = y * alpha`` (length n) instead of the predictor space.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import check_both_groups, check_matrix, check_signs
from .exceptions import DegenerateGroupError, InputError
from .linalg import SpectralSplit, sample_covariance, spectral_split

__all__ = [
    "GroupIndex",
    "LinearFairnessConstraint",
    "CovarianceGap",
    "mean_difference",
    "covariance_gap",
    "kernel_mean_difference",
    "kernel_covariance_gap",
]


@dataclass(frozen=True)
class GroupIndex:
    positive: np.ndarray
    negative: np.ndarray

    @classmethod
    def from_z(cls, z, min_size=1):
        z = check_signs(z, name="z")
        check_both_groups(z, min_size=min_size)
        return cls(np.flatnonzero(z > 0), np.flatnonzero(z < 0))

    @property
    def n_pos(self):
        return int(self.positive.size)

    @property
    def n_neg(self):
        return int(self.negative.size)

    @property
    def n(self):
        return self.n_pos + self.n_neg


@dataclass(frozen=True)
class LinearFairnessConstraint:
    """``-bound <= direction' v <= bound``."""

    direction: np.ndarray
    bound: float

    def value(self, v):
        return float(self.direction @ v)

    def violation(self, v):
        return max(abs(self.value(v)) - self.bound, 0.0)


@dataclass(frozen=True)
class CovarianceGap:
    gap: np.ndarray
    split: SpectralSplit

    def value(self, v):
        return float(v @ self.gap @ v)

    def split_value(self, v):
        plus, minus = self.split.quadratic_forms(v)
        return plus - minus


def mean_difference(X, z):
    """Mean of the positive group's rows minus mean of the negative group's rows."""
    X = check_matrix(X)
    z = check_signs(z, X.shape[0], name="z")
    check_both_groups(z)
    return X[z > 0].mean(axis=0) - X[z < 0].mean(axis=0)


def covariance_gap(X, z, zero_tol=None):
    """Population covariance of the positive group minus that of the negative group."""
    X = check_matrix(X)
    z = check_signs(z, X.shape[0], name="z")
    check_both_groups(z, min_size=2)
    gap = sample_covariance(X[z > 0]) - sample_covariance(X[z < 0])
    return CovarianceGap(gap, spectral_split(gap, zero_tol))


def kernel_mean_difference(K, group):
    """Mean-difference direction in ``beta`` space from the full Gram matrix.

    ``direction' beta`` is the mean kernel score over the positive group
    minus the mean over the negative group.
    """
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] != group.n:
        raise InputError("Gram matrix must be square with one row per sample")
    if group.n_pos < 1 or group.n_neg < 1:
        raise DegenerateGroupError("both protected groups must be nonempty")
    return K[:, group.positive].mean(axis=1) - K[:, group.negative].mean(axis=1)


def _centered_side(Kg):
    # (1/m) Kg (I - ee'/m) Kg' == (1/m) Kc Kc' with columns centered per row
    m = Kg.shape[1]
    Kc = Kg - Kg.mean(axis=1, keepdims=True)
    S = Kc @ Kc.T / m
    return 0.5 * (S + S.T)


def kernel_covariance_gap(K_plus, K_minus, group=None, zero_tol=None):
    """Gram-side covariance gap ``S_plus - S_minus`` (n x n).

    Parameters
    ----------
    K_plus : array, shape (n, #P)
        Kernel block between all training points and the positive group.
    K_minus : array, shape (n, #N)
        Kernel block between all training points and the negative group.
    group : GroupIndex, optional
        When given, block shapes are checked against it.
    """
    K_plus = np.asarray(K_plus, dtype=float)
    K_minus = np.asarray(K_minus, dtype=float)
    if K_plus.ndim != 2 or K_minus.ndim != 2 or K_plus.shape[0] != K_minus.shape[0]:
        raise InputError("kernel blocks must be 2-D with the same number of rows")
    if group is not None:
        if K_plus.shape != (group.n, group.n_pos) or K_minus.shape != (group.n, group.n_neg):
            raise InputError("kernel block shapes do not match the group index")
    if K_plus.shape[1] < 2 or K_minus.shape[1] < 2:
        raise DegenerateGroupError("each protected group needs at least 2 points")
    if not (np.all(np.isfinite(K_plus)) and np.all(np.isfinite(K_minus))):
        raise InputError("kernel blocks contain non-finite values")
    gap = _centered_side(K_plus) - _centered_side(K_minus)
    return CovarianceGap(gap, spectral_split(gap, zero_tol))
