"""Threshold-sweep evaluation: ROC curves, AUC, and multi-threshold fairness.

A score ``s`` is classified positive at threshold ``t`` when ``s - t >= 0``
(``sign(0) = +1``). Sweeping ``t`` over every distinct score yields all
achievable (false positive rate, true positive rate) pairs.

``dp_delta`` is the largest vertical gap between the ROC curve for predicting
the protected attribute and the diagonal, i.e. the largest difference in
positive-prediction rates between the two groups at a common threshold.
``eo_delta`` is the same statistic on the rows whose true label is +1.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import check_signs
from .exceptions import DegenerateGroupError, DegenerateLabelError, InputError

__all__ = ["RocCurve", "FairnessReport", "roc", "auc", "dp_delta", "eo_delta", "fairness_report"]


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray

    def points(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def max_diagonal_gap(self):
        return float(np.max(np.abs(self.tpr - self.fpr)))


@dataclass(frozen=True)
class FairnessReport:
    auc_y: float
    dp_delta: float
    eo_delta: float
    roc_y: RocCurve
    roc_z: RocCurve
    roc_z_given_y_pos: RocCurve

    def metrics(self):
        return {"auc_y": self.auc_y, "dp_delta": self.dp_delta, "eo_delta": self.eo_delta}


def _prepare(scores, labels, name, error):
    s = np.asarray(scores, dtype=float).ravel()
    if not np.all(np.isfinite(s)):
        raise InputError("scores contain non-finite values")
    lab = check_signs(labels, s.shape[0], name=name)
    if not (np.any(lab > 0) and np.any(lab < 0)):
        raise error(f"{name} must contain both -1 and +1")
    return s, lab


def _roc_arrays(s, lab):
    # descending distinct scores; ties fall into one threshold
    order = np.argsort(-s, kind="mergesort")
    s_sorted = s[order]
    pos = (lab[order] > 0).astype(float)
    tp = np.cumsum(pos)
    fp = np.cumsum(1.0 - pos)
    last_of_run = np.r_[s_sorted[1:] != s_sorted[:-1], True]
    n_pos, n_neg = tp[-1], fp[-1]
    tpr = np.r_[0.0, tp[last_of_run] / n_pos]
    fpr = np.r_[0.0, fp[last_of_run] / n_neg]
    thresholds = np.r_[np.inf, s_sorted[last_of_run]]
    return fpr, tpr, thresholds


def roc(scores, labels):
    """ROC curve of ``scores`` for predicting ``labels`` (in {-1, +1}).

    One point per distinct score plus the (0, 0) endpoint; the lowest
    threshold always gives (1, 1).
    """
    s, lab = _prepare(scores, labels, "labels", DegenerateLabelError)
    fpr, tpr, thr = _roc_arrays(s, lab)
    return RocCurve(fpr, tpr, thr)


def auc(curve):
    """Trapezoidal area under an ROC curve."""
    return float(np.sum(np.diff(curve.fpr) * (curve.tpr[1:] + curve.tpr[:-1]) / 2.0))


def dp_delta(scores, z):
    """Largest positive-rate gap between protected groups over all thresholds."""
    s, zz = _prepare(scores, z, "z", DegenerateGroupError)
    fpr, tpr, _ = _roc_arrays(s, zz)
    return float(np.max(np.abs(tpr - fpr)))


def eo_delta(scores, z, y):
    """``dp_delta`` restricted to rows with ``y == +1``."""
    s = np.asarray(scores, dtype=float).ravel()
    y = check_signs(y, s.shape[0], name="y")
    z = check_signs(z, s.shape[0], name="z")
    keep = y > 0
    if not (np.any(z[keep] > 0) and np.any(z[keep] < 0)):
        raise DegenerateGroupError("both protected groups must appear among rows with y = +1")
    return dp_delta(s[keep], z[keep])


def fairness_report(scores, y, z):
    """All threshold-sweep metrics for one score vector."""
    s = np.asarray(scores, dtype=float).ravel()
    y = check_signs(y, s.shape[0], name="y")
    z = check_signs(z, s.shape[0], name="z")
    roc_y = roc(s, y)
    roc_z = roc(s, z)
    keep = y > 0
    if not (np.any(z[keep] > 0) and np.any(z[keep] < 0)):
        raise DegenerateGroupError("both protected groups must appear among rows with y = +1")
    roc_zy = roc(s[keep], z[keep])
    return FairnessReport(
        auc_y=auc(roc_y),
        dp_delta=roc_z.max_diagonal_gap(),
        eo_delta=roc_zy.max_diagonal_gap(),
        roc_y=roc_y,
        roc_z=roc_z,
        roc_z_given_y_pos=roc_zy,
    )
