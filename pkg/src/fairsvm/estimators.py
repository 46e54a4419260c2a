"""scikit-learn style wrappers around the functional trainers.

``fit`` takes the protected attribute as a third argument, ``fit(X, y, z)``.
Class labels may be any two values; they are mapped to -1/+1 in sorted order
(``classes_[1]`` is the positive class). The protected attribute must already
be coded as -1/+1.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_matrix
from .ccp import CcpConfig
from .exceptions import InputError
from .kernel import Kernel, kernel_decision_values, train_fair_ksvm, train_ksvm
from .linear import decision_values, train_lsvm, train_ssvm, train_zsvm

__all__ = ["FairLinearSVC", "FairKernelSVC"]

LINEAR_METHODS = ("lsvm", "zsvm", "ssvm")


class _SignedLabelMixin(ClassifierMixin):
    def _encode(self, y):
        y = np.asarray(y).ravel()
        classes = np.unique(y)
        if classes.size != 2:
            raise InputError(f"need exactly two classes, got {classes.size}")
        self.classes_ = classes
        return np.where(y == classes[1], 1.0, -1.0)

    def predict(self, X):
        scores = self.decision_function(X)
        return self.classes_[(scores >= 0).astype(int)]


class FairLinearSVC(_SignedLabelMixin, BaseEstimator):
    """Linear SVM, optionally with mean and covariance fairness constraints.

    Parameters
    ----------
    method : {"lsvm", "zsvm", "ssvm"}
        ``lsvm`` ignores ``z``; ``zsvm`` bounds the group mean-score gap by
        ``d``; ``ssvm`` additionally penalizes the covariance gap with ``mu``.
    lam : float
        Weight of ``||w||^2``.
    d : float
        Bound on ``|m'w|``.
    mu : float
        Covariance penalty weight (``ssvm`` only).
    max_ccp_iter, ccp_tol : int, float
        Outer-loop limits of the convex-concave procedure.
    """

    def __init__(self, method="ssvm", lam=1.0, d=0.0, mu=1.0, max_ccp_iter=50, ccp_tol=1e-6):
        self.method = method
        self.lam = lam
        self.d = d
        self.mu = mu
        self.max_ccp_iter = max_ccp_iter
        self.ccp_tol = ccp_tol

    def fit(self, X, y, z=None):
        if self.method not in LINEAR_METHODS:
            raise InputError(f"unknown method {self.method!r}; choose from {LINEAR_METHODS}")
        X = check_matrix(X, min_rows=2)
        ys = self._encode(y)
        if self.method != "lsvm" and z is None:
            raise InputError(f"method {self.method!r} needs the protected attribute z")
        if self.method == "lsvm":
            model = train_lsvm(X, ys, self.lam)
        elif self.method == "zsvm":
            model = train_zsvm(X, ys, z, self.lam, self.d)
        else:
            ccp = CcpConfig(max_outer_iterations=self.max_ccp_iter,
                            objective_change_tolerance=self.ccp_tol, mu=self.mu)
            model = train_ssvm(X, ys, z, self.lam, self.d, ccp)
        self.model_ = model
        self.coef_ = model.w.copy()
        self.intercept_ = model.b
        self.n_features_in_ = X.shape[1]
        self.n_iter_ = model.iterations
        return self

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        return decision_values(self.model_, X)


class FairKernelSVC(_SignedLabelMixin, BaseEstimator):
    """Kernel SVM in the dual, optionally fair.

    Parameters
    ----------
    kernel : {"rbf", "linear", "poly"}
    gamma : float or None
        RBF width; ``None`` picks ``1 / (p * median squared distance)``.
    degree, coef0 : int, float
        Polynomial kernel parameters.
    lam : float
        Upper bound on each dual coefficient.
    d : float or None
        Bound on the mean-score gap. ``None`` leaves it out (unless ``fair``).
    mu : float
        Covariance penalty weight when ``fair``.
    fair : bool
        Run the convex-concave procedure on the Gram-side covariance gap.
    """

    def __init__(self, kernel="rbf", gamma=None, degree=3, coef0=1.0, lam=1.0, d=None, mu=1.0,
                 fair=False, max_ccp_iter=50, ccp_tol=1e-6):
        self.kernel = kernel
        self.gamma = gamma
        self.degree = degree
        self.coef0 = coef0
        self.lam = lam
        self.d = d
        self.mu = mu
        self.fair = fair
        self.max_ccp_iter = max_ccp_iter
        self.ccp_tol = ccp_tol

    def fit(self, X, y, z=None):
        X = check_matrix(X, min_rows=2)
        ys = self._encode(y)
        kern = Kernel(self.kernel, self.gamma, self.degree, self.coef0)
        if self.fair:
            if z is None:
                raise InputError("fair kernel SVM needs the protected attribute z")
            ccp = CcpConfig(max_outer_iterations=self.max_ccp_iter,
                            objective_change_tolerance=self.ccp_tol, mu=self.mu)
            model = train_fair_ksvm(X, ys, z, kern, self.lam, 0.0 if self.d is None else self.d, ccp)
        elif self.d is not None:
            if z is None:
                raise InputError("a mean-score bound d needs the protected attribute z")
            model = train_ksvm(X, ys, kern, self.lam, z=z, d=self.d)
        else:
            model = train_ksvm(X, ys, kern, self.lam)
        self.model_ = model
        self.dual_coef_ = model.beta.copy()
        self.intercept_ = model.b
        self.n_features_in_ = X.shape[1]
        self.n_iter_ = model.iterations
        return self

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        return kernel_decision_values(self.model_, X)
