"""Kernel SVMs in the dual, with the kernel-space fairness constraints.

The dual is solved in the standard scaling

    minimize    1/2 (y*alpha)' K (y*alpha) - sum(alpha)
    subject to  y'alpha = 0,  0 <= alpha_i <= lam

so that the score ``K(X, x)'(y*alpha) + b`` and the bias averaged over
strict-interior support vectors describe the same separating function.

The fair variant constrains the mean-score gap between protected groups and
penalizes the Gram-side covariance gap ``beta'(S+ - S-)beta`` with
``beta = y*alpha``, using the same spectral convex-concave procedure as the
linear trainer.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import qp
from ._validation import (
    check_both_groups,
    check_both_labels,
    check_matrix,
    check_nonnegative,
    check_positive,
    check_signs,
)
from .ccp import CcpConfig, covariance_penalty, linearized_pair, stalled
from .constraints import GroupIndex, kernel_covariance_gap, kernel_mean_difference
from .exceptions import InputError, TrainingError

__all__ = [
    "Kernel",
    "KernelModel",
    "default_gamma",
    "gram",
    "train_ksvm",
    "bias",
    "train_fair_ksvm",
    "kernel_decision_values",
    "dual_objective",
]

KERNELS = ("linear", "rbf", "poly")


@dataclass(frozen=True)
class Kernel:
    """Kernel function.

    ``linear``: ``x'x'``; ``rbf``: ``exp(-gamma ||x - x'||^2)``;
    ``poly``: ``(x'x' + coef0) ** degree``. A ``gamma`` of ``None`` is
    resolved from the training data by :func:`default_gamma`.
    """

    variant: str = "rbf"
    gamma: float = None
    degree: int = 3
    coef0: float = 1.0

    def __post_init__(self):
        if self.variant not in KERNELS:
            raise InputError(f"unknown kernel {self.variant!r}; choose from {KERNELS}")
        if self.gamma is not None and not (np.isfinite(self.gamma) and self.gamma > 0):
            raise InputError("gamma must be positive")
        if int(self.degree) != self.degree or self.degree < 1:
            raise InputError("degree must be an integer >= 1")
        if not (np.isfinite(self.coef0) and self.coef0 >= 0):
            raise InputError("coef0 must be nonnegative")

    def resolved(self, X):
        if self.variant == "rbf" and self.gamma is None:
            return replace(self, gamma=default_gamma(X))
        return self

    def to_dict(self):
        return {"variant": self.variant, "gamma": self.gamma, "degree": int(self.degree), "coef0": self.coef0}


def default_gamma(X):
    """``1 / (p * median pairwise squared distance)``; 1/p if all points coincide."""
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    sq = np.sum(X * X, axis=1)
    D = np.maximum(sq[:, None] + sq[None, :] - 2.0 * X @ X.T, 0.0)
    off = D[np.triu_indices(n, k=1)]
    med = float(np.median(off)) if off.size else 0.0
    return 1.0 / (p * med) if med > 0 else 1.0 / p


def gram(kernel, A, B):
    """Matrix of kernel values between the rows of ``A`` and ``B``."""
    A = check_matrix(A, "A")
    B = check_matrix(B, "B")
    if A.shape[1] != B.shape[1]:
        raise InputError(f"column mismatch: {A.shape[1]} vs {B.shape[1]}")
    if kernel.variant == "linear":
        return A @ B.T
    if kernel.variant == "poly":
        return (A @ B.T + kernel.coef0) ** int(kernel.degree)
    if kernel.gamma is None:
        raise InputError("rbf kernel needs gamma; call Kernel.resolved(X) first")
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * A @ B.T
    )
    return np.exp(-kernel.gamma * np.maximum(sq, 0.0))


@dataclass(frozen=True)
class KernelModel:
    alpha: np.ndarray
    b: float
    X: np.ndarray
    y: np.ndarray
    kernel: Kernel
    lam: float
    method: str = "ksvm"
    d: float = None
    mu: float = None
    iterations: int = 0
    objective: float = None
    objective_history: tuple = field(default=())
    solver_status: str = qp.CONVERGED

    @property
    def n_features(self):
        return int(self.X.shape[1])

    @property
    def beta(self):
        return self.y * self.alpha


def dual_objective(K, y, alpha):
    beta = y * alpha
    return float(0.5 * beta @ K @ beta - alpha.sum())


def _check_xy(X, y):
    X = check_matrix(X, min_rows=2)
    y = check_signs(y, X.shape[0], name="y")
    check_both_labels(y)
    return X, y


def _dual_problem(K, y, lam, mean_dir=None, d=None, cov_terms=None, mu=0.0):
    n = K.shape[0]
    with_t = cov_terms is not None
    nv = n + (1 if with_t else 0)
    P = np.zeros((nv, nv))
    P[:n, :n] = (y[:, None] * K) * y[None, :]
    P = 0.5 * (P + P.T)
    q = np.zeros(nv)
    q[:n] = -1.0
    A = np.zeros((1, nv))
    A[0, :n] = y
    lower = np.full(nv, -np.inf)
    upper = np.full(nv, np.inf)
    lower[:n] = 0.0
    upper[:n] = lam
    G = h = None
    if mean_dir is not None:
        G = np.zeros((2, nv))
        G[0, :n] = mean_dir * y
        G[1, :n] = -mean_dir * y
        h = np.array([d, d])
    quadratic = []
    if with_t:
        q[-1] = mu
        for Qa, ca, r in cov_terms:
            Q = np.zeros((nv, nv))
            Q[:n, :n] = Qa
            c = np.zeros(nv)
            c[:n] = ca
            c[-1] = -1.0
            quadratic.append(qp.QuadraticConstraint(Q, c, r))
    return qp.ConvexQuadraticProgram(P=P, q=q, A=A, b=np.zeros(1), G=G, h=h,
                                     quadratic=quadratic, lower=lower, upper=upper)


def _solve_dual(problem, n, tol, max_iter, x0=None, iteration=0):
    res = qp.solve(problem, feas_tol=tol, kkt_tol=tol, max_iter=max_iter, x0=x0)
    if res.status == qp.INFEASIBLE:
        raise TrainingError(f"dual subproblem infeasible at outer iteration {iteration}", iteration, res)
    if not res.converged and (res.feasibility > 1e-6 or res.kkt_residual > 1e-6):
        raise TrainingError(
            f"dual solver stopped ({res.status}, kkt={res.kkt_residual:.2e}) at outer iteration {iteration}",
            iteration,
            res,
        )
    return res, res.x[:n].copy()


def bias(alpha, X, y, kernel, lam, K=None, interior_tol=None):
    """Intercept averaged over strict-interior support vectors.

    ``b = mean_{i in I} (y_i - K(X, x_i)'(y*alpha))`` with
    ``I = {i : 0 < alpha_i < lam}``; membership uses ``interior_tol``
    (default ``1e-6 * lam``) to absorb solver round-off. When ``I`` is empty
    the intercept is placed midway between the largest negative-class and
    smallest positive-class kernel score.
    """
    alpha = np.asarray(alpha, dtype=float)
    y = np.asarray(y, dtype=float)
    if K is None:
        K = gram(kernel, X, X)
    f = K @ (y * alpha)
    tol = 1e-6 * lam if interior_tol is None else interior_tol
    interior = (alpha > tol) & (alpha < lam - tol)
    if np.any(interior):
        return float(np.mean(y[interior] - f[interior]))
    return float(-(np.max(f[y < 0]) + np.min(f[y > 0])) / 2.0)


def train_ksvm(X, y, kernel, lam, z=None, d=None, tol=1e-9, max_iter=200):
    """Kernel SVM in the dual.

    With ``z`` and ``d`` given, the mean-score gap between protected groups is
    also constrained to ``[-d, d]`` (kernel analogue of the ZSVM constraint).
    """
    X, y = _check_xy(X, y)
    lam = check_positive(lam, "lam")
    kernel = kernel.resolved(X)
    K = gram(kernel, X, X)
    mean_dir = None
    method = "ksvm"
    if z is not None:
        z = check_signs(z, X.shape[0], name="z")
        group = GroupIndex.from_z(z)
        d = check_nonnegative(0.0 if d is None else d, "d")
        mean_dir = kernel_mean_difference(K, group)
        method = "kzsvm"
    res, alpha = _solve_dual(_dual_problem(K, y, lam, mean_dir, d), len(y), tol, max_iter)
    b = bias(alpha, X, y, kernel, lam, K=K)
    obj = dual_objective(K, y, alpha)
    return KernelModel(alpha, b, X, y, kernel, lam, method, d=d, iterations=0, objective=obj,
                       objective_history=(obj,), solver_status=res.status)


def train_fair_ksvm(X, y, z, kernel, lam, d, ccp=None):
    """Fair kernel SVM: mean-score constraint plus penalized Gram-side covariance gap.

    Initializes from the dual with only the mean-score constraint, then
    iterates the linearized subproblem over ``alpha``. The penalized objective

        1/2 beta'K beta - sum(alpha) + mu |beta'(U+ - U-)beta|

    is non-increasing across iterations; ``objective_history`` records it.
    """
    ccp = ccp or CcpConfig()
    X, y = _check_xy(X, y)
    z = check_signs(z, X.shape[0], name="z")
    check_both_groups(z, min_size=2)
    lam = check_positive(lam, "lam")
    d = check_nonnegative(d, "d")
    mu = ccp.mu
    tol, max_iter = ccp.inner_tol, ccp.inner_max_iter
    kernel = kernel.resolved(X)
    n = X.shape[0]

    K = gram(kernel, X, X)
    group = GroupIndex.from_z(z, min_size=2)
    mean_dir = kernel_mean_difference(K, group)
    split = kernel_covariance_gap(K[:, group.positive], K[:, group.negative], group).split
    # alpha-space matrices: diag(y) U diag(y)
    u_plus = (y[:, None] * split.u_plus) * y[None, :]
    u_minus = (y[:, None] * split.u_minus) * y[None, :]

    def penalized(alpha):
        return dual_objective(K, y, alpha) + mu * covariance_penalty(split, y * alpha)

    try:
        res, alpha = _solve_dual(_dual_problem(K, y, lam, mean_dir, d), n, tol, max_iter)
    except TrainingError as exc:
        raise TrainingError(f"initialization failed: {exc}", 0, exc.result) from exc
    history = [penalized(alpha)]
    status = res.status
    iterations = 0
    for k in range(1, ccp.max_outer_iterations + 1):
        if mu == 0.0:
            # unpriced epigraph variable: covariance rows are redundant
            problem = _dual_problem(K, y, lam, mean_dir, d)
            x0 = alpha
        else:
            terms = linearized_pair(u_plus, u_minus, alpha)
            problem = _dual_problem(K, y, lam, mean_dir, d, cov_terms=terms, mu=mu)
            x0 = np.append(alpha, covariance_penalty(split, y * alpha))
        res, alpha = _solve_dual(problem, n, tol, max_iter, x0=x0, iteration=k)
        status = res.status
        iterations = k
        history.append(penalized(alpha))
        if stalled(history[-2], history[-1], ccp.objective_change_tolerance):
            break
    b = bias(alpha, X, y, kernel, lam, K=K)
    return KernelModel(alpha, b, X, y, kernel, lam, "fair-ksvm", d=d, mu=mu, iterations=iterations,
                       objective=history[-1], objective_history=tuple(history), solver_status=status)


def kernel_decision_values(model, X):
    """Scores ``K(X_train, x)'(y*alpha) + b`` for each row of ``X``."""
    X = check_matrix(X)
    if X.shape[1] != model.n_features:
        raise InputError(f"X has {X.shape[1]} columns, model expects {model.n_features}")
    return gram(model.kernel, X, model.X) @ model.beta + model.b
