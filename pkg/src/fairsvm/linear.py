"""Linear SVM trainers: plain (LSVM), mean-constrained (ZSVM), spectral (SSVM).

All three solve the primal

    minimize    sum_i u_i + lam ||w||^2
    subject to  y_i (x_i'w + b) >= 1 - u_i,  u_i >= 0

ZSVM adds ``-d <= m'w <= d`` with ``m`` the difference of the protected group
means. SSVM starts from the ZSVM solution and runs the penalized
convex-concave procedure on the covariance gap: at each step the concave
halves of ``w'(U+ - U-)w`` are linearized at the current iterate, and the
resulting convex QCQP (with an epigraph variable ``t`` weighted by ``mu``) is
solved exactly.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

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
from .constraints import covariance_gap, mean_difference
from .exceptions import InputError, TrainingError

__all__ = [
    "LinearModel",
    "train_lsvm",
    "train_zsvm",
    "train_ssvm",
    "decision_values",
    "hinge_objective",
]


@dataclass(frozen=True)
class LinearModel:
    w: np.ndarray
    b: float
    lam: float
    method: str = "lsvm"
    d: float = None
    mu: float = None
    iterations: int = 0
    objective: float = None
    objective_history: tuple = field(default=())
    solver_status: str = qp.CONVERGED

    @property
    def n_features(self):
        return int(self.w.shape[0])


def _check_xy(X, y):
    X = check_matrix(X, min_rows=2)
    y = check_signs(y, X.shape[0], name="y")
    check_both_labels(y)
    return X, y


def hinge_objective(X, y, w, b, lam):
    """``sum_i max(0, 1 - y_i(x_i'w + b)) + lam ||w||^2``."""
    margins = y * (X @ w + b)
    return float(np.maximum(0.0, 1.0 - margins).sum() + lam * (w @ w))


def _primal_problem(X, y, lam, mean_dir=None, d=None, cov_terms=None, mu=0.0):
    """Assemble the sparse primal QP over ``(w, b, u[, t])``."""
    n, p = X.shape
    with_t = cov_terms is not None
    nv = p + 1 + n + (1 if with_t else 0)
    diag = np.zeros(nv)
    diag[:p] = 2.0 * lam
    P = sp.diags(diag, format="csr")
    q = np.zeros(nv)
    q[p + 1: p + 1 + n] = 1.0
    if with_t:
        q[-1] = mu

    blocks = [sp.csr_matrix(-y[:, None] * X), sp.csr_matrix(-y[:, None]), -sp.identity(n, format="csr")]
    if with_t:
        blocks.append(sp.csr_matrix((n, 1)))
    G_rows = [sp.hstack(blocks, format="csr")]
    h = [-np.ones(n)]
    if mean_dir is not None:
        row = np.zeros((2, nv))
        row[0, :p] = mean_dir
        row[1, :p] = -mean_dir
        G_rows.append(sp.csr_matrix(row))
        h.append(np.array([d, d]))
    G = sp.vstack(G_rows, format="csr")

    lower = np.full(nv, -np.inf)
    lower[p + 1: p + 1 + n] = 0.0

    quadratic = []
    if with_t:
        for Qw, cw, r in cov_terms:
            Q = sp.block_diag([sp.csr_matrix(Qw), sp.csr_matrix((nv - p, nv - p))], format="csr")
            c = np.zeros(nv)
            c[:p] = cw
            c[-1] = -1.0
            quadratic.append(qp.QuadraticConstraint(Q, c, r))
    return qp.ConvexQuadraticProgram(P=P, q=q, G=G, h=np.concatenate(h), quadratic=quadratic, lower=lower)


def _solve_primal(problem, X, y, tol, max_iter, x0=None, iteration=0):
    res = qp.solve(problem, feas_tol=tol, kkt_tol=tol, max_iter=max_iter, x0=x0)
    if res.status == qp.INFEASIBLE:
        raise TrainingError(f"subproblem infeasible at outer iteration {iteration}", iteration, res)
    if not res.converged and (res.feasibility > 1e-6 or res.kkt_residual > 1e-6):
        raise TrainingError(
            f"subproblem solver stopped ({res.status}, kkt={res.kkt_residual:.2e}) "
            f"at outer iteration {iteration}",
            iteration,
            res,
        )
    p = X.shape[1]
    return res, res.x[:p].copy(), float(res.x[p])


def train_lsvm(X, y, lam, tol=1e-9, max_iter=200):
    """Unconstrained linear SVM via the primal QP.

    Parameters
    ----------
    X : array, shape (n, p)
    y : array of {-1, +1}, shape (n,)
    lam : float
        Weight of ``||w||^2``.
    """
    X, y = _check_xy(X, y)
    lam = check_positive(lam, "lam")
    res, w, b = _solve_primal(_primal_problem(X, y, lam), X, y, tol, max_iter)
    obj = hinge_objective(X, y, w, b, lam)
    return LinearModel(w, b, lam, "lsvm", iterations=0, objective=obj,
                       objective_history=(obj,), solver_status=res.status)


def _zsvm_solution(X, y, z, lam, d, tol, max_iter):
    m = mean_difference(X, z)
    try:
        res, w, b = _solve_primal(_primal_problem(X, y, lam, m, d), X, y, tol, max_iter)
    except TrainingError:
        if d > 0:
            raise
        # d = 0 can trip the solver numerically; a hair of slack fixes it
        d = 1e-8
        res, w, b = _solve_primal(_primal_problem(X, y, lam, m, d), X, y, tol, max_iter)
    return res, w, b, d


def train_zsvm(X, y, z, lam, d, tol=1e-9, max_iter=200):
    """Linear SVM with the mean-difference constraint ``|m'w| <= d``."""
    X, y = _check_xy(X, y)
    z = check_signs(z, X.shape[0], name="z")
    check_both_groups(z)
    lam = check_positive(lam, "lam")
    d = check_nonnegative(d, "d")
    res, w, b, _ = _zsvm_solution(X, y, z, lam, d, tol, max_iter)
    obj = hinge_objective(X, y, w, b, lam)
    return LinearModel(w, b, lam, "zsvm", d=d, iterations=0, objective=obj,
                       objective_history=(obj,), solver_status=res.status)


def train_ssvm(X, y, z, lam, d, ccp=None):
    """Linear SVM with mean and penalized covariance constraints (spectral CCP).

    The covariance gap of the two protected groups is split by its spectrum
    into ``U+ - U-``. Starting from the ZSVM solution, each outer iteration
    linearizes the concave terms at the current ``w`` and solves the convex
    subproblem. The penalized objective

        hinge(w, b) + lam ||w||^2 + mu |w'(U+ - U-)w|

    never increases from one iterate to the next.

    Returns
    -------
    LinearModel
        Last iterate; ``objective_history`` holds the penalized objective at
        the initialization and after every outer iteration.
    """
    ccp = ccp or CcpConfig()
    X, y = _check_xy(X, y)
    z = check_signs(z, X.shape[0], name="z")
    check_both_groups(z, min_size=2)
    lam = check_positive(lam, "lam")
    d = check_nonnegative(d, "d")
    mu = ccp.mu
    tol, max_iter = ccp.inner_tol, ccp.inner_max_iter

    m = mean_difference(X, z)
    split = covariance_gap(X, z).split
    n, p = X.shape

    def penalized(w, b):
        return hinge_objective(X, y, w, b, lam) + mu * covariance_penalty(split, w)

    try:
        res, w, b, d_eff = _zsvm_solution(X, y, z, lam, d, tol, max_iter)
    except TrainingError as exc:
        raise TrainingError(f"initialization failed: {exc}", 0, exc.result) from exc
    history = [penalized(w, b)]
    status = res.status
    iterations = 0
    for k in range(1, ccp.max_outer_iterations + 1):
        if mu == 0.0:
            # t is free and unpriced, so the covariance rows can always be met
            # by raising t; they drop out and the subproblem is the ZSVM QP
            problem = _primal_problem(X, y, lam, m, d_eff)
            x0 = np.concatenate([w, [b], np.maximum(0.0, 1.0 - y * (X @ w + b))])
        else:
            terms = linearized_pair(split.u_plus, split.u_minus, w)
            problem = _primal_problem(X, y, lam, m, d_eff, cov_terms=terms, mu=mu)
            t0 = covariance_penalty(split, w)
            x0 = np.concatenate([w, [b], np.maximum(0.0, 1.0 - y * (X @ w + b)), [t0]])
        res, w_new, b_new = _solve_primal(problem, X, y, tol, max_iter, x0=x0, iteration=k)
        w, b = w_new, b_new
        status = res.status
        iterations = k
        history.append(penalized(w, b))
        if stalled(history[-2], history[-1], ccp.objective_change_tolerance):
            break
    return LinearModel(w, b, lam, "ssvm", d=d, mu=mu, iterations=iterations,
                       objective=history[-1], objective_history=tuple(history),
                       solver_status=status)


def decision_values(model, X):
    """Scores ``X w + b`` (thresholded externally)."""
    X = check_matrix(X)
    if X.shape[1] != model.n_features:
        raise InputError(f"X has {X.shape[1]} columns, model expects {model.n_features}")
    return X @ model.w + model.b
