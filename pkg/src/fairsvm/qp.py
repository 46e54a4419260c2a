"""Primal-dual interior-point solver for convex QPs with quadratic constraints.

Problem form::

    minimize    1/2 x'Px + q'x
    subject to  A x = b
                G x <= h
                x'Q_k x + c_k'x <= r_k      (Q_k PSD)
                lower <= x <= upper

Inequalities get slack variables ``s > 0`` so the method can start from any
point. Each iteration takes a Mehrotra predictor-corrector step, falling back
to a plain centered Newton step when the corrector does not reduce the merit
function ``||(r_dual, r_ineq, r_eq, s*lam)||_2``. The centered Newton step is a
descent direction for that norm, so the merit decreases at every accepted
iteration.

Dense and sparse (``scipy.sparse``) inputs are both accepted. If any of
``P``, ``G`` or ``A`` is sparse, the Newton systems are assembled and
factored sparsely. This keeps primal SVMs with thousands of slack variables
cheap.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy import linalg as sla
from scipy.sparse import linalg as spla

from .exceptions import InputError
from .linalg import spectral_split

__all__ = [
    "QuadraticConstraint",
    "ConvexQuadraticProgram",
    "SolverResult",
    "solve",
    "CONVERGED",
    "MAX_ITERATIONS",
    "INFEASIBLE",
]

CONVERGED = "converged"
MAX_ITERATIONS = "max-iterations"
INFEASIBLE = "infeasible-detected"

_REG = 1e-10
_PSD_TOL = 1e-8


@dataclass
class QuadraticConstraint:
    """``x'Qx + c'x <= r`` with ``Q`` positive semidefinite."""

    Q: object
    c: np.ndarray
    r: float


@dataclass
class ConvexQuadraticProgram:
    P: object
    q: np.ndarray
    A: object = None
    b: np.ndarray = None
    G: object = None
    h: np.ndarray = None
    quadratic: list = field(default_factory=list)
    lower: np.ndarray = None
    upper: np.ndarray = None

    @property
    def n(self):
        return int(np.asarray(self.q).shape[0])

    @property
    def is_sparse(self):
        return any(sp.issparse(M) for M in (self.P, self.G, self.A))

    def objective(self, x):
        P = self.P
        Px = P @ x if P is not None else np.zeros_like(x)
        return float(0.5 * x @ Px + np.asarray(self.q) @ x)

    def validate(self, check_convexity=True):
        """Check dimensions and (optionally) PSD-ness of the quadratic terms."""
        n = self.n
        if n < 1:
            raise InputError("problem has no variables")
        q = np.asarray(self.q, dtype=float)
        if q.ndim != 1 or not np.all(np.isfinite(q)):
            raise InputError("q must be a finite vector")
        if self.P is not None and self.P.shape != (n, n):
            raise InputError(f"P has shape {self.P.shape}, expected {(n, n)}")
        for name, M, v in (("A", self.A, self.b), ("G", self.G, self.h)):
            if M is None:
                if v is not None and np.size(v):
                    raise InputError(f"{name} missing but right-hand side given")
                continue
            if M.ndim != 2 or M.shape[1] != n:
                raise InputError(f"{name} has shape {M.shape}, expected (*, {n})")
            if v is None or np.asarray(v).shape != (M.shape[0],):
                raise InputError(f"right-hand side of {name} must have length {M.shape[0]}")
        for k, qc in enumerate(self.quadratic):
            if qc.Q.shape != (n, n) or np.asarray(qc.c).shape != (n,):
                raise InputError(f"quadratic constraint {k} has inconsistent dimensions")
            if not np.isfinite(qc.r):
                raise InputError(f"quadratic constraint {k} has a non-finite bound")
        for name, v in (("lower", self.lower), ("upper", self.upper)):
            if v is not None and np.asarray(v).shape != (n,):
                raise InputError(f"{name} must have length {n}")
        if self.lower is not None and self.upper is not None:
            if np.any(np.asarray(self.lower) > np.asarray(self.upper)):
                raise InputError("lower bound exceeds upper bound")
        if check_convexity:
            if self.P is not None and not _is_psd(self.P):
                raise InputError("objective quadratic term is not positive semidefinite")
            for k, qc in enumerate(self.quadratic):
                if not _is_psd(qc.Q):
                    raise InputError(f"quadratic constraint {k} is not positive semidefinite")


@dataclass(frozen=True)
class SolverResult:
    x: np.ndarray
    objective: float
    feasibility: float
    kkt_residual: float
    iterations: int
    status: str
    ineq_duals: np.ndarray = None
    quad_duals: np.ndarray = None
    eq_duals: np.ndarray = None
    merit_history: tuple = ()

    @property
    def converged(self):
        return self.status == CONVERGED


def _is_psd(M):
    # check on the support (rows/columns with any nonzero) to keep big sparse
    # matrices cheap; spectral_split's negative part must vanish
    if sp.issparse(M):
        M = M.tocsr()
        support = np.unique(np.concatenate([M.nonzero()[0], M.nonzero()[1]]))
        if support.size == 0:
            return True
        sub = M[support][:, support].toarray()
    else:
        M = np.asarray(M, dtype=float)
        support = np.flatnonzero(np.any(M != 0, axis=0) | np.any(M != 0, axis=1))
        if support.size == 0:
            return True
        sub = M[np.ix_(support, support)]
    if not np.allclose(sub, sub.T, atol=1e-12 * max(1.0, np.abs(sub).max())):
        return False
    if np.allclose(sub, np.diag(np.diag(sub))):
        return bool(np.all(np.diag(sub) >= -_PSD_TOL * max(1.0, np.abs(sub).max())))
    neg = spectral_split(sub).u_minus
    return bool(np.abs(neg).max(initial=0.0) <= _PSD_TOL * max(1.0, np.abs(sub).max()))


class _Workspace:
    """Problem data normalized to one representation (dense or sparse)."""

    def __init__(self, problem):
        n = problem.n
        self.n = n
        self.sparse = problem.is_sparse
        self.q = np.asarray(problem.q, dtype=float)
        conv = self._to_sparse if self.sparse else self._to_dense

        self.P = conv(problem.P) if problem.P is not None else conv(np.zeros((n, n)))
        blocks, rhs = [], []
        if problem.G is not None and problem.G.shape[0]:
            blocks.append(conv(problem.G))
            rhs.append(np.asarray(problem.h, dtype=float))
        self.n_user_ineq = sum(b.shape[0] for b in blocks)
        eye = sp.identity(n, format="csr") if self.sparse else np.eye(n)
        self.box_rows = []
        if problem.lower is not None:
            lo = np.asarray(problem.lower, dtype=float)
            idx = np.flatnonzero(np.isfinite(lo))
            if idx.size:
                blocks.append(-eye[idx])
                rhs.append(-lo[idx])
                self.box_rows.append(("lower", idx))
        if problem.upper is not None:
            up = np.asarray(problem.upper, dtype=float)
            idx = np.flatnonzero(np.isfinite(up))
            if idx.size:
                blocks.append(eye[idx])
                rhs.append(up[idx])
                self.box_rows.append(("upper", idx))
        if blocks:
            self.G = sp.vstack(blocks, format="csr") if self.sparse else np.vstack(blocks)
            self.h = np.concatenate(rhs)
        else:
            self.G = sp.csr_matrix((0, n)) if self.sparse else np.zeros((0, n))
            self.h = np.zeros(0)
        if problem.A is not None and problem.A.shape[0]:
            self.A = conv(problem.A)
            self.b = np.asarray(problem.b, dtype=float)
        else:
            self.A = sp.csr_matrix((0, n)) if self.sparse else np.zeros((0, n))
            self.b = np.zeros(0)
        self.Q = [conv(qc.Q) for qc in problem.quadratic]
        self.c = [np.asarray(qc.c, dtype=float) for qc in problem.quadratic]
        self.r = np.array([float(qc.r) for qc in problem.quadratic])
        self.m_lin = self.G.shape[0]
        self.m_quad = len(self.Q)
        self.m = self.m_lin + self.m_quad
        self.me = self.A.shape[0]
        self.scale_q = np.abs(self.q).max(initial=0.0)

    @staticmethod
    def _to_sparse(M):
        return sp.csr_matrix(M) if not sp.issparse(M) else M.tocsr().astype(float)

    @staticmethod
    def _to_dense(M):
        return np.asarray(M, dtype=float)

    def constraint_values(self, x):
        f = np.empty(self.m)
        f[: self.m_lin] = self.G @ x - self.h
        for k in range(self.m_quad):
            f[self.m_lin + k] = x @ (self.Q[k] @ x) + self.c[k] @ x - self.r[k]
        return f

    def quad_gradients(self, x):
        return [2.0 * (self.Q[k] @ x) + self.c[k] for k in range(self.m_quad)]

    def jt_dot(self, v, grads):
        out = self.G.T @ v[: self.m_lin]
        for k, g in enumerate(grads):
            out = out + v[self.m_lin + k] * g
        return np.asarray(out).ravel()

    def j_dot(self, dx, grads):
        out = np.empty(self.m)
        out[: self.m_lin] = self.G @ dx
        for k, g in enumerate(grads):
            out[self.m_lin + k] = g @ dx
        return out

    def residuals(self, x, s, lam, nu):
        grads = self.quad_gradients(x)
        Px = np.asarray(self.P @ x).ravel()
        Jt_lam = self.jt_dot(lam, grads)
        At_nu = np.asarray(self.A.T @ nu).ravel()
        r_d = Px + self.q + Jt_lam + At_nu
        fx = self.constraint_values(x)
        r_p = fx + s
        r_e = np.asarray(self.A @ x).ravel() - self.b
        scale_d = max(
            np.abs(Px).max(initial=0.0),
            self.scale_q,
            np.abs(Jt_lam).max(initial=0.0),
            np.abs(At_nu).max(initial=0.0),
        )
        return r_d, r_p, r_e, fx, grads, Px, scale_d

    def factor(self, lam, D, grads, reg):
        n, me = self.n, self.me
        if self.sparse:
            H = self.P.copy()
            for k in range(self.m_quad):
                H = H + (2.0 * lam[self.m_lin + k]) * self.Q[k]
            if self.m_lin:
                H = H + self.G.T @ sp.diags(D[: self.m_lin]) @ self.G
            for k, g in enumerate(grads):
                gs = sp.csr_matrix(g.reshape(1, -1))
                H = H + D[self.m_lin + k] * (gs.T @ gs)
            H = H + reg * sp.identity(n)
            K = sp.bmat([[H, self.A.T], [self.A, -reg * sp.identity(me)]], format="csc") if me else H.tocsc()
            lu = spla.splu(K)
            return lambda rhs: lu.solve(rhs)
        H = self.P.copy()
        for k in range(self.m_quad):
            H += (2.0 * lam[self.m_lin + k]) * self.Q[k]
        if self.m_lin:
            H += (self.G.T * D[: self.m_lin]) @ self.G
        for k, g in enumerate(grads):
            H += D[self.m_lin + k] * np.outer(g, g)
        H[np.diag_indices(n)] += reg
        if me:
            K = np.block([[H, self.A.T], [self.A, -reg * np.eye(me)]])
        else:
            K = H
        lu = sla.lu_factor(K, check_finite=False)
        return lambda rhs: sla.lu_solve(lu, rhs, check_finite=False)


def _max_step(v, dv, tau):
    neg = dv < 0
    if not np.any(neg):
        return 1.0
    return float(min(1.0, tau * np.min(-v[neg] / dv[neg])))


def solve(problem, feas_tol=1e-7, kkt_tol=1e-7, max_iter=100, x0=None, check_convexity=True):
    """Solve a :class:`ConvexQuadraticProgram`.

    Parameters
    ----------
    problem : ConvexQuadraticProgram
    feas_tol : float
        Bound on the largest constraint violation at convergence.
    kkt_tol : float
        Bound on the KKT residual at convergence. The residual is the larger
        of the stationarity residual (infinity norm, divided by ``1 +`` the
        largest term in the gradient of the Lagrangian) and the complementarity
        residual ``max_i |lam_i f_i(x)|`` divided by ``1 + |objective|``.
    max_iter : int
    x0 : array_like, optional
        Initial primal point. It need not be feasible.

    Returns
    -------
    SolverResult
        ``status`` is ``"converged"``, ``"max-iterations"``, or
        ``"infeasible-detected"`` when a phase-1 problem shows that the
        constraints cannot be satisfied within ``feas_tol``.
    """
    if feas_tol <= 0 or kkt_tol <= 0 or max_iter < 1:
        raise InputError("tolerances must be positive and max_iter at least 1")
    problem.validate(check_convexity=check_convexity)
    result = _interior_point(problem, feas_tol, kkt_tol, max_iter, x0)
    if result.status != CONVERGED and result.feasibility > feas_tol:
        if _phase_one_infeasible(problem, feas_tol, max_iter, result.x):
            return SolverResult(
                result.x, result.objective, result.feasibility, result.kkt_residual,
                result.iterations, INFEASIBLE, result.ineq_duals, result.quad_duals,
                result.eq_duals, result.merit_history,
            )
    return result


def _interior_point(problem, feas_tol, kkt_tol, max_iter, x0):
    ws = _Workspace(problem)
    n, m, me = ws.n, ws.m, ws.me
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if x.shape != (n,):
        raise InputError(f"x0 must have length {n}")
    fx0 = ws.constraint_values(x)
    s = np.maximum(-fx0, 1.0)
    lam = np.ones(m)
    nu = np.zeros(me)
    merits = []

    def merit(r_d, r_p, r_e, s, lam):
        return float(np.sqrt(r_d @ r_d + r_p @ r_p + r_e @ r_e + np.sum((s * lam) ** 2)))

    status = MAX_ITERATIONS
    it = 0
    reg = _REG
    while True:
        r_d, r_p, r_e, fx, grads, Px, scale_d = ws.residuals(x, s, lam, nu)
        obj = float(0.5 * x @ Px + ws.q @ x)
        feas = max(np.abs(r_e).max(initial=0.0), np.maximum(fx, 0.0).max(initial=0.0))
        stat = np.abs(r_d).max(initial=0.0) / (1.0 + scale_d)
        comp = np.abs(lam * fx).max(initial=0.0) / (1.0 + abs(obj))
        kkt = max(stat, comp)
        phi = merit(r_d, r_p, r_e, s, lam)
        merits.append(phi)
        if feas <= feas_tol and kkt <= kkt_tol:
            status = CONVERGED
            break
        if it >= max_iter:
            break
        it += 1

        mu = float(s @ lam) / m if m else 0.0
        D = lam / s if m else np.zeros(0)
        try:
            solver = ws.factor(lam, D, grads, reg)
        except (RuntimeError, np.linalg.LinAlgError, ValueError):
            reg *= 100.0
            if reg > 1e-4:
                break
            continue

        def direction(r_c):
            rhs_x = -r_d - ws.jt_dot(D * r_p - r_c / s, grads) if m else -r_d
            rhs = np.concatenate([rhs_x, -r_e]) if me else rhs_x
            sol = solver(rhs)
            dx = sol[:n]
            dnu = sol[n:] if me else np.zeros(0)
            if m:
                Jdx = ws.j_dot(dx, grads)
                ds = -r_p - Jdx
                dlam = -r_c / s + D * r_p + D * Jdx
            else:
                ds = dlam = np.zeros(0)
            return dx, ds, dlam, dnu

        candidates = []
        if m:
            dx_a, ds_a, dl_a, _ = direction(s * lam)
            a_aff = min(_max_step(s, ds_a, 1.0), _max_step(lam, dl_a, 1.0))
            mu_aff = float((s + a_aff * ds_a) @ (lam + a_aff * dl_a)) / m
            sigma = min(1.0, (mu_aff / mu) ** 3) if mu > 0 else 0.0
            candidates.append((sigma, s * lam - sigma * mu + ds_a * dl_a))
            sigma_fb = max(sigma, 0.1)
            candidates.append((sigma_fb, s * lam - sigma_fb * mu))
        else:
            candidates.append((0.0, np.zeros(0)))

        tau = min(max(0.99, 1.0 - mu), 0.9999) if m else 1.0
        accepted = False
        for sigma, r_c in candidates:
            dx, ds, dlam, dnu = direction(r_c)
            alpha = min(_max_step(s, ds, tau), _max_step(lam, dlam, tau)) if m else 1.0
            while alpha > 1e-10:
                xn, sn, ln, nn = x + alpha * dx, s + alpha * ds, lam + alpha * dlam, nu + alpha * dnu
                rn = ws.residuals(xn, sn, ln, nn)
                phi_n = merit(rn[0], rn[1], rn[2], sn, ln)
                if phi_n <= (1.0 - 1e-4 * alpha * (1.0 - sigma)) * phi:
                    x, s, lam, nu = xn, sn, ln, nn
                    accepted = True
                    break
                alpha *= 0.5
            if accepted:
                break
        if not accepted:
            break

    r_d, r_p, r_e, fx, grads, Px, scale_d = ws.residuals(x, s, lam, nu)
    obj = float(0.5 * x @ Px + ws.q @ x)
    feas = max(np.abs(r_e).max(initial=0.0), np.maximum(fx, 0.0).max(initial=0.0))
    stat = np.abs(r_d).max(initial=0.0) / (1.0 + scale_d)
    comp = np.abs(lam * fx).max(initial=0.0) / (1.0 + abs(obj))
    return SolverResult(
        x=x,
        objective=obj,
        feasibility=float(feas),
        kkt_residual=float(max(stat, comp)),
        iterations=it,
        status=status,
        ineq_duals=lam[: ws.m_lin].copy(),
        quad_duals=lam[ws.m_lin:].copy(),
        eq_duals=nu.copy(),
        merit_history=tuple(merits),
    )


def _phase_one_infeasible(problem, feas_tol, max_iter, x_start=None):
    """Minimize the largest inequality violation; True if it stays positive.

    ``x_start`` (the main solve's last iterate) warm-starts the search so a
    nearly feasible point is never lost to a stalled phase one.
    """
    ws = _Workspace(problem)
    n = ws.n
    if ws.me and ws.m == 0:
        # equality-only system: least-squares residual decides
        A = ws.A.toarray() if ws.sparse else ws.A
        xls = np.linalg.lstsq(A, ws.b, rcond=None)[0]
        return bool(np.abs(A @ xls - ws.b).max() > feas_tol)
    stack = sp.hstack if ws.sparse else np.hstack
    col = (lambda k: sp.csr_matrix(-np.ones((k, 1)))) if ws.sparse else (lambda k: -np.ones((k, 1)))
    G = stack([ws.G, col(ws.m_lin)]) if ws.m_lin else None
    if ws.sparse and G is not None:
        G = G.tocsr()
    quad = []
    for k in range(ws.m_quad):
        Qk = ws.Q[k]
        Qext = sp.block_diag([Qk, sp.csr_matrix((1, 1))], format="csr") if ws.sparse else np.pad(Qk, ((0, 1), (0, 1)))
        quad.append(QuadraticConstraint(Qext, np.append(ws.c[k], -1.0), ws.r[k]))
    A = None
    b = None
    if ws.me:
        A = stack([ws.A, (sp.csr_matrix((ws.me, 1)) if ws.sparse else np.zeros((ws.me, 1)))])
        b = ws.b
    P = sp.csr_matrix((n + 1, n + 1)) if ws.sparse else np.zeros((n + 1, n + 1))
    lower = np.full(n + 1, -np.inf)
    lower[-1] = -1.0
    aux = ConvexQuadraticProgram(
        P=P, q=np.append(np.zeros(n), 1.0), A=A, b=b, G=G,
        h=ws.h if ws.m_lin else None, quadratic=quad, lower=lower,
    )
    x0 = None
    if x_start is not None:
        x0 = np.append(x_start, max(0.0, float(ws.constraint_values(x_start).max(initial=0.0))))
    res = _interior_point(aux, feas_tol * 1e-2, 1e-9, max(max_iter, 100), x0)
    # the start point also bounds the least achievable violation
    best = res.x[-1] if x0 is None else min(res.x[-1], x0[-1])
    if res.status == CONVERGED:
        return bool(best > feas_tol)
    # an unfinished phase one is only evidence when it clearly stays positive
    return bool(res.feasibility <= feas_tol and best > 1e3 * feas_tol)
