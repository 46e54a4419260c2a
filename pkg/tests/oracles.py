"""Reference computations used to check the library.

Each one is deliberately naive and shares no code with the package.
"""

import itertools
import math

import numpy as np


# --------------------------------------------------------------- linalg


def eig2_analytic(a):
    """Eigenvalues of a symmetric 2x2 matrix, descending, via the quadratic formula."""
    (p, q), (_, r) = a
    mid = (p + r) / 2.0
    rad = math.hypot((p - r) / 2.0, q)
    return np.array([mid + rad, mid - rad])


def eig3_analytic(a):
    """Eigenvalues of a symmetric 3x3 matrix, descending, by the trigonometric cubic solution."""
    a = np.asarray(a, dtype=float)
    p1 = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
    q = np.trace(a) / 3.0
    if p1 == 0.0:
        return np.sort(np.diag(a))[::-1]
    p2 = (a[0, 0] - q) ** 2 + (a[1, 1] - q) ** 2 + (a[2, 2] - q) ** 2 + 2.0 * p1
    p = math.sqrt(p2 / 6.0)
    bmat = (a - q * np.eye(3)) / p
    r = np.linalg.det(bmat) / 2.0
    phi = math.acos(min(1.0, max(-1.0, r))) / 3.0
    e1 = q + 2.0 * p * math.cos(phi)
    e3 = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    return np.array([e1, 3.0 * q - e1 - e3, e3])


def covariance_two_pass(rows):
    rows = [list(map(float, r)) for r in rows]
    m, p = len(rows), len(rows[0])
    mean = [sum(r[j] for r in rows) / m for j in range(p)]
    out = np.zeros((p, p))
    for i in range(p):
        for j in range(p):
            out[i, j] = sum((r[i] - mean[i]) * (r[j] - mean[j]) for r in rows) / m
    return out


def mean_difference_loops(X, z):
    pos = [x for x, g in zip(X, z) if g > 0]
    neg = [x for x, g in zip(X, z) if g < 0]
    p = len(X[0])
    return np.array([sum(r[j] for r in pos) / len(pos) - sum(r[j] for r in neg) / len(neg) for j in range(p)])


# ------------------------------------------------------------------- qp


def box_qp_projected_gradient(P, q, lower, upper, tol=1e-13, max_iter=500_000):
    """Accelerated projected gradient (FISTA with restarts) for a box QP."""
    P = np.asarray(P, dtype=float)
    q = np.asarray(q, dtype=float)
    L = float(np.linalg.eigvalsh(P).max())
    x = np.clip(np.zeros_like(q), lower, upper)
    y, t = x.copy(), 1.0
    for _ in range(max_iter):
        x_new = np.clip(y - (P @ y + q) / L, lower, upper)
        if np.max(np.abs(x_new - x)) <= tol:
            return x_new
        t_new = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        y = x_new + ((t - 1.0) / t_new) * (x_new - x)
        # restart the momentum when it points uphill
        if (P @ x_new + q) @ (x_new - x) > 0:
            y, t_new = x_new.copy(), 1.0
        x, t = x_new, t_new
    return x


def svm_1d_grid(xs, ys, lam, lo=-3.0, hi=3.0, steps=601):
    """Brute-force minimizer of sum hinge + lam w^2 over a (w, b) grid, refined twice."""
    w_lo, w_hi, b_lo, b_hi = lo, hi, lo, hi
    best = None
    for _ in range(4):
        W, B = np.meshgrid(np.linspace(w_lo, w_hi, steps), np.linspace(b_lo, b_hi, steps), indexing="ij")
        obj = lam * W ** 2
        for x, y in zip(xs, ys):
            obj = obj + np.maximum(0.0, 1.0 - y * (W * x + B))
        i, j = np.unravel_index(np.argmin(obj), obj.shape)
        best = (W[i, j], B[i, j], obj[i, j])
        dw = (w_hi - w_lo) / (steps - 1) * 5
        db = (b_hi - b_lo) / (steps - 1) * 5
        w_lo, w_hi = best[0] - dw, best[0] + dw
        b_lo, b_hi = best[1] - db, best[1] + db
    return best


# -------------------------------------------------------------- metrics


def roc_enumeration(scores, labels):
    """(fpr, tpr) at every threshold in the sorted distinct scores, plus +inf."""
    s = list(map(float, scores))
    lab = list(labels)
    n_pos = sum(1 for v in lab if v > 0)
    n_neg = len(lab) - n_pos
    pts = [(0.0, 0.0)]
    for t in sorted(set(s), reverse=True):
        tp = sum(1 for v, l in zip(s, lab) if v - t >= 0 and l > 0)
        fp = sum(1 for v, l in zip(s, lab) if v - t >= 0 and l < 0)
        pts.append((fp / n_neg, tp / n_pos))
    return pts


def auc_pairwise(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l > 0]
    neg = [s for s, l in zip(scores, labels) if l < 0]
    total = 0.0
    for a, b in itertools.product(pos, neg):
        total += 1.0 if a > b else 0.5 if a == b else 0.0
    return total / (len(pos) * len(neg))


def dp_interval_enumeration(scores, z):
    """Max positive-rate gap over thresholds at -inf, +inf and every midpoint."""
    s = sorted(set(map(float, scores)))
    thresholds = [-math.inf, math.inf] + [(a + b) / 2.0 for a, b in zip(s, s[1:])] + s
    pos = [v for v, g in zip(scores, z) if g > 0]
    neg = [v for v, g in zip(scores, z) if g < 0]
    best = 0.0
    for t in thresholds:
        rp = sum(1 for v in pos if v - t >= 0) / len(pos)
        rn = sum(1 for v in neg if v - t >= 0) / len(neg)
        best = max(best, abs(rp - rn))
    return best


# --------------------------------------------------------------- kernel


def gram_loops(fn, A, B):
    return np.array([[fn(a, b) for b in B] for a in A])


def bias_summation(alpha, K, y, lam, tol):
    terms = []
    for i in range(len(y)):
        if tol < alpha[i] < lam - tol:
            f_i = sum(K[j, i] * y[j] * alpha[j] for j in range(len(y)))
            terms.append(y[i] - f_i)
    return sum(terms) / len(terms)
