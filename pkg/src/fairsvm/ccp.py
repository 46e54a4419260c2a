"""Shared pieces of the penalized convex-concave procedure."""

from dataclasses import dataclass

from .exceptions import InputError


@dataclass(frozen=True)
class CcpConfig:
    """Outer-loop settings for the spectral convex-concave procedure.

    The loop stops once the penalized objective changes by less than
    ``objective_change_tolerance`` relative to its previous value, or after
    ``max_outer_iterations`` subproblem solves.
    """

    max_outer_iterations: int = 50
    objective_change_tolerance: float = 1e-6
    mu: float = 0.0
    inner_tol: float = 1e-10
    inner_max_iter: int = 200

    def __post_init__(self):
        if self.max_outer_iterations < 1:
            raise InputError("max_outer_iterations must be at least 1")
        if not self.objective_change_tolerance > 0:
            raise InputError("objective_change_tolerance must be positive")
        if not self.mu >= 0:
            raise InputError("mu must be nonnegative")
        if not self.inner_tol > 0:
            raise InputError("inner_tol must be positive")


def linearized_pair(u_plus, u_minus, v_k):
    """Coefficients of the two majorized covariance constraints around ``v_k``.

    Each constraint has the form ``v'Q v + c'v - t <= r``; the tuples returned
    are ``(Q, c, r)`` for

        v'U+ v - [v_k'U- v_k + 2 v_k'U- (v - v_k)] <= t
        v'U- v - [v_k'U+ v_k + 2 v_k'U+ (v - v_k)] <= t
    """
    gm = u_minus @ v_k
    gp = u_plus @ v_k
    first = (u_plus, -2.0 * gm, -float(v_k @ gm))
    second = (u_minus, -2.0 * gp, -float(v_k @ gp))
    return first, second


def covariance_penalty(split, v):
    """``max`` of the two exact constraint left-hand sides, i.e. ``|v'(U+ - U-)v|``."""
    plus, minus = split.quadratic_forms(v)
    return abs(plus - minus)


def stalled(previous, current, tol):
    return abs(previous - current) <= tol * max(1.0, abs(previous))
