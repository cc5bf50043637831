"""Stationary distribution and mixing behaviour of the agents' random walk."""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_stochastic
from .exceptions import Degenerate, NotConverged, SingularSystem

__all__ = [
    "StationaryDistribution",
    "MixingProfile",
    "stationary_distribution",
    "power_iteration",
    "slem",
    "mixing_curve",
    "loglinear_fit",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10**6


@dataclass(frozen=True)
class StationaryDistribution:
    pi: np.ndarray
    residual: float
    method: str = "direct"

    @property
    def m(self):
        return self.pi.shape[0]

    @property
    def collision_probability(self):
        """``sum_k pi_k**2``: chance two independent stationary walkers share a node."""
        return float(self.pi @ self.pi)


@dataclass(frozen=True)
class MixingProfile:
    """Worst-case deviation of ``Q**t`` from its limit, for ``t = 1..t_max``.

    ``fitted_lambda`` and ``fitted_slope`` come from a least-squares fit of
    ``log(tv_curve)`` on ``t`` over the second half of the curve. They are
    empirical, not analytic, constants.
    """

    rho: float
    tv_curve: np.ndarray
    fitted_slope: float = field(default=float("nan"))
    fitted_lambda: float = field(default=float("nan"))

    @property
    def t(self):
        return np.arange(1, self.tv_curve.shape[0] + 1)


def _residual(Q, pi):
    return float(np.max(np.abs(pi @ Q - pi)))


def power_iteration(Q, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, start=None):
    """Iterate ``pi <- pi Q`` until successive iterates differ by less than ``tol``."""
    Q = check_stochastic(Q, atol=1e-9)
    m = Q.shape[0]
    pi = np.full(m, 1.0 / m) if start is None else np.asarray(start, dtype=float)
    for _ in range(int(max_iter)):
        nxt = pi @ Q
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - pi)) < tol:
            return StationaryDistribution(nxt, _residual(Q, nxt), "power")
        pi = nxt
    raise NotConverged(f"power iteration did not reach tol={tol} in {max_iter} iterations")


def _direct_solve(Q, tol):
    m = Q.shape[0]
    M = Q.T - np.eye(m)
    M[-1, :] = 1.0
    rhs = np.zeros(m)
    rhs[-1] = 1.0
    if np.linalg.cond(M) > 1e12:
        raise SingularSystem("stationary system is singular; chain is not ergodic")
    try:
        pi = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    if np.any(pi < -tol):
        raise SingularSystem("stationary solve produced negative mass; chain is not ergodic")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    return StationaryDistribution(pi, _residual(Q, pi), "direct")


def stationary_distribution(Q, tol=DEFAULT_TOL, method="auto", max_iter=DEFAULT_MAX_ITER):
    """Stationary distribution ``pi`` with ``pi Q = pi``.

    Parameters
    ----------
    Q : array_like, shape (m, m)
        Row-stochastic, irreducible and aperiodic transition matrix.
    tol : float
        Required bound on ``max |pi Q - pi|``.
    method : {"auto", "direct", "power"}
        ``"direct"`` solves ``(Q^T - I) pi = 0`` with one equation replaced
        by ``sum(pi) = 1``. ``"power"`` runs :func:`power_iteration`.
        ``"auto"`` tries the direct solve and falls back to power iteration
        when the system is degenerate or the residual misses ``tol``.

    Raises
    ------
    SingularSystem
        ``method="direct"`` on a non-ergodic chain.
    NotConverged
        Power iteration hit ``max_iter``.
    """
    Q = check_stochastic(Q, atol=1e-9)
    if method == "power":
        return power_iteration(Q, tol, max_iter)
    if method not in ("auto", "direct"):
        raise ValueError(f"unknown method {method!r}")
    try:
        sd = _direct_solve(Q, tol)
    except SingularSystem:
        if method == "direct":
            raise
        return power_iteration(Q, tol, max_iter)
    if sd.residual > tol:
        if method == "direct":
            raise SingularSystem(f"direct solve residual {sd.residual:.3g} exceeds tol {tol:.3g}")
        return power_iteration(Q, tol, max_iter, start=sd.pi)
    return sd


def slem(Q):
    """Second-largest eigenvalue modulus of ``Q`` (0 for a 1x1 chain)."""
    Q = check_stochastic(Q, atol=1e-9)
    moduli = np.sort(np.abs(np.linalg.eigvals(Q)))[::-1]
    if abs(moduli[0] - 1.0) > 1e-9:
        raise Degenerate(f"leading eigenvalue modulus {moduli[0]!r} is not 1")
    if moduli.shape[0] == 1:
        return 0.0
    rho = float(moduli[1])
    if rho >= 1.0 - 1e-9:
        raise Degenerate("eigenvalue of modulus 1 besides the Perron root; chain is not ergodic")
    return rho


def loglinear_fit(t, values):
    """Least-squares ``log(values) ~ b + a*t``; returns ``(a, b)``."""
    t = np.asarray(t, dtype=float)
    y = np.log(np.asarray(values, dtype=float))
    if t.shape[0] < 2:
        return float("nan"), float("nan")
    a, b = np.polyfit(t, y, 1)
    return float(a), float(b)


def mixing_curve(Q, pi, t_max, floor=1e-13):
    """Track ``max_{j,i} |(Q**t)_{ji} - pi_i|`` for ``t = 1..t_max``.

    Deviations below ``floor`` are rounding noise and are left out of the
    log-linear fit (they stay in ``tv_curve``).
    """
    Q = check_stochastic(Q, atol=1e-9)
    t_max = int(t_max)
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    p = pi.pi if isinstance(pi, StationaryDistribution) else np.asarray(pi, dtype=float)
    curve = np.empty(t_max)
    Qt = np.eye(Q.shape[0])
    for k in range(t_max):
        Qt = Qt @ Q
        curve[k] = np.max(np.abs(Qt - p[None, :]))
    rho = slem(Q)
    t = np.arange(1, t_max + 1)
    half = slice(t_max // 2, t_max)
    keep = curve[half] > floor
    slope, intercept = loglinear_fit(t[half][keep], curve[half][keep])
    return MixingProfile(rho, curve, slope, float(np.exp(intercept)))
