"""Continuous-time interpolation of a discrete run and quadrature of its payoff.

On the open interval ``(k-1, k)`` the payoff is ``u_k`` and the parameter
is ``eta_{k-1}``, so the score is ``y_t = eta_{k-1} (U_{k-1} + s u_k)`` with
``s = t - k + 1``.  Integrals over each interval use composite Simpson.
Euclidean choice maps are only piecewise smooth; their intervals are split
at the points where the active face of the projection changes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple, Optional

import numpy as np

from .errors import InvalidInputError
from .geometry import Regularizer, bregman_conjugate, choice_map
from .schedules import ParameterSchedule, values

DEFAULT_NODES = 64
EUCLIDEAN_NODES = 256
BOUND_SLACK = 1e-6


def identity_tolerance(reg: Regularizer) -> float:
    return 1e-5 if reg.kind == "euclidean" else 1e-6


@dataclass
class InterpolatedRun:
    """Staircase interpolation of payoffs ``u_1..u_n`` under ``schedule``.

    ``nodes_per_interval`` is the number of Simpson subintervals per unit
    interval (even, at least 2).  Left as ``None`` it becomes 64, or 256
    for Euclidean regularizers.
    """

    payoffs: np.ndarray
    schedule: ParameterSchedule
    reg: Regularizer
    nodes_per_interval: Optional[int] = None

    def __post_init__(self):
        P = np.asarray(self.payoffs, dtype=float)
        if P.ndim == 1:
            P = P.reshape(-1, self.reg.dim) if P.size else np.zeros((0, self.reg.dim))
        if P.ndim != 2 or P.shape[1] != self.reg.dim:
            raise InvalidInputError("payoffs must have shape (n, dim)")
        if not np.all(np.isfinite(P)):
            raise InvalidInputError("payoffs contain non-finite entries")
        self.payoffs = P
        if self.nodes_per_interval is None:
            self.nodes_per_interval = EUCLIDEAN_NODES if self.reg.kind == "euclidean" else DEFAULT_NODES
        m = int(self.nodes_per_interval)
        if m < 2 or m % 2:
            raise InvalidInputError("nodes_per_interval must be an even integer >= 2")
        self.nodes_per_interval = m
        self._eta = values(self.schedule, self.n)
        U = np.zeros((self.n + 1, self.dim))
        np.cumsum(P, axis=0, out=U[1:])
        self._U = U

    @property
    def n(self) -> int:
        return len(self.payoffs)

    @property
    def dim(self) -> int:
        return self.reg.dim

    def eta_t(self, t: float) -> float:
        """Right-continuous staircase ``eta_{max(floor t, 1)}``."""
        return float(self.schedule.value_at(max(int(np.floor(t)), 1)))

    def u_t(self, t: float) -> np.ndarray:
        k = int(np.ceil(t))
        if not 1 <= k <= self.n:
            raise InvalidInputError("t outside (0, n]")
        return self.payoffs[k - 1].copy()

    def y_plus(self, k: int) -> np.ndarray:
        """``eta_k U_k``: the score that produces ``x_{k+1}``."""
        return self._eta[k] * self._U[k]

    def y_minus(self, k: int) -> np.ndarray:
        """``eta_{k-1} U_k``: the score at the right end of interval ``k``."""
        return self._eta[k - 1] * self._U[k]

    def score(self, k: int, s) -> np.ndarray:
        """``y`` at ``t = k - 1 + s`` for ``s`` in ``[0, 1]`` (vectorized over ``s``)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return self._eta[k - 1] * (self._U[k - 1][None, :] + s[:, None] * self.payoffs[k - 1][None, :])

    def discrete_action(self, k: int) -> np.ndarray:
        """``x_k = Q_h(eta_{k-1} U_{k-1})``."""
        return choice_map(self.reg, self._eta[k - 1] * self._U[k - 1])


def _signature(reg: Regularizer, Y: np.ndarray) -> np.ndarray:
    """Active-face label of ``Q_h`` at each row of ``Y`` (Euclidean only)."""
    body = reg.body
    Z = Y + reg.center
    X = choice_map(reg, Y)
    if body.kind == "simplex":
        return X > 0
    if body.kind == "box":
        return np.concatenate([Z <= body.lower, Z >= body.upper], axis=1)
    dist = np.sqrt(((Z - body.center) ** 2).sum(axis=1))
    return (dist > body.radius)[:, None]


def _kinks(run: InterpolatedRun, k: int, a: float, b: float, sa, sb, depth: int = 0) -> List[float]:
    if np.array_equal(sa, sb):
        return []
    if b - a < 1e-14 or depth > 60:
        return [0.5 * (a + b)]
    mid = 0.5 * (a + b)
    sm = _signature(run.reg, run.score(k, mid))[0]
    return (_kinks(run, k, a, mid, sa, sm, depth + 1)
            + _kinks(run, k, mid, b, sm, sb, depth + 1))


def _simpson(f: np.ndarray, h: float) -> float:
    return float(h / 3.0 * (f[0] + f[-1] + 4.0 * f[1:-1:2].sum() + 2.0 * f[2:-1:2].sum()))


def _piece(run: InterpolatedRun, k: int, a: float, b: float, m: int) -> float:
    s = np.linspace(a, b, m + 1)
    X = choice_map(run.reg, run.score(k, s))
    return _simpson(X @ run.payoffs[k - 1], (b - a) / m)


def interval_integral(run: InterpolatedRun, k: int) -> float:
    """``int_{k-1}^{k} <u_t, Q_h(y_t)> dt``."""
    if not 1 <= k <= run.n:
        raise IndexError(f"interval {k} outside 1..{run.n}")
    m = run.nodes_per_interval
    if not np.any(run.payoffs[k - 1]):
        return 0.0
    if run.reg.kind != "euclidean":
        return _piece(run, k, 0.0, 1.0, m)
    s = np.linspace(0.0, 1.0, m + 1)
    sig = _signature(run.reg, run.score(k, s))
    breaks = [0.0]
    for j in range(m):
        breaks += _kinks(run, k, s[j], s[j + 1], sig[j], sig[j + 1])
    breaks.append(1.0)
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b > a:
            mj = max(2, 2 * int(np.ceil(0.5 * m * (b - a))))
            total += _piece(run, k, a, b, mj)
    return total


def interval_integrals(run: InterpolatedRun) -> np.ndarray:
    if run.reg.kind == "euclidean":
        return np.array([interval_integral(run, k) for k in range(1, run.n + 1)])
    # one batched choice-map call for every node of every interval
    m = run.nodes_per_interval
    s = np.linspace(0.0, 1.0, m + 1)
    eta = run._eta[:run.n, None, None]
    Y = eta * (run._U[:run.n, None, :] + s[None, :, None] * run.payoffs[:, None, :])
    X = choice_map(run.reg, Y.reshape(-1, run.dim)).reshape(run.n, m + 1, run.dim)
    F = np.einsum("knd,kd->kn", X, run.payoffs)
    w = np.full(m + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return (F @ w) / (3.0 * m)


def continuous_payoff_integral(run: InterpolatedRun) -> float:
    """``int_0^n <u_t, Q_h(y_t)> dt`` summed over intervals in index order."""
    if run.n < 1:
        raise InvalidInputError("need at least one stage")
    return float(np.sum(interval_integrals(run)))


def continuous_regret(run: InterpolatedRun) -> float:
    return run.reg.body.linear_max_value(run._U[-1]) - continuous_payoff_integral(run)


def continuous_bound(run: InterpolatedRun) -> float:
    """``depth / eta_n`` for the staircase parameter."""
    return run.reg.depth / run._eta[run.n]


class IntervalGap(NamedTuple):
    k: int
    lhs: float
    rhs: float
    abs_diff: float


def interval_gap(run: InterpolatedRun, k: int) -> IntervalGap:
    """Quadrature gap on interval ``k`` against ``D_{h*}(y_k^-, y_{k-1}^+)/eta_{k-1}``."""
    if not 1 <= k <= run.n:
        raise IndexError(f"interval {k} outside 1..{run.n}")
    lhs = interval_integral(run, k) - float(run.payoffs[k - 1] @ run.discrete_action(k))
    rhs = bregman_conjugate(run.reg, run.y_minus(k), run.y_plus(k - 1)) / run._eta[k - 1]
    return IntervalGap(k, lhs, rhs, abs(lhs - rhs))


def interval_gaps(run: InterpolatedRun) -> List[IntervalGap]:
    """All interval gaps, computed in batch where the regularizer allows it."""
    n = run.n
    if n == 0:
        return []
    ints = interval_integrals(run)
    Yp = run._eta[:n, None] * run._U[:n]
    X = choice_map(run.reg, Yp)
    lhs = ints - (X * run.payoffs).sum(axis=1)
    Ym = run._eta[:n, None] * run._U[1:]
    rhs = bregman_conjugate(run.reg, Ym, Yp) / run._eta[:n]
    return [IntervalGap(k + 1, float(lhs[k]), float(rhs[k]), float(abs(lhs[k] - rhs[k])))
            for k in range(n)]


def gap_bound_check(run: InterpolatedRun):
    """``(|int <u_t, x_t> - sum <u_k, x_k>|, (1/2K) sum eta_{k-1} ||u_k||_*^2)``."""
    if not run.reg.K > 0:
        raise InvalidInputError("gap bound needs K > 0")
    if run.n == 0:
        return 0.0, 0.0
    gaps = interval_gaps(run)
    total = abs(sum(g.lhs for g in gaps))
    norms = np.array([run.reg.body.dual_norm(u) for u in run.payoffs])
    bound = float((run._eta[:run.n] * norms**2).sum() / (2.0 * run.reg.K))
    return total, bound
