"""Regret accounting and the regret bounds of the strategy family as formulas.

Most bounds come in two forms: a single value at stage ``n`` and a
``*_path`` variant returning the bound at every stage ``0..n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import InvalidInputError, UnsupportedError
from .geometry import ConvexBody, Regularizer, bregman_conjugate, norm_rows
from .schedules import ParameterSchedule, partial_sums, values


@dataclass
class RegretLedger:
    """Running totals of payoffs; optional snapshots and sampled pure actions."""

    body: ConvexBody
    keep_snapshots: bool = False
    payoff: float = 0.0
    payoff_vector: np.ndarray = None
    n: int = 0
    snapshots: List[tuple] = field(default_factory=list)
    actions: List[int] = field(default_factory=list)
    history: List[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if self.payoff_vector is None:
            self.payoff_vector = np.zeros(self.body.dim)

    def record(self, u, x, action: Optional[int] = None) -> "RegretLedger":
        u = np.asarray(u, dtype=float)
        x = np.asarray(x, dtype=float)
        if u.shape != (self.body.dim,) or x.shape != (self.body.dim,):
            raise InvalidInputError("payoff/action dimension mismatch")
        self.payoff += float(u @ x)
        self.payoff_vector = self.payoff_vector + u
        self.n += 1
        if action is not None:
            self.actions.append(int(action))
            self.history.append(u.copy())
        if self.keep_snapshots:
            self.snapshots.append((self.n, self.payoff, self.payoff_vector.copy()))
        return self


def record(ledger: RegretLedger, u, x, action: Optional[int] = None) -> RegretLedger:
    return ledger.record(u, x, action)


def max_regret(ledger: RegretLedger, body: Optional[ConvexBody] = None) -> float:
    """``max_{x in C} <sum u_k, x> - sum <u_k, x_k>``."""
    body = body or ledger.body
    return body.linear_max_value(ledger.payoff_vector) - ledger.payoff


def realized_regret(ledger: RegretLedger) -> float:
    """``max_a sum_k (u_{k,a} - u_{k,a_k})`` over the recorded pure actions."""
    if ledger.body.kind != "simplex":
        raise UnsupportedError("realized regret is defined on the simplex only")
    if len(ledger.actions) != ledger.n:
        raise InvalidInputError("every stage needs a sampled action")
    if ledger.n == 0:
        return 0.0
    H = np.array(ledger.history)
    got = H[np.arange(ledger.n), ledger.actions].sum()
    return float(H.sum(axis=0).max() - got)


def regret_path(body: ConvexBody, actions, payoffs) -> np.ndarray:
    """Max regret after each stage ``0..n`` of a trajectory."""
    X = np.asarray(actions, dtype=float)
    P = np.asarray(payoffs, dtype=float)
    n = len(P)
    gained = np.zeros(n + 1)
    np.cumsum((P * X[:n]).sum(axis=1), out=gained[1:])
    cum = np.zeros((n + 1, body.dim))
    np.cumsum(P, axis=0, out=cum[1:])
    if body.kind == "simplex":
        best = cum.max(axis=1)
    elif body.kind == "vertex_polytope":
        best = (cum @ body.vertex_list.T).max(axis=1)
    else:
        best = np.array([body.linear_max_value(c) for c in cum])
    return best - gained


def dual_norms(reg: Regularizer, payoffs) -> np.ndarray:
    return norm_rows(np.atleast_2d(payoffs), reg.body.dual_norm_tag)


def _check(reg: Regularizer, schedule: ParameterSchedule):
    if not reg.K > 0:
        raise InvalidInputError("bound requires K > 0")
    if schedule.kind == "doubling":
        raise UnsupportedError("restarting schedules are bounded block by block")


def bound_thm2_path(reg: Regularizer, schedule: ParameterSchedule, n: int,
                    norms=None, M: Optional[float] = None) -> np.ndarray:
    """``depth/eta_m + (1/2K) sum_{k<=m} eta_{k-1} ||u_k||_*^2`` for ``m = 0..n``.

    Pass the per-stage dual norms ``norms`` for the exact form, or the
    uniform bound ``M`` for the bounded form.
    """
    _check(reg, schedule)
    if (norms is None) == (M is None):
        raise InvalidInputError("give exactly one of norms or M")
    eta = values(schedule, n)
    if M is not None:
        comp = M**2 * partial_sums(schedule, n)
    else:
        sq = np.asarray(norms, dtype=float)[:n] ** 2
        comp = np.zeros(n + 1)
        np.cumsum(eta[:n] * sq, out=comp[1:])
    return reg.depth / eta + comp / (2.0 * reg.K)


def bound_thm2(reg: Regularizer, schedule: ParameterSchedule, n: int,
               norms=None, M: Optional[float] = None) -> float:
    return float(bound_thm2_path(reg, schedule, n, norms=norms, M=M)[-1])


def bregman_terms(reg: Regularizer, schedule: ParameterSchedule, payoffs) -> np.ndarray:
    """``D_{h*}(y_k^-, y_{k-1}^+) / eta_{k-1}`` for ``k = 1..n``."""
    P = np.atleast_2d(np.asarray(payoffs, dtype=float))
    n = len(P)
    if n == 0:
        return np.zeros(0)
    eta = values(schedule, n)
    U = np.zeros((n + 1, reg.dim))
    np.cumsum(P, axis=0, out=U[1:])
    y_plus_prev = eta[:n, None] * U[:n]
    y_minus = eta[:n, None] * U[1:]
    return bregman_conjugate(reg, y_minus, y_plus_prev) / eta[:n]


def bound_thm3_path(reg: Regularizer, schedule: ParameterSchedule, payoffs) -> np.ndarray:
    """``depth/eta_m + sum_{k<=m} D_{h*}(y_k^-, y_{k-1}^+)/eta_{k-1}``, ``m = 0..n``."""
    if schedule.kind == "doubling":
        raise UnsupportedError("restarting schedules are bounded block by block")
    terms = bregman_terms(reg, schedule, payoffs)
    n = len(terms)
    acc = np.zeros(n + 1)
    np.cumsum(terms, out=acc[1:])
    return reg.depth / values(schedule, n) + acc


def bound_thm3(reg: Regularizer, schedule: ParameterSchedule, payoffs) -> float:
    return float(bound_thm3_path(reg, schedule, payoffs)[-1])


def bound_cor2(K: float, depth: float, M: float, n) -> float:
    """Anytime bound ``2M sqrt(depth/K) (1/4 + sqrt(n))`` of the tuned ``eta/sqrt(n)`` rule."""
    return 2.0 * M * np.sqrt(depth / K) * (0.25 + np.sqrt(n))


def bound_inv_sqrt(depth: float, K: float, M: float, eta: float, n):
    """Bounded-form bound for ``eta_n = eta/sqrt(n)`` with an arbitrary ``eta``."""
    n = np.asarray(n, dtype=float)
    return depth * np.sqrt(np.maximum(n, 1.0)) / eta + M**2 * eta * (1.0 + 2.0 * np.sqrt(n)) / (2.0 * K)


def bound_ew(d: int, eta: float, n, M: float = 1.0):
    return math.log(d) / eta + M**2 * np.asarray(n, dtype=float) * eta / 2.0


def bound_ew_finite(d: int, n) -> float:
    return np.sqrt(2.0 * np.asarray(n, dtype=float) * math.log(d))


def bound_sfp(depth: float, K: float, eta: float, n, M: float = 1.0):
    """``depth n/eta + eta log(n)/(2K) + eta/K`` (payoffs scaled by ``M``)."""
    n = np.asarray(n, dtype=float)
    with np.errstate(divide="ignore"):
        logn = np.where(n >= 1, np.log(np.maximum(n, 1.0)), 0.0)
    return depth * n / eta + M**2 * (eta * logn / (2.0 * K) + eta / K)


def bound_vsfp(depth: float, K: float, eta: float, alpha: float, n, M: float = 1.0):
    """Average-regret bound for ``eta_n = eta n^-alpha``; multiply by ``n`` for cumulative."""
    if not 0 < alpha < 1:
        raise InvalidInputError("alpha must lie in (0, 1)")
    n = np.asarray(n, dtype=float)
    return (depth / (eta * n ** (1.0 - alpha))
            + M**2 * eta * n ** (-alpha) / (2.0 * (1.0 - alpha) * K)
            + M**2 * eta / (2.0 * K * n))


def bound_ogd(delta_sq: float, eta: float, M: float, n):
    """Average-regret bound ``delta_C^2/(2 n eta) + eta M^2 / 2`` of lazy OGD."""
    return delta_sq / (2.0 * np.asarray(n, dtype=float) * eta) + eta * M**2 / 2.0


def bound_omd(depth: float, K: float, eta: float, M: float, n):
    return depth / eta + eta * M**2 * np.asarray(n, dtype=float) / (2.0 * K)


def named_bound_path(name: str, reg: Regularizer, schedule: ParameterSchedule, M: float,
                     n: int) -> np.ndarray:
    """Algorithm-specific cumulative bound at stages ``0..n`` (stage 0 is ``depth/eta_1``)."""
    k = np.arange(n + 1, dtype=float)
    eta = schedule.eta
    depth, K = reg.depth, reg.K
    if name in ("EW", "OGD_L", "OMD_L"):
        out = bound_omd(depth, K, eta, M, k)
    elif name == "EW_PRIME":
        out = bound_inv_sqrt(depth, K, M, eta, k)
    elif name == "SFP":
        out = bound_sfp(depth, K, eta, k, M=M)
    elif name == "VSFP":
        with np.errstate(divide="ignore", invalid="ignore"):
            out = k * bound_vsfp(depth, K, eta, schedule.alpha, k, M=M)
    else:
        raise InvalidInputError(f"no named bound for {name!r}")
    out = np.asarray(out, dtype=float)
    out[0] = depth / schedule.value_at(1)
    return out
