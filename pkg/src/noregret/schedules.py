"""Positive nonincreasing parameter sequences ``eta_n``.

Every schedule follows the convention ``eta_0 = eta_1`` so that sums of the
form ``sum_{k=1}^n eta_{k-1}`` are defined from the first stage on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ScheduleError

KINDS = ("constant", "inv_sqrt", "harmonic", "power", "anytime", "doubling")


@dataclass(frozen=True)
class ParameterSchedule:
    kind: str
    eta: float = 1.0
    alpha: float = 0.5
    K: float = 1.0
    depth: float = 1.0
    M: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ScheduleError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "anytime":
            if not (self.K > 0 and self.depth > 0 and self.M > 0):
                raise ScheduleError("anytime schedule needs K, depth, M > 0")
        elif not self.eta > 0:
            raise ScheduleError("eta must be positive")
        if self.kind == "power" and not 0 < self.alpha < 1:
            raise ScheduleError("power schedule needs 0 < alpha < 1")

    # constructors mirroring the named kinds
    @classmethod
    def constant(cls, eta):
        return cls("constant", eta=eta)

    @classmethod
    def inv_sqrt(cls, eta):
        return cls("inv_sqrt", eta=eta)

    @classmethod
    def harmonic(cls, eta):
        return cls("harmonic", eta=eta)

    @classmethod
    def power(cls, eta, alpha):
        return cls("power", eta=eta, alpha=alpha)

    @classmethod
    def anytime(cls, K, depth, M):
        return cls("anytime", K=K, depth=depth, M=M)

    @classmethod
    def doubling(cls, eta):
        return cls("doubling", eta=eta)

    def value_at(self, n: int) -> float:
        return value_at(self, n)

    def is_block_start(self, n: int) -> bool:
        """True when stage ``n`` opens a new doubling block (``n = 2, 4, 8, ...``)."""
        return self.kind == "doubling" and n >= 2 and (n & (n - 1)) == 0


def value_at(s: ParameterSchedule, n: int) -> float:
    if n < 0:
        raise ScheduleError("stage must be >= 0")
    n = max(int(n), 1)
    if s.kind == "constant":
        return s.eta
    if s.kind == "inv_sqrt":
        return s.eta / math.sqrt(n)
    if s.kind == "harmonic":
        return s.eta / n
    if s.kind == "power":
        return s.eta * n ** (-s.alpha)
    if s.kind == "anytime":
        return math.sqrt(s.K * s.depth / (s.M**2 * n))
    # block m covers stages 2^m .. 2^(m+1)-1; tuned to its length 2^m
    m = n.bit_length() - 1
    return s.eta / math.sqrt(2.0**m)


def values(s: ParameterSchedule, n: int) -> np.ndarray:
    """Array ``[eta_0, eta_1, ..., eta_n]``."""
    k = np.arange(n + 1, dtype=float)
    k[0] = 1.0
    if s.kind == "constant":
        return np.full(n + 1, s.eta)
    if s.kind == "inv_sqrt":
        return s.eta / np.sqrt(k)
    if s.kind == "harmonic":
        return s.eta / k
    if s.kind == "anytime":
        return np.sqrt(s.K * s.depth / (s.M**2 * k))
    # power and doubling go through the scalar path: vectorized pow is not
    # always correctly rounded and would drift from value_at by an ulp
    return np.array([value_at(s, i) for i in range(n + 1)])


def partial_sum(s: ParameterSchedule, n: int) -> float:
    """``sum_{k=1}^n eta_{k-1}``, summed in compensated arithmetic."""
    if n < 1:
        raise ScheduleError("partial_sum needs n >= 1")
    return math.fsum(values(s, n - 1))


def partial_sums(s: ParameterSchedule, n: int) -> np.ndarray:
    """``[S_0, S_1, ..., S_n]`` with ``S_m = sum_{k=1}^m eta_{k-1}`` and ``S_0 = 0``."""
    out = np.zeros(n + 1)
    np.cumsum(values(s, n)[:n], out=out[1:])
    return out


def optimal_constant(K: float, depth: float, M: float, n: int, kind: str = "constant") -> float:
    """Constant ``eta`` minimizing ``depth/eta + M^2 eta n / (2K)``."""
    if kind != "constant":
        raise ScheduleError(f"optimal tuning is defined for constant schedules, not {kind!r}")
    if not (K > 0 and depth > 0 and M > 0 and n > 0):
        raise ScheduleError("optimal_constant needs positive inputs")
    return math.sqrt(2.0 * K * depth / (M**2 * n))
