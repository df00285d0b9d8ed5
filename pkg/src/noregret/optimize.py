"""Convex minimization through the regret machinery.

The lazy scheme accumulates step-weighted negative subgradients
``U_n = -sum_k gamma_k g_k`` and plays ``x_{n+1} = Q_h(eta_n U_n)``.
Regret bounds turn into value bounds through the adjusted iterates:
the best iterate so far and the step-weighted average.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np

from .environments import LossOracle, NoisyOracle, replication_seed
from .errors import InvalidInputError, UnsupportedError
from .geometry import ConvexBody, Regularizer, choice_map, euclidean, project_body
from .schedules import ParameterSchedule, values

Steps = Union[float, Sequence[float], Callable[[int], float]]


@dataclass
class ConvexProgram:
    oracle: LossOracle
    body: ConvexBody
    M: Optional[float] = None
    f_min: Optional[float] = None

    def __post_init__(self):
        if self.M is None:
            self.M = float(self.oracle.M)
        if self.oracle.body.dim != self.body.dim:
            raise InvalidInputError("oracle and body dimensions differ")

    def gap(self, x) -> float:
        if self.f_min is None:
            raise InvalidInputError("program has no known minimum value")
        return self.oracle.value(x) - self.f_min


@dataclass
class AdjustedIterates:
    """Best iterate so far (earliest on ties) and the step-weighted average."""

    dim: int
    x_min: Optional[np.ndarray] = None
    f_x_min: float = math.inf
    sum_gamma: float = 0.0
    weighted_sum: np.ndarray = None
    n: int = 0

    def __post_init__(self):
        if self.weighted_sum is None:
            self.weighted_sum = np.zeros(self.dim)

    def update(self, x: np.ndarray, fx: float, gamma: float) -> None:
        self.n += 1
        if fx < self.f_x_min:
            self.f_x_min = fx
            self.x_min = np.array(x, dtype=float)
        self.sum_gamma += gamma
        self.weighted_sum = self.weighted_sum + gamma * x

    @property
    def x_gamma(self) -> np.ndarray:
        if self.sum_gamma <= 0:
            raise InvalidInputError("no steps recorded")
        return self.weighted_sum / self.sum_gamma


@dataclass
class OptimizationResult:
    """Adjusted iterates after ``n`` steps plus per-stage diagnostics.

    ``actions`` holds ``x_1..x_{n+1}``; ``f_values``, ``f_best`` and
    ``f_avg`` are indexed by stage ``1..n`` (array position ``k-1``).
    """

    iterates: AdjustedIterates
    actions: np.ndarray
    gammas: np.ndarray
    f_values: np.ndarray
    f_best: np.ndarray
    f_avg: np.ndarray
    scores: np.ndarray = field(repr=False, default=None)


def _gammas(steps: Steps, n: int) -> np.ndarray:
    if callable(steps):
        g = np.array([float(steps(k)) for k in range(1, n + 1)])
    elif np.ndim(steps) == 0:
        g = np.full(n, float(steps))
    else:
        g = np.asarray(steps, dtype=float)[:n]
        if len(g) < n:
            raise InvalidInputError("fewer step sizes than stages")
    if not np.all(g > 0):
        raise InvalidInputError("step sizes must be positive")
    return g


def _avg_path(X: np.ndarray, gammas: np.ndarray) -> np.ndarray:
    """Running step-weighted averages ``x^gamma_1..x^gamma_n`` of the rows of ``X``."""
    return np.cumsum(gammas[:, None] * X, axis=0) / np.cumsum(gammas)[:, None]


def _finish(program, X, gammas, fvals, scores=None) -> OptimizationResult:
    n = len(gammas)
    it = AdjustedIterates(program.body.dim)
    for k in range(n):
        it.update(X[k], fvals[k], gammas[k])
    f_avg = program.oracle.values(_avg_path(X[:n], gammas)) if n else np.zeros(0)
    return OptimizationResult(iterates=it, actions=X, gammas=gammas, f_values=fvals,
                              f_best=np.minimum.accumulate(fvals), f_avg=f_avg, scores=scores)


def _lazy(program: ConvexProgram, reg: Regularizer, gammas: np.ndarray, etas: np.ndarray,
          grad: Callable[[np.ndarray], np.ndarray]) -> OptimizationResult:
    n = len(gammas)
    d = program.body.dim
    X = np.empty((n + 1, d))
    S = np.empty((n + 1, d))
    U = np.zeros(d)
    S[0] = U
    X[0] = choice_map(reg, U)
    fvals = np.empty(n)
    for k in range(n):
        x = X[k]
        fvals[k] = program.oracle.value(x)
        U = U - gammas[k] * grad(x)
        S[k + 1] = U
        X[k + 1] = choice_map(reg, etas[k + 1] * U)
    return _finish(program, X, gammas, fvals, S)


def _check_reg(program: ConvexProgram, reg: Regularizer):
    if reg.body is not program.body and (reg.body.kind != program.body.kind or reg.dim != program.body.dim):
        raise InvalidInputError("regularizer lives on a different body")


def md_lazy(program: ConvexProgram, reg: Regularizer, steps: Steps, n: int,
            schedule: Optional[ParameterSchedule] = None) -> OptimizationResult:
    """Lazy mirror descent; ``schedule`` defaults to the constant parameter 1."""
    _check_reg(program, reg)
    gammas = _gammas(steps, n)
    etas = values(schedule, n) if schedule is not None else np.ones(n + 1)
    return _lazy(program, reg, gammas, etas, program.oracle.subgradient)


def psg_lazy(program: ConvexProgram, steps: Steps, n: int, center=None) -> OptimizationResult:
    """Lazy projected subgradient: :func:`md_lazy` with the Euclidean regularizer."""
    return md_lazy(program, euclidean(program.body, center), steps, n)


def md_greedy(program: ConvexProgram, reg: Regularizer, steps: Steps, n: int) -> OptimizationResult:
    """Greedy mirror descent with a Bregman projection after every step.

    Entropy on the simplex gives the multiplicative update followed by
    normalization; the Euclidean case steps from ``x_n`` and projects.
    """
    _check_reg(program, reg)
    gammas = _gammas(steps, n)
    body = program.body
    if reg.kind == "entropy":
        if body.kind != "simplex":
            raise UnsupportedError("entropic greedy steps need the simplex")
    elif reg.kind != "euclidean":
        raise UnsupportedError("greedy steps need an entropy or Euclidean regularizer")
    d = body.dim
    X = np.empty((n + 1, d))
    X[0] = choice_map(reg, np.zeros(d))
    fvals = np.empty(n)
    for k in range(n):
        x = X[k]
        fvals[k] = program.oracle.value(x)
        g = program.oracle.subgradient(x)
        if reg.kind == "entropy":
            z = np.log(np.maximum(x, 1e-300)) - gammas[k] * g
            z -= z.max()
            w = np.where(x > 0, np.exp(z), 0.0)
            X[k + 1] = w / w.sum()
        else:
            X[k + 1] = project_body(body, x - gammas[k] * g)
    return _finish(program, X, gammas, fvals)


def variable_parameter_solve(program: ConvexProgram, reg: Regularizer, n: int) -> OptimizationResult:
    """Unit steps with the anytime parameter ``eta_n = sqrt(K depth / n) / M``."""
    if not program.M > 0:
        raise InvalidInputError("variable-parameter tuning needs M > 0")
    sched = ParameterSchedule.anytime(reg.K, reg.depth, program.M)
    return md_lazy(program, reg, 1.0, n, schedule=sched)


def value_bound_varstep(depth: float, K: float, M: float, steps) -> float:
    """``(depth + M^2/(2K) sum gamma_k^2) / sum gamma_k``."""
    g = np.asarray(steps, dtype=float)
    s = g.sum()
    if s == 0:
        raise InvalidInputError("sum of steps is zero")
    return float((depth + M**2 / (2.0 * K) * (g**2).sum()) / s)


def value_bound_varstep_path(depth: float, K: float, M: float, steps) -> np.ndarray:
    """Same bound for every prefix ``gamma_1..gamma_m``, ``m = 1..n``."""
    g = np.asarray(steps, dtype=float)
    return (depth + M**2 / (2.0 * K) * np.cumsum(g**2)) / np.cumsum(g)


def value_bound_vartemp(depth: float, K: float, M: float, n):
    """``2M sqrt(depth/K) (1/sqrt(n) + 1/(4n))``."""
    n = np.asarray(n, dtype=float)
    return 2.0 * M * np.sqrt(depth / K) * (1.0 / np.sqrt(n) + 1.0 / (4.0 * n))


class StochasticResult(NamedTuple):
    """Replication summary of ``f(x^gamma_n) - f_min`` plus mean per-stage paths."""

    mean: float
    std_error: float
    ci_low: float
    ci_high: float
    gaps: np.ndarray
    M_noisy: float
    mean_gap_avg: np.ndarray
    mean_gap_min: np.ndarray


def _threads() -> int:
    cap = os.cpu_count() or 1
    raw = os.environ.get("NOREGRET_THREADS")
    if raw:
        try:
            cap = min(cap, int(raw))
        except ValueError:
            pass
    return max(1, cap)


def mdsa_lazy(program: ConvexProgram, reg: Regularizer, steps: Steps, n: int, *,
              noise_scale: float, R: int, seed: int = 0, z: float = 1.96) -> StochasticResult:
    """Lazy stochastic mirror descent over ``R`` independent replications.

    Each replication draws noise from its own SplitMix64 stream and reports
    ``f(x^gamma_n) - f_min``.  The aggregate is a mean with a normal
    approximation confidence interval at multiplier ``z``.
    """
    if R < 2:
        raise InvalidInputError("need at least two replications")
    if program.f_min is None:
        raise InvalidInputError("program has no known minimum value")
    _check_reg(program, reg)
    gammas = _gammas(steps, n)
    d = program.body.dim

    def one(r: int):
        noisy = NoisyOracle(program.oracle, noise_scale, seed=replication_seed(seed, r))
        X = np.empty((n, d))
        U = np.zeros(d)
        x = choice_map(reg, U)
        for k in range(n):
            X[k] = x
            U = U - gammas[k] * noisy.subgradient(x)
            x = choice_map(reg, U)
        f_avg = program.oracle.values(_avg_path(X, gammas)) - program.f_min
        f_min = np.minimum.accumulate(program.oracle.values(X)) - program.f_min
        return f_avg, f_min

    workers = _threads()
    if workers == 1:
        runs = [one(r) for r in range(R)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(one, range(R)))
    avg = np.array([a for a, _ in runs])
    best = np.array([b for _, b in runs])
    gaps = avg[:, -1]
    mean = float(gaps.mean())
    se = float(gaps.std(ddof=1) / math.sqrt(R))
    M_noisy = NoisyOracle(program.oracle, noise_scale).M
    return StochasticResult(mean, se, mean - z * se, mean + z * se, gaps, M_noisy,
                            avg.mean(axis=0), best.mean(axis=0))


def spsg_lazy(program: ConvexProgram, steps: Steps, n: int, *, noise_scale: float, R: int,
              seed: int = 0, center=None, z: float = 1.96) -> StochasticResult:
    """Stochastic lazy projected subgradient (Euclidean regularizer)."""
    return mdsa_lazy(program, euclidean(program.body, center), steps, n,
                     noise_scale=noise_scale, R=R, seed=seed, z=z)


def quadratic_ball_problem(x_star, radius: float = 1.0, center=None) -> ConvexProgram:
    """``f(x) = ||x - x_star||^2 / 2`` on an l2 ball containing ``x_star`` (``f_min = 0``)."""
    x_star = np.asarray(x_star, dtype=float)
    c = np.zeros_like(x_star) if center is None else np.asarray(center, dtype=float)
    if np.linalg.norm(x_star - c) > radius:
        raise InvalidInputError("x_star must lie in the ball")
    body = ConvexBody.ball(c, radius)
    d = x_star.size
    oracle = LossOracle.quadratic(np.eye(d), -x_star, body, const=0.5 * float(x_star @ x_star))
    return ConvexProgram(oracle, body, f_min=0.0)


def l1_simplex_problem(target) -> ConvexProgram:
    """``f(x) = ||x - target||_1`` on the simplex with ``target`` in it (``f_min = 0``)."""
    target = np.asarray(target, dtype=float)
    body = ConvexBody.simplex(target.size)
    if not body.contains(target):
        raise InvalidInputError("target must lie in the simplex")
    return ConvexProgram(LossOracle.abs_distance(target, body), body, f_min=0.0)
