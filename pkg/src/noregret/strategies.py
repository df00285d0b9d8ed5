"""Score-averaging strategies ``x_{n+1} = Q_h(eta_n * U_n)`` and named instances.

The state keeps the cumulative payoff ``U_n``; the regularizer fixes the
geometry and the schedule rescales the whole score at every stage.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ._backend import kernels
from .environments import PayoffStream
from .errors import InvalidInputError
from .geometry import ConvexBody, Regularizer, choice_map, entropy, euclidean
from .schedules import ParameterSchedule, value_at, values

NAMES = ("EW", "EW_PRIME", "SFP", "VSFP", "OGD_L", "OMD_L")

DESCRIPTIONS = {
    "EW": "exponential weights: entropy on the simplex, constant eta",
    "EW_PRIME": "exponential weights with eta/sqrt(n)",
    "SFP": "smooth fictitious play: any regularizer, eta/n",
    "VSFP": "vanishingly smooth fictitious play: any regularizer, eta*n^-alpha",
    "OGD_L": "lazy online gradient descent: Euclidean regularizer, constant eta",
    "OMD_L": "lazy online mirror descent: any regularizer, constant eta",
}


@dataclass
class StrategyState:
    reg: Regularizer
    schedule: ParameterSchedule
    U: np.ndarray
    n: int
    x: np.ndarray
    name: str = "custom"

    @property
    def dim(self) -> int:
        return self.reg.dim


@dataclass
class Trajectory:
    """Actions ``x_1..x_{n+1}`` (rows of ``actions``) and payoffs ``u_1..u_n``."""

    actions: np.ndarray
    payoffs: np.ndarray

    @property
    def n(self) -> int:
        return len(self.payoffs)

    def pairs(self) -> List[Tuple[np.ndarray, Optional[np.ndarray]]]:
        out = [(self.actions[k], self.payoffs[k]) for k in range(self.n)]
        out.append((self.actions[self.n], None))
        return out


def init(reg: Regularizer, schedule: ParameterSchedule, name: str = "custom") -> StrategyState:
    U = np.zeros(reg.dim)
    return StrategyState(reg=reg, schedule=schedule, U=U, n=0, x=choice_map(reg, U), name=name)


def step(state: StrategyState, u) -> np.ndarray:
    """Absorb payoff ``u`` and return the next action."""
    u = np.asarray(u, dtype=float)
    if u.shape != (state.dim,):
        raise InvalidInputError(f"payoff has shape {u.shape}, expected ({state.dim},)")
    if not np.all(np.isfinite(u)):
        raise InvalidInputError("payoff contains non-finite entries")
    state.n += 1
    state.U = state.U + u
    if state.schedule.is_block_start(state.n + 1):
        state.U = np.zeros(state.dim)
    state.x = choice_map(state.reg, value_at(state.schedule, state.n) * state.U)
    return state.x


def make_named(name: str, *, eta: Optional[float] = None, d: Optional[int] = None,
               body: Optional[ConvexBody] = None, alpha: Optional[float] = None,
               reg: Optional[Regularizer] = None) -> StrategyState:
    """Build one of the named algorithms of the family.

    EW and EW_PRIME need ``d`` (or a simplex ``body``); OGD_L needs ``body``;
    SFP, VSFP and OMD_L take an explicit ``reg``.
    """
    if name not in NAMES:
        raise InvalidInputError(f"unknown strategy {name!r}; choose from {', '.join(NAMES)}")
    if eta is None:
        raise InvalidInputError("missing parameter 'eta'")
    if name in ("EW", "EW_PRIME"):
        if body is None and d is None:
            raise InvalidInputError("missing parameter 'd'")
        r = entropy(body if body is not None else d)
        sched = ParameterSchedule.constant(eta) if name == "EW" else ParameterSchedule.inv_sqrt(eta)
        return init(r, sched, name)
    if name == "OGD_L":
        if reg is None and body is None:
            raise InvalidInputError("missing parameter 'body'")
        r = reg if reg is not None else euclidean(body)
        if r.kind != "euclidean":
            raise InvalidInputError("OGD_L uses a Euclidean regularizer")
        return init(r, ParameterSchedule.constant(eta), name)
    if reg is None:
        raise InvalidInputError("missing parameter 'reg'")
    if name == "SFP":
        return init(reg, ParameterSchedule.harmonic(eta), name)
    if name == "VSFP":
        if alpha is None:
            raise InvalidInputError("missing parameter 'alpha'")
        return init(reg, ParameterSchedule.power(eta, alpha), name)
    return init(reg, ParameterSchedule.constant(eta), name)


def _kernel_mode(state: StrategyState) -> Optional[int]:
    reg = state.reg
    if state.n != 0 or state.schedule.kind == "doubling" or reg.body.kind != "simplex":
        return None
    if reg.kind == "entropy":
        return kernels.MODE_ENTROPY
    if reg.kind == "euclidean":
        return kernels.MODE_EUCLIDEAN_SIMPLEX
    return None


def play_sequence(state: StrategyState, stream: PayoffStream, n: Optional[int] = None) -> Trajectory:
    """Run ``state`` against ``stream`` for ``n`` stages (default: a fixed stream's length).

    Simplex runs with entropy or Euclidean regularizers from a fresh state
    go through the fused kernels; everything else steps one stage at a time.
    """
    if n is None:
        n = stream.length
        if n is None:
            raise InvalidInputError("n is required for unbounded streams")
    if stream.dim != state.dim:
        raise InvalidInputError("stream and strategy dimensions differ")
    mode = _kernel_mode(state)
    center = state.reg.center if state.reg.center is not None else np.zeros(state.dim)
    if mode is not None and n > 0:
        etas = values(state.schedule, n)
        if stream.kind == "adversarial_best_response" and stream.dual_tag == "linf":
            X, P = kernels.best_response_run(state.dim, n, float(stream.M), etas, mode, center)
        elif not stream.adaptive:
            P = stream.generate(n)
            X = kernels.dual_averaging_run(P, etas, mode, center)
        else:
            X = None
        if X is not None:
            state.U = np.cumsum(P, axis=0)[-1]
            state.n = n
            state.x = X[-1].copy()
            return Trajectory(actions=X, payoffs=P)
    X = np.empty((n + 1, state.dim))
    P = np.empty((n, state.dim))
    X[0] = state.x
    for k in range(n):
        u = stream.next_payoff(state.x if stream.adaptive else None)
        P[k] = u
        X[k + 1] = step(state, u)
    return Trajectory(actions=X, payoffs=P)
