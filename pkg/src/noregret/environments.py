"""Payoff streams, convex loss oracles and noisy observation wrappers.

All randomness comes from :class:`SplitMix64`, a counter-based generator
whose output is fixed bit for bit by its 64-bit seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .geometry import ConvexBody, dual_tag, norm
from .errors import DomainError, InvalidInputError

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Steele/Lea/Flood SplitMix64 with 53-bit float extraction."""

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & MASK64
        return mix64(self.state)

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def u64s(self, size: int) -> np.ndarray:
        """The next ``size`` outputs, computed in one vectorized pass."""
        k = np.arange(1, size + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + k * np.uint64(_GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL2)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + size * _GAMMA) & MASK64
        return z

    def floats(self, size: int) -> np.ndarray:
        return (self.u64s(size) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def uniform(self, low: float, high: float, size: int) -> np.ndarray:
        return low + (high - low) * self.floats(size)

    def spawn(self, index: int) -> "SplitMix64":
        """Independent child stream for replication ``index``."""
        return SplitMix64(mix64((self.state + index + 1) & MASK64))


def replication_seed(seed: int, r: int) -> int:
    return SplitMix64(int(seed) + int(r)).next_u64()


def _fit_dual_ball(u: np.ndarray, M: float, tag: str) -> np.ndarray:
    nu = norm(u, tag)
    return u * (M / nu) if nu > M else u


@dataclass
class PayoffStream:
    """Source of payoff vectors with ``||u||_* <= M``.

    ``norm_tag`` names the primal norm; payoffs are bounded in its dual.
    Adversarial streams need the agent's current action to respond to.
    """

    dim: int
    M: float = 1.0
    kind: str = "iid_uniform"
    norm_tag: str = "l1"
    seed: int = 0
    payoffs: Optional[np.ndarray] = None
    _rng: SplitMix64 = field(init=False, repr=False)
    _pos: int = field(default=0, init=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("fixed", "iid_uniform", "adversarial_best_response"):
            raise InvalidInputError(f"unknown stream kind {self.kind!r}")
        if self.kind == "fixed":
            if self.payoffs is None:
                raise InvalidInputError("fixed stream needs a payoff list")
            self.payoffs = np.atleast_2d(np.asarray(self.payoffs, dtype=float))
            if self.payoffs.size and self.payoffs.shape[1] != self.dim:
                raise InvalidInputError("payoff dimension mismatch")
        self._rng = SplitMix64(self.seed)

    @classmethod
    def fixed(cls, payoffs, M: Optional[float] = None, norm_tag: str = "l1",
              dim: Optional[int] = None) -> "PayoffStream":
        P = np.atleast_2d(np.asarray(payoffs, dtype=float))
        if dim is None:
            dim = P.shape[1] if P.size else 1
        if M is None:
            M = max((norm(u, dual_tag(norm_tag)) for u in P), default=0.0)
        return cls(dim=dim, M=M, kind="fixed", norm_tag=norm_tag, payoffs=P)

    @property
    def adaptive(self) -> bool:
        return self.kind == "adversarial_best_response"

    @property
    def dual_tag(self) -> str:
        return dual_tag(self.norm_tag)

    @property
    def length(self) -> Optional[int]:
        """Number of payoffs of a fixed stream; ``None`` for unbounded kinds."""
        if self.kind != "fixed":
            return None
        return len(self.payoffs) if self.payoffs.size else 0

    def clone(self, seed: Optional[int] = None) -> "PayoffStream":
        return PayoffStream(dim=self.dim, M=self.M, kind=self.kind, norm_tag=self.norm_tag,
                            seed=self.seed if seed is None else seed, payoffs=self.payoffs)

    def next_payoff(self, x_current=None) -> np.ndarray:
        if self.kind == "fixed":
            if self._pos >= self.length:
                raise IndexError("fixed stream exhausted")
            u = self.payoffs[self._pos].copy()
            self._pos += 1
            return u
        if self.kind == "iid_uniform":
            u = self._rng.uniform(-self.M, self.M, self.dim)
            return _fit_dual_ball(u, self.M, self.dual_tag)
        if x_current is None:
            raise InvalidInputError("adaptive stream requires the current action")
        return best_response_payoff(np.asarray(x_current, dtype=float), self.M, self.dual_tag)

    def generate(self, n: int) -> np.ndarray:
        """Next ``n`` payoffs of a non-adaptive stream as an ``(n, dim)`` array."""
        if self.adaptive:
            raise InvalidInputError("adaptive streams cannot be pre-generated")
        if self.kind == "fixed":
            return np.array([self.next_payoff() for _ in range(n)]).reshape(n, self.dim)
        P = self._rng.uniform(-self.M, self.M, n * self.dim).reshape(n, self.dim)
        if self.dual_tag != "linf":
            P = np.array([_fit_dual_ball(u, self.M, self.dual_tag) for u in P])
        return P


def best_response_payoff(x: np.ndarray, M: float, tag: str = "linf") -> np.ndarray:
    """Payoff in the dual ball of radius ``M`` pushing hardest against ``x``.

    The favoured pure action is the least-weighted coordinate of ``x``
    (lowest index on ties).
    """
    d = x.size
    j = int(np.argmin(x))
    if tag == "linf":
        u = np.full(d, -float(M))
        u[j] = M
        return u
    v = -x.copy()
    v[j] += 1.0
    if tag == "l2":
        nv = norm(v, "l2")
        return np.zeros(d) if nv == 0 else M * v / nv
    i = int(np.argmax(np.abs(v)))
    u = np.zeros(d)
    u[i] = M * np.sign(v[i])
    return u


@dataclass
class LossOracle:
    """Convex loss on ``body`` with a deterministic subgradient selection."""

    kind: str
    body: ConvexBody
    A: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None
    const: float = 0.0
    c: Optional[np.ndarray] = None
    target: Optional[np.ndarray] = None
    M: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("quadratic", "linear", "abs_distance"):
            raise InvalidInputError(f"unknown loss kind {self.kind!r}")
        if self.M is None:
            self.M = self._lipschitz()

    @classmethod
    def quadratic(cls, A, b, body, const=0.0, M=None):
        """``f(x) = x'Ax/2 + <b, x> + const``."""
        return cls("quadratic", body, A=np.asarray(A, dtype=float),
                   b=np.asarray(b, dtype=float), const=float(const), M=M)

    @classmethod
    def linear(cls, c, body, M=None):
        return cls("linear", body, c=np.asarray(c, dtype=float), M=M)

    @classmethod
    def abs_distance(cls, target, body, M=None):
        """``f(x) = ||x - target||_1``."""
        return cls("abs_distance", body, target=np.asarray(target, dtype=float), M=M)

    def _lipschitz(self) -> float:
        body, tag = self.body, self.body.dual_norm_tag
        if self.kind == "linear":
            return norm(self.c, tag)
        if self.kind == "abs_distance":
            return norm(np.ones(body.dim), tag)
        V = body.vertices()
        if V is not None:
            return float(max(norm(self.A @ v + self.b, tag) for v in V))
        # ball: ||A c + b||_2 + r ||A||_2, converted to the dual norm
        bound = norm(self.A @ body.center + self.b, "l2") + body.radius * np.linalg.norm(self.A, 2)
        factor = {"l2": 1.0, "linf": 1.0, "l1": np.sqrt(body.dim)}[tag]
        return float(factor * bound)

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.kind == "quadratic":
            return float(0.5 * x @ self.A @ x + self.b @ x + self.const)
        if self.kind == "linear":
            return float(self.c @ x)
        return float(np.abs(x - self.target).sum())

    def values(self, X) -> np.ndarray:
        """``f`` at each row of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.kind == "quadratic":
            return 0.5 * np.einsum("ij,jk,ik->i", X, self.A, X) + X @ self.b + self.const
        if self.kind == "linear":
            return X @ self.c
        return np.abs(X - self.target).sum(axis=1)

    def subgradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.body.contains(x, tol=1e-9):
            raise DomainError("subgradient requested outside the body")
        if self.kind == "quadratic":
            return self.A @ x + self.b
        if self.kind == "linear":
            return self.c.copy()
        return np.sign(x - self.target)


@dataclass
class NoisyOracle:
    """Adds i.i.d. uniform noise on ``[-noise_scale, noise_scale]`` per coordinate."""

    inner: Union[LossOracle, PayoffStream]
    noise_scale: float
    seed: int = 0
    _rng: SplitMix64 = field(init=False, repr=False)

    def __post_init__(self):
        if self.noise_scale < 0:
            raise InvalidInputError("noise_scale must be >= 0")
        self._rng = SplitMix64(self.seed)

    @property
    def dim(self) -> int:
        return self.inner.body.dim if isinstance(self.inner, LossOracle) else self.inner.dim

    @property
    def M(self) -> float:
        """Almost-sure bound on the dual norm of a noisy observation."""
        tag = (self.inner.body.dual_norm_tag if isinstance(self.inner, LossOracle)
               else self.inner.dual_tag)
        return self.inner.M + norm(np.full(self.dim, self.noise_scale), tag)

    def noise(self) -> np.ndarray:
        if self.noise_scale == 0:
            return np.zeros(self.dim)
        return self._rng.uniform(-self.noise_scale, self.noise_scale, self.dim)

    def value(self, x) -> float:
        return self.inner.value(x)

    def subgradient(self, x) -> np.ndarray:
        return self.inner.subgradient(x) + self.noise()

    def next_payoff(self, x_current=None) -> np.ndarray:
        return self.inner.next_payoff(x_current) + self.noise()


def sample_action(x, seed: Union[int, SplitMix64]) -> int:
    """Draw a pure action (0-based) from the mixed action ``x`` by inverse CDF."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or not ConvexBody.simplex(x.size).contains(x, tol=1e-9):
        raise InvalidInputError("x is not a probability vector")
    rng = seed if isinstance(seed, SplitMix64) else SplitMix64(seed)
    u = rng.next_float()
    i = int(np.searchsorted(np.cumsum(x), u, side="right"))
    return min(i, x.size - 1)
