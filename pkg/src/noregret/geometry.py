"""Convex bodies, regularizers, choice maps and conjugates.

A regularizer ``h`` on a compact convex body ``C`` induces the choice map
``Q(y) = argmax_{x in C} <y, x> - h(x)``, which is also the gradient of the
convex conjugate ``h*``.  Everything the strategies need from the geometry
goes through :func:`choice_map`, :func:`conjugate_value` and
:func:`bregman_conjugate`.
"""
from __future__ import annotations

import dataclasses
import itertools
import warnings
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import nnls
from scipy.special import ndtri, xlogy
from scipy.stats import qmc

from ._backend import kernels
from .errors import (
    ConvergenceError,
    DomainError,
    InvalidInputError,
    UnsupportedError,
)

NORM_TAGS = ("l1", "l2", "linf")
_DUAL = {"l1": "linf", "l2": "l2", "linf": "l1"}

MEMBERSHIP_TOL = 1e-10
ASCENT_TOL = 1e-10
ASCENT_MAX_ITER = 100_000
DEPTH_SAMPLES = 10_000
MEB_EPS = 1e-6
MEB_MAX_ITER = 1_000_000


def _vector(y, name="y") -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if arr.ndim == 0 or arr.size == 0:
        raise InvalidInputError(f"{name} must be a non-empty vector")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def norm(x, tag: str) -> float:
    x = np.asarray(x, dtype=float)
    if tag == "l1":
        return float(np.abs(x).sum())
    if tag == "l2":
        return float(np.sqrt(x @ x))
    if tag == "linf":
        return float(np.abs(x).max())
    raise InvalidInputError(f"unknown norm tag {tag!r}")


def norm_rows(X, tag: str) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if tag == "l1":
        return np.abs(X).sum(axis=1)
    if tag == "l2":
        return np.sqrt((X * X).sum(axis=1))
    if tag == "linf":
        return np.abs(X).max(axis=1)
    raise InvalidInputError(f"unknown norm tag {tag!r}")


def dual_tag(tag: str) -> str:
    return _DUAL[tag]


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """A compact convex action set described by its oracles.

    Use the :meth:`simplex`, :meth:`box`, :meth:`ball` and :meth:`polytope`
    constructors rather than filling the fields by hand.
    """

    dim: int
    kind: str
    norm_tag: str = "l2"
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    center: Optional[np.ndarray] = None
    radius: float = 0.0
    vertex_list: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidInputError("dim must be positive")
        if self.norm_tag not in NORM_TAGS:
            raise InvalidInputError(f"unknown norm tag {self.norm_tag!r}")

    @classmethod
    def simplex(cls, d: int, norm_tag: str = "l1") -> "ConvexBody":
        return cls(dim=int(d), kind="simplex", norm_tag=norm_tag)

    @classmethod
    def box(cls, lower, upper, norm_tag: str = "l2") -> "ConvexBody":
        lo, hi = _vector(lower, "lower"), _vector(upper, "upper")
        if lo.shape != hi.shape or np.any(lo > hi):
            raise InvalidInputError("box needs lower <= upper of equal shape")
        return cls(dim=lo.size, kind="box", norm_tag=norm_tag, lower=lo, upper=hi)

    @classmethod
    def ball(cls, center, radius: float, norm_tag: str = "l2") -> "ConvexBody":
        c = _vector(center, "center")
        if not radius >= 0:
            raise InvalidInputError("radius must be >= 0")
        return cls(dim=c.size, kind="l2_ball", norm_tag=norm_tag, center=c, radius=float(radius))

    @classmethod
    def polytope(cls, vertices, norm_tag: str = "l2") -> "ConvexBody":
        V = np.atleast_2d(np.asarray(vertices, dtype=float))
        if V.size == 0 or not np.all(np.isfinite(V)):
            raise InvalidInputError("polytope needs a finite, non-empty vertex list")
        return cls(dim=V.shape[1], kind="vertex_polytope", norm_tag=norm_tag, vertex_list=V)

    @property
    def dual_norm_tag(self) -> str:
        return _DUAL[self.norm_tag]

    def primal_norm(self, x) -> float:
        return norm(x, self.norm_tag)

    def dual_norm(self, u) -> float:
        return norm(u, self.dual_norm_tag)

    def vertices(self) -> Optional[np.ndarray]:
        """Extreme points, or ``None`` for bodies without a finite list."""
        if self.kind == "simplex":
            return np.eye(self.dim)
        if self.kind == "box":
            if self.dim > 20:
                raise UnsupportedError("box vertex enumeration limited to dim <= 20")
            corners = itertools.product(*zip(self.lower, self.upper))
            return np.unique(np.array(list(corners), dtype=float), axis=0)
        if self.kind == "vertex_polytope":
            return self.vertex_list
        if self.kind == "l2_ball" and self.dim == 1:
            return np.array([self.center - self.radius, self.center + self.radius])
        return None

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,) or not np.all(np.isfinite(x)):
            return False
        if self.kind == "simplex":
            return bool(np.all(x >= -tol) and abs(x.sum() - 1.0) <= tol)
        if self.kind == "box":
            return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))
        if self.kind == "l2_ball":
            return norm(x - self.center, "l2") <= self.radius + tol
        # convex-hull membership as a non-negative least-squares fit
        A = np.vstack([self.vertex_list.T, np.ones(len(self.vertex_list))])
        _, resid = nnls(A, np.append(x, 1.0))
        return resid <= tol * max(1.0, norm(x, "l2"))

    def project(self, y) -> np.ndarray:
        return project_body(self, y)

    def linear_max(self, u):
        """Return ``(x, <u, x>)`` with ``x`` maximizing ``<u, .>`` over the body."""
        u = _vector(u, "u")
        if self.kind == "simplex":
            i = int(np.argmax(u))
            x = np.zeros(self.dim)
            x[i] = 1.0
            return x, float(u[i])
        if self.kind == "box":
            x = np.where(u > 0, self.upper, self.lower)
            return x, float(u @ x)
        if self.kind == "l2_ball":
            nu = norm(u, "l2")
            if nu == 0.0:
                return self.center.copy(), float(u @ self.center)
            x = self.center + self.radius * u / nu
            return x, float(u @ self.center + self.radius * nu)
        values = self.vertex_list @ u
        i = int(np.argmax(values))
        return self.vertex_list[i].copy(), float(values[i])

    def linear_max_value(self, u) -> float:
        return self.linear_max(u)[1]


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float


@dataclass(frozen=True, eq=False)
class Regularizer:
    """A strictly convex ``h`` that is finite exactly on ``body``.

    ``K`` is the strong-convexity modulus with respect to ``body.norm_tag``.
    ``approximate`` marks a depth obtained from sampling rather than exactly.
    """

    body: ConvexBody
    kind: str
    K: float
    h_min: float
    h_max: float
    center: Optional[np.ndarray] = None
    func: Optional[Callable] = field(default=None, repr=False)
    grad: Optional[Callable] = field(default=None, repr=False)
    smoothness: Optional[float] = None
    approximate: bool = False

    @property
    def depth(self) -> float:
        return self.h_max - self.h_min

    @property
    def dim(self) -> int:
        return self.body.dim

    def __call__(self, x):
        return regularizer_value(self, x)


def entropy(body) -> Regularizer:
    """Negative Shannon entropy on the simplex; ``body`` may be an integer ``d``."""
    if isinstance(body, (int, np.integer)):
        body = ConvexBody.simplex(int(body))
    if body.kind != "simplex":
        raise UnsupportedError("the entropy regularizer lives on the simplex")
    d = body.dim
    # 1-strongly convex w.r.t. l1, hence also w.r.t. the smaller l2 and linf norms
    return Regularizer(body=body, kind="entropy", K=1.0, h_min=-math.log(d), h_max=0.0)


def _euclidean_modulus(body: ConvexBody) -> float:
    if body.norm_tag == "l1":
        # ||z||_2^2 >= ||z||_1^2 / d
        return 1.0 / body.dim
    return 1.0


def euclidean(body: ConvexBody, center=None, *, h_min: Optional[float] = None) -> Regularizer:
    """``h(x) = ||x - center||^2 / 2`` on ``body`` (center defaults to the origin).

    ``h_min`` may be supplied when ``center`` is known to lie in the body
    but the body has no projection oracle.
    """
    c = np.zeros(body.dim) if center is None else _vector(center, "center")
    if c.shape != (body.dim,):
        raise InvalidInputError("center dimension does not match the body")
    if h_min is None:
        p = project_body(body, c)
        h_min = 0.5 * float((p - c) @ (p - c))
    if body.kind == "l2_ball":
        h_max = 0.5 * (norm(c - body.center, "l2") + body.radius) ** 2
    elif body.kind == "box":
        h_max = 0.5 * float(np.maximum((body.lower - c) ** 2, (body.upper - c) ** 2).sum())
    else:
        V = body.vertices()
        h_max = 0.5 * float(((V - c) ** 2).sum(axis=1).max())
    return Regularizer(
        body=body, kind="euclidean", K=_euclidean_modulus(body),
        h_min=float(h_min), h_max=h_max, center=c,
    )


def generic(body: ConvexBody, func: Callable, K: float, grad: Optional[Callable] = None,
            smoothness: Optional[float] = None) -> Regularizer:
    """A user-supplied strongly convex ``func`` restricted to ``body``.

    The choice map is computed by projected gradient ascent, so the body must
    have a projection oracle. ``grad`` defaults to central differences.
    """
    if body.kind == "vertex_polytope":
        raise UnsupportedError("generic regularizers need a body with a projection oracle")
    if not K > 0:
        raise InvalidInputError("K must be positive")
    reg = Regularizer(body=body, kind="generic", K=float(K), h_min=0.0, h_max=0.0,
                      func=func, grad=grad, smoothness=smoothness)
    h_min = float(func(choice_map(reg, np.zeros(body.dim))))
    V = body.vertices()
    approximate = V is None
    if approximate:
        V = _sphere_samples(body, DEPTH_SAMPLES)
    h_max = max(float(func(v)) for v in V)
    return dataclasses.replace(reg, h_min=h_min, h_max=max(h_max, h_min), approximate=approximate)


def _sphere_samples(body: ConvexBody, n: int) -> np.ndarray:
    # scrambled Sobol points pushed through the normal quantile, then normalized
    with warnings.catch_warnings():
        # a non power-of-two count only weakens the balance property
        warnings.simplefilter("ignore", UserWarning)
        sob = qmc.Sobol(d=body.dim, scramble=True, seed=0).random(n)
    z = ndtri(np.clip(sob, 1e-12, 1 - 1e-12))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return body.center + body.radius * z


def regularizer_value(reg: Regularizer, x) -> float:
    """``h(x)``, or ``+inf`` when ``x`` is outside the body."""
    x = np.asarray(x, dtype=float)
    if not reg.body.contains(x, tol=1e-9):
        return math.inf
    if reg.kind == "entropy":
        return float(xlogy(np.clip(x, 0.0, None), np.clip(x, 0.0, None)).sum())
    if reg.kind == "euclidean":
        r = x - reg.center
        return 0.5 * float(r @ r)
    return float(reg.func(x))


def _values_rows(reg: Regularizer, X: np.ndarray) -> np.ndarray:
    if reg.kind == "entropy":
        Xc = np.clip(X, 0.0, None)
        return xlogy(Xc, Xc).sum(axis=1)
    if reg.kind == "euclidean":
        R = X - reg.center
        return 0.5 * (R * R).sum(axis=1)
    return np.array([float(reg.func(x)) for x in X])


def logit_choice(y) -> np.ndarray:
    """Shift-stable ``exp(y) / sum(exp(y))``."""
    return kernels.logit(_vector(y))


def project_simplex(y) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort and threshold)."""
    return kernels.project_simplex(_vector(y))


def project_body(body: ConvexBody, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("y contains non-finite entries")
    if y.shape[-1] != body.dim:
        raise InvalidInputError("dimension mismatch")
    batch = y.ndim == 2
    if body.kind == "simplex":
        return kernels.project_simplex_rows(y) if batch else kernels.project_simplex(y)
    if body.kind == "box":
        return np.clip(y, body.lower, body.upper)
    if body.kind == "l2_ball":
        r = y - body.center
        dist = np.sqrt((r * r).sum(axis=-1, keepdims=True))
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(dist > body.radius, body.radius / dist, 1.0)
        return body.center + r * scale
    raise UnsupportedError("Euclidean projection onto a vertex polytope is not implemented")


def choice_map(reg: Regularizer, y) -> np.ndarray:
    """``Q_h(y)``; a 2-d ``y`` is treated as a batch of dual vectors (rows)."""
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("y contains non-finite entries")
    if y.shape[-1] != reg.dim:
        raise InvalidInputError("dimension mismatch")
    if reg.kind == "entropy":
        return kernels.logit_rows(y) if y.ndim == 2 else kernels.logit(y)
    if reg.kind == "euclidean":
        return project_body(reg.body, y + reg.center)
    if y.ndim == 2:
        return np.array([_ascent(reg, row) for row in y])
    return _ascent(reg, y)


def _grad(reg: Regularizer, x: np.ndarray) -> np.ndarray:
    if reg.grad is not None:
        return np.asarray(reg.grad(x), dtype=float)
    eps = 1e-7
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = eps
        g[i] = (reg.func(x + e) - reg.func(x - e)) / (2 * eps)
    return g


def _ascent(reg: Regularizer, y: np.ndarray) -> np.ndarray:
    body = reg.body
    curvature = max(reg.K, reg.smoothness or 0.0)
    step = 1.0 / (curvature + body.dual_norm(y))
    x = project_body(body, np.zeros(body.dim))
    diff = math.inf
    for _ in range(ASCENT_MAX_ITER):
        x_new = project_body(body, x + step * (y - _grad(reg, x)))
        diff = norm(x_new - x, "l2")
        x = x_new
        if diff < ASCENT_TOL:
            return x
    raise ConvergenceError("projected gradient ascent did not converge", diff)


def conjugate_value(reg: Regularizer, y):
    """``h*(y) = max_x <y, x> - h(x)``; rows of a 2-d ``y`` are evaluated separately."""
    y = np.asarray(y, dtype=float)
    if reg.kind == "entropy":
        if not np.all(np.isfinite(y)):
            raise InvalidInputError("y contains non-finite entries")
        return kernels.logsumexp_rows(y) if y.ndim == 2 else kernels.logsumexp(y)
    x = choice_map(reg, y)
    if y.ndim == 2:
        return (y * x).sum(axis=1) - _values_rows(reg, x)
    return float(y @ x) - regularizer_value(reg, x)


def bregman_conjugate(reg: Regularizer, y1, y2):
    """``D_{h*}(y1, y2) = h*(y1) - h*(y2) - <y1 - y2, Q(y2)>`` (row-wise for 2-d input)."""
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    if y1.shape != y2.shape:
        raise InvalidInputError("y1 and y2 must have the same shape")
    batch = y1.ndim == 2
    Y1, Y2 = np.atleast_2d(y1), np.atleast_2d(y2)
    p = choice_map(reg, Y2)
    delta = Y1 - Y2
    lin = (delta * p).sum(axis=1)
    if reg.kind == "entropy":
        # log sum_i p_i exp(delta_i) - <delta, p>, written with expm1/log1p so
        # small score increments do not cancel against large conjugate values
        z = delta - lin[:, None]
        small = np.abs(z).max(axis=1) < 30.0
        out = np.empty(len(Y1))
        zs = z[small]
        out[small] = np.log1p((p[small] * (np.expm1(zs) - zs)).sum(axis=1))
        if not small.all():
            big = ~small
            out[big] = (kernels.logsumexp_rows(Y1[big]) - kernels.logsumexp_rows(Y2[big])
                        - lin[big])
    else:
        out = conjugate_value(reg, Y1) - conjugate_value(reg, Y2) - lin
    return out if batch else float(out[0])


def check_gradient(reg: Regularizer, y, eps: float = 1e-6) -> float:
    """Max relative error between central differences of ``h*`` and ``Q_h``."""
    y = _vector(y)
    q = choice_map(reg, y)
    fd = np.empty_like(y)
    for i in range(y.size):
        e = np.zeros_like(y)
        e[i] = eps
        hi, lo = y + e, y - e
        # divide by the representable step so linear conjugates give exact slopes
        fd[i] = (conjugate_value(reg, hi) - conjugate_value(reg, lo)) / (hi[i] - lo[i])
    return float(np.abs(fd - q).max() / max(1.0, np.abs(q).max()))


def min_enclosing_ball(points, eps: float = MEB_EPS, max_iter: int = MEB_MAX_ITER) -> Ball:
    """Badoiu-Clarkson core-set iteration for the smallest enclosing ball.

    Runs ``min(ceil(1/eps^2), max_iter)`` steps and returns the best iterate;
    the radius is the exact farthest distance from the returned center.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.size == 0:
        raise InvalidInputError("point list is empty")
    if not np.all(np.isfinite(P)):
        raise InvalidInputError("points contain non-finite entries")
    iters = int(min(math.ceil(1.0 / eps**2), max_iter))
    center, _ = kernels.badoiu_clarkson(P, iters)
    radius = float(np.sqrt(((P - center) ** 2).sum(axis=1)).max())
    return Ball(center=np.asarray(center, dtype=float), radius=radius)


def minimal_depth_regularizer(body: ConvexBody) -> Regularizer:
    """Euclidean regularizer centered at the smallest enclosing ball of ``body``."""
    if body.kind == "l2_ball":
        return euclidean(body, body.center, h_min=0.0)
    V = body.vertices()
    if V is None:
        raise UnsupportedError("minimal-depth construction needs a vertex list")
    ball = min_enclosing_ball(V)
    # the iterates are convex combinations of the vertices, so h attains 0
    return euclidean(body, ball.center, h_min=0.0)


def depth(reg: Regularizer) -> float:
    return reg.depth
