"""Benchmark PDE problems with closed-form exact solutions.

Operators have the constant-coefficient form

    L u = -alpha * lap(u) + beta * u + gamma * u**k      (+ u_t if parabolic)

Exact solutions are returned as hand-written jets (value, full input
gradient, spatial Laplacian) so they can serve as an oracle independent of
the network engine.

Nonlinear forcing.  For u = sin(pi x1) sin(pi x2) one has
lap(u) = -2 pi^2 u, hence f = 2 alpha pi^2 u + beta u + gamma u^k.

High-dimensional Poisson.  With s = mean(x), u = s^2 + sin(s):
du/dx_j = (2 s + cos s) / d and d2u/dx_j2 = (2 - sin s) / d^2, so
-lap(u) = (sin s - 2) / d.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .diffnet import Jet
from .geometry import Chart, ChartSet, Domain, make_charts

# (alpha, beta, gamma, k) rows of the nonlinear benchmark table
NONLINEAR_TABLE_ROWS = ((1.0, 0.0, 1.0, 3), (1.0, 0.0, 1.0, 5), (1.0, 1.0, 1.0, 3),
                        (1.0, 5.0, 5.0, 3), (0.1, 5.0, 5.0, 3))


class ProblemKind(str, Enum):
    POISSON_DISK = "poisson_disk"
    HEAT_SQUARE = "heat_square"
    NONLINEAR_ELLIPTIC = "nonlinear_elliptic"
    HIGH_DIM_POISSON = "high_dim_poisson"


@dataclass(frozen=True)
class Operator:
    alpha: float = 1.0
    beta: float = 0.0
    gamma: float = 0.0
    k: int = 1

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k_power must be a positive integer")


@dataclass(frozen=True)
class PdeProblem:
    kind: ProblemKind
    domain: Domain
    operator: Operator
    forcing: Callable[[np.ndarray], np.ndarray]
    exact_jet: Callable[[np.ndarray], Jet]
    boundary_tangential_fn: Callable[[Chart, np.ndarray, np.ndarray | None], np.ndarray]
    horizon: float | None = None
    initial_nu: Callable[[np.ndarray], np.ndarray] | None = None
    params: tuple = ()
    zero_boundary_data: bool = False

    @property
    def time_dependent(self) -> bool:
        return self.horizon is not None

    @property
    def space_dim(self) -> int:
        return self.domain.dim

    @property
    def input_dim(self) -> int:
        return self.domain.dim + (1 if self.time_dependent else 0)

    @property
    def lap_mask(self) -> np.ndarray:
        m = np.ones(self.input_dim, dtype=bool)
        if self.time_dependent:
            m[-1] = False
        return m

    def charts(self, metric_weight: bool | None = None) -> ChartSet:
        return make_charts(self.domain, metric_weight)

    def exact_value(self, X) -> np.ndarray:
        return self.exact_jet(X).value

    def boundary_g(self, X) -> np.ndarray:
        """Dirichlet data: exactly 0 where the problem says so, else the exact trace."""
        if self.zero_boundary_data:
            return np.zeros(len(np.atleast_2d(X)))
        return self.exact_jet(X).value

    def boundary_g_t(self, X) -> np.ndarray:
        if not self.time_dependent:
            raise ValueError("g_t is only defined for time-dependent problems")
        if self.zero_boundary_data:
            return np.zeros(len(np.atleast_2d(X)))
        return self.exact_jet(X).gradient[..., -1]

    def boundary_tangential(self, chart: Chart, xp, t=None) -> np.ndarray:
        """Closed-form derivatives of ``g o chart`` w.r.t. chart parameters, ``(n, d-1)``."""
        xp = np.asarray(xp, dtype=float).reshape(-1, chart.dim - 1)
        return self.boundary_tangential_fn(chart, xp, t)

    def lift(self, chart: Chart, xp, t=None) -> np.ndarray:
        """Ambient (space or space-time) inputs for chart parameters."""
        pts = np.atleast_2d(chart.point(np.asarray(xp, dtype=float).reshape(-1, chart.dim - 1)))
        if self.time_dependent:
            if t is None:
                raise ValueError("time values are required for a time-dependent problem")
            pts = np.column_stack([pts, np.broadcast_to(t, (len(pts),))])
        return pts


def apply_operator(problem: PdeProblem, jet: Jet, u_t=None, point=None):
    """``(u_t +) -alpha lap + beta u + gamma u^k`` for a jet (scalar or batched)."""
    op = problem.operator
    if problem.time_dependent and u_t is None:
        raise ValueError("u_t is required for a time-dependent problem")
    value = np.asarray(jet.value, dtype=float)
    out = -op.alpha * np.asarray(jet.laplacian, dtype=float) + op.beta * value
    if op.gamma != 0.0:
        out = out + op.gamma * value ** int(op.k)
    if problem.time_dependent:
        out = out + np.asarray(u_t, dtype=float)
    return float(out) if out.ndim == 0 else out


def residual(problem: PdeProblem, jet: Jet, X) -> np.ndarray:
    X = np.atleast_2d(X)
    u_t = np.asarray(jet.gradient)[..., -1] if problem.time_dependent else None
    return apply_operator(problem, jet, u_t) - problem.forcing(X)


def _zero_tangential(chart, xp, t):
    return np.zeros((len(xp), chart.dim - 1))


def _wrap_single(fn):
    def jet_fn(X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            j = fn(X[None, :])
            return Jet(float(j.value[0]), j.gradient[0], float(j.laplacian[0]))
        return fn(X)
    return jet_fn


def _poisson_disk() -> PdeProblem:
    def jet(X):
        r2 = np.sum(X * X, axis=1)
        return Jet(1.0 - r2, -2.0 * X, np.full(len(X), -4.0))

    return PdeProblem(ProblemKind.POISSON_DISK, Domain.disk(), Operator(1.0),
                      forcing=lambda X: np.full(len(np.atleast_2d(X)), 4.0),
                      exact_jet=_wrap_single(jet), boundary_tangential_fn=_zero_tangential,
                      zero_boundary_data=True)


def _heat_square(horizon: float = 1.0) -> PdeProblem:
    pi = np.pi

    def jet(X):
        x1, x2, t = X[:, 0], X[:, 1], X[:, 2]
        decay = np.exp(-2.0 * pi * pi * t)
        s1, s2 = np.sin(pi * x1), np.sin(pi * x2)
        c1, c2 = np.cos(pi * x1), np.cos(pi * x2)
        u = s1 * s2 * decay
        grad = np.column_stack([pi * c1 * s2 * decay, pi * s1 * c2 * decay, -2.0 * pi * pi * u])
        return Jet(u, grad, -2.0 * pi * pi * u)

    def nu(x):
        x = np.atleast_2d(x)
        return np.sin(pi * x[:, 0]) * np.sin(pi * x[:, 1])

    return PdeProblem(ProblemKind.HEAT_SQUARE, Domain.box(2, 1.0), Operator(1.0),
                      forcing=lambda X: np.zeros(len(np.atleast_2d(X))),
                      exact_jet=_wrap_single(jet), boundary_tangential_fn=_zero_tangential,
                      horizon=float(horizon), initial_nu=nu, zero_boundary_data=True)


def _nonlinear(alpha: float, beta: float, gamma: float, k: int) -> PdeProblem:
    pi = np.pi
    op = Operator(float(alpha), float(beta), float(gamma), int(k))

    def jet(X):
        s1, s2 = np.sin(pi * X[:, 0]), np.sin(pi * X[:, 1])
        c1, c2 = np.cos(pi * X[:, 0]), np.cos(pi * X[:, 1])
        u = s1 * s2
        return Jet(u, np.column_stack([pi * c1 * s2, pi * s1 * c2]), -2.0 * pi * pi * u)

    def forcing(X):
        X = np.atleast_2d(X)
        u = np.sin(pi * X[:, 0]) * np.sin(pi * X[:, 1])
        return 2.0 * op.alpha * pi * pi * u + op.beta * u + op.gamma * u ** op.k

    return PdeProblem(ProblemKind.NONLINEAR_ELLIPTIC, Domain.box(2, 1.0), op, forcing,
                      _wrap_single(jet), _zero_tangential, params=(alpha, beta, gamma, k),
                      zero_boundary_data=True)


def _high_dim(d: int) -> PdeProblem:
    if d < 2:
        raise ValueError("dimension must be at least 2")

    def jet(X):
        s = X.mean(axis=1)
        u = s * s + np.sin(s)
        dj = (2.0 * s + np.cos(s)) / d
        grad = np.repeat(dj[:, None], d, axis=1)
        return Jet(u, grad, (2.0 - np.sin(s)) / d)

    def forcing(X):
        s = np.atleast_2d(X).mean(axis=1)
        return (np.sin(s) - 2.0) / d

    def tangential(chart, xp, t):
        s = np.atleast_2d(chart.point(xp)).mean(axis=1)
        dj = (2.0 * s + np.cos(s)) / d
        T = np.asarray(chart.tangent_vectors(xp)).reshape(len(xp), d - 1, d)
        return dj[:, None] * T.sum(axis=2)

    return PdeProblem(ProblemKind.HIGH_DIM_POISSON, Domain.box(d, 1.0), Operator(1.0),
                      forcing, _wrap_single(jet), tangential, params=(d,))


def problem_factory(kind: ProblemKind | str, **params) -> PdeProblem:
    """Build a benchmark problem.

    ``nonlinear_elliptic`` takes ``alpha, beta, gamma, k``; ``high_dim_poisson``
    takes ``d``; ``heat_square`` accepts an optional ``horizon`` (default 1).
    """
    kind = ProblemKind(kind)
    if kind is ProblemKind.POISSON_DISK:
        return _poisson_disk()
    if kind is ProblemKind.HEAT_SQUARE:
        return _heat_square(params.get("horizon", 1.0))
    if kind is ProblemKind.NONLINEAR_ELLIPTIC:
        return _nonlinear(params.get("alpha", 1.0), params.get("beta", 0.0),
                          params.get("gamma", 1.0), params.get("k", 3))
    if kind is ProblemKind.HIGH_DIM_POISSON:
        return _high_dim(int(params.get("d", 10)))
    raise ValueError(f"unknown problem kind {kind}")
