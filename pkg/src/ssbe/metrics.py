"""Relative L2 / H1 errors on deterministic quadrature grids."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .diffnet import Jet, NetworkParams, forward_jet
from .geometry import Domain, DomainKind
from .problems import PdeProblem


class GridKind(str, Enum):
    POLAR = "polar"
    TENSOR = "tensor"
    SPACE_TIME = "space_time"
    MONTE_CARLO = "monte_carlo"


class Norm(str, Enum):
    L2 = "L2"
    H1 = "H1"


@dataclass
class TestGrid:
    points: np.ndarray
    weights: np.ndarray
    kind: GridKind

    __test__ = False  # not a pytest class


def polar_grid(n_r: int = 200, n_theta: int = 200) -> TestGrid:
    """Midpoint rule in (r, theta) on the unit disk with Jacobian weights."""
    dr, dth = 1.0 / n_r, 2.0 * np.pi / n_theta
    r = (np.arange(n_r) + 0.5) * dr
    th = (np.arange(n_theta) + 0.5) * dth
    R, TH = np.meshgrid(r, th, indexing="ij")
    pts = np.column_stack([(R * np.cos(TH)).ravel(), (R * np.sin(TH)).ravel()])
    return TestGrid(pts, (R * dr * dth).ravel(), GridKind.POLAR)


def tensor_grid(dim: int, n: int = 50, half_width: float = 1.0) -> TestGrid:
    """Cell-midpoint grid on ``[-h, h]^dim``."""
    h = 2.0 * half_width / n
    axis = -half_width + (np.arange(n) + 0.5) * h
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    pts = np.column_stack([m.ravel() for m in mesh])
    return TestGrid(pts, np.full(len(pts), h ** dim), GridKind.TENSOR)


def space_time_grid(n_t: int = 20, n: int = 50, half_width: float = 1.0,
                    horizon: float = 1.0) -> TestGrid:
    """``n_t`` equally spaced times on ``[0, T]`` times an ``n x n`` midpoint grid."""
    spatial = tensor_grid(2, n, half_width)
    times = np.linspace(0.0, horizon, n_t)
    pts = np.concatenate([np.column_stack([spatial.points, np.full(len(spatial.points), t)])
                          for t in times])
    w = np.tile(spatial.weights * (horizon / n_t), n_t)
    return TestGrid(pts, w, GridKind.SPACE_TIME)


def monte_carlo_grid(domain: Domain, n: int, seed: int) -> TestGrid:
    rng = np.random.default_rng(seed)
    if domain.kind is DomainKind.DISK2D:
        u = rng.random((n, 2))
        r, th = np.sqrt(u[:, 0]), 2 * np.pi * u[:, 1]
        pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
    else:
        pts = rng.uniform(-domain.half_width, domain.half_width, size=(n, domain.dim))
    return TestGrid(pts, np.full(n, domain.volume / n), GridKind.MONTE_CARLO)


def default_grid(problem: PdeProblem, resolution: int | None = None, seed: int = 12345) -> TestGrid:
    """Polar 200x200 on the disk, 50^d tensor grids for d <= 3, Monte Carlo beyond."""
    dom = problem.domain
    if problem.time_dependent:
        return space_time_grid(20, resolution or 50, dom.half_width, problem.horizon)
    if dom.kind is DomainKind.DISK2D:
        n = resolution or 200
        return polar_grid(n, n)
    if dom.dim <= 3:
        return tensor_grid(dom.dim, resolution or 50, dom.half_width)
    return monte_carlo_grid(dom, resolution or 20000, seed)


def _model_jet(model, X: np.ndarray, problem: PdeProblem) -> Jet:
    if isinstance(model, NetworkParams):
        return forward_jet(model, X, np.zeros(problem.input_dim, dtype=bool))
    return model(X)


def error_fields(model, problem: PdeProblem, grid: TestGrid, chunk: int = 20000):
    """Pointwise ``(u_theta - u, spatial grad error, u, spatial grad u)`` on the grid."""
    d = problem.space_dim
    errs, gerrs, us, gus = [], [], [], []
    for start in range(0, len(grid.points), chunk):
        X = grid.points[start:start + chunk]
        jm = _model_jet(model, X, problem)
        je = problem.exact_jet(X)
        ue, ge = np.asarray(je.value), np.asarray(je.gradient)[:, :d]
        errs.append(np.asarray(jm.value) - ue)
        gerrs.append(np.asarray(jm.gradient)[:, :d] - ge)
        us.append(ue)
        gus.append(ge)
    return (np.concatenate(errs), np.concatenate(gerrs), np.concatenate(us), np.concatenate(gus))


def relative_error(model, problem: PdeProblem, grid: TestGrid, norm: Norm | str = Norm.L2) -> float:
    """Weighted discrete ``||u_theta - u|| / ||u||`` in L2 or full H1 (spatial gradient)."""
    norm = Norm(norm)
    e, ge, u, gu = error_fields(model, problem, grid)
    w = grid.weights
    num = np.dot(w, e * e)
    den = np.dot(w, u * u)
    if norm is Norm.H1:
        num += np.dot(w, np.sum(ge * ge, axis=1))
        den += np.dot(w, np.sum(gu * gu, axis=1))
    if den <= 0.0:
        raise ZeroDivisionError("exact solution has zero norm on this grid")
    return float(np.sqrt(num / den))
