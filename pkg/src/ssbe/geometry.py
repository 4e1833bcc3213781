"""Boundary charts: rotated/translated graph patches of the domain boundary.

A chart describes one boundary patch as the graph ``x_d = gamma(x')`` in a
local frame ``X_r = O x + B``.  Points of the patch are parameterised by
``x'`` in the cube ``[-kappa, kappa]^(d-1)``; the ambient point is
``O^T ((x', gamma(x')) - B)``.

Tangential derivatives of a trace ``v(chart_point(x'))`` follow from the chain
rule: ``d/dx'_a = grad v . O^T (e_a + d_a gamma e_d)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .diffnet import Jet


class OutOfChart(ValueError):
    pass


class DomainKind(str, Enum):
    DISK2D = "disk2d"
    BOX = "box"


@dataclass(frozen=True)
class Domain:
    """Either the unit disk or the box ``[-half_width, half_width]^dim``."""
    kind: DomainKind
    dim: int = 2
    half_width: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", DomainKind(self.kind))
        if self.kind is DomainKind.DISK2D and self.dim != 2:
            raise ValueError("the disk domain is two-dimensional")
        if self.dim < 2:
            raise ValueError("domain dimension must be at least 2")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")

    @classmethod
    def disk(cls) -> "Domain":
        return cls(DomainKind.DISK2D, 2, 1.0)

    @classmethod
    def box(cls, dim: int, half_width: float = 1.0) -> "Domain":
        return cls(DomainKind.BOX, int(dim), float(half_width))

    @property
    def volume(self) -> float:
        if self.kind is DomainKind.DISK2D:
            return np.pi
        return (2.0 * self.half_width) ** self.dim

    @property
    def boundary_measure(self) -> float:
        if self.kind is DomainKind.DISK2D:
            return 2.0 * np.pi
        return 2 * self.dim * (2.0 * self.half_width) ** (self.dim - 1)

    def boundary_residual(self, x: np.ndarray) -> np.ndarray:
        """Zero exactly on the boundary: ``|x|^2 - 1`` or ``max|x_i| - h``."""
        x = np.atleast_2d(x)
        if self.kind is DomainKind.DISK2D:
            return np.sum(x * x, axis=1) - 1.0
        return np.max(np.abs(x), axis=1) - self.half_width

    def contains(self, x: np.ndarray, strict: bool = True) -> np.ndarray:
        r = self.boundary_residual(x)
        return r < 0 if strict else r <= 0


@dataclass(frozen=True)
class Chart:
    frame: np.ndarray
    offset: np.ndarray
    gamma: Callable[[np.ndarray], np.ndarray]
    gamma_grad: Callable[[np.ndarray], np.ndarray]
    kappa: float
    metric_weight: bool = False
    name: str = ""

    @property
    def dim(self) -> int:
        return self.frame.shape[0]

    def _params(self, xp) -> tuple[np.ndarray, bool]:
        xp = np.asarray(xp, dtype=float)
        single = xp.ndim <= 1
        P = xp.reshape(1, -1) if single else xp
        if P.shape[1] != self.dim - 1:
            raise ValueError(f"chart parameters must have {self.dim - 1} components")
        if np.any(np.abs(P) > self.kappa * (1 + 1e-12)):
            raise OutOfChart(f"chart parameter outside [-{self.kappa}, {self.kappa}]")
        return P, single

    def point(self, xp) -> np.ndarray:
        P, single = self._params(xp)
        local = np.column_stack([P, self.gamma(P)]) - self.offset
        X = local @ self.frame  # rows are O^T applied to each local vector
        return X[0] if single else X

    def tangent_vectors(self, xp) -> np.ndarray:
        """d(point)/dx'_a for each a, shape ``(n, d-1, d)``."""
        P, single = self._params(xp)
        d = self.dim
        dg = self.gamma_grad(P).reshape(len(P), d - 1)
        local = np.zeros((len(P), d - 1, d))
        local[:, :, :d - 1] = np.eye(d - 1)
        local[:, :, d - 1] = dg
        T = local @ self.frame
        return T[0] if single else T

    def metric_factor(self, xp) -> np.ndarray:
        """sqrt(1 + |grad gamma|^2), or ones when the chart is unweighted."""
        P, single = self._params(xp)
        if self.metric_weight:
            dg = self.gamma_grad(P).reshape(len(P), -1)
            w = np.sqrt(1.0 + np.sum(dg * dg, axis=1))
        else:
            w = np.ones(len(P))
        return w[0] if single else w


@dataclass
class ChartSet:
    charts: list[Chart]
    domain: Domain | None = None
    covers_boundary: bool = field(default=False)

    def __len__(self):
        return len(self.charts)

    def __iter__(self):
        return iter(self.charts)

    def __getitem__(self, i):
        return self.charts[i]


def chart_point(chart: Chart, xp) -> np.ndarray:
    return chart.point(xp)


def tangential_derivative(chart: Chart, jet: Jet, alpha: int, xp=None) -> np.ndarray | float:
    """Derivative of the trace ``v o chart`` along chart parameter ``alpha``.

    ``alpha`` is 1-based.  ``jet.gradient`` must be evaluated at
    ``chart.point(xp)``; only its first ``d`` (spatial) entries are used, so
    a space-time jet works unchanged.  ``xp`` is needed whenever the graph
    function is not flat; it defaults to the origin of the chart.
    """
    d = chart.dim
    if not 1 <= alpha <= d - 1:
        raise ValueError(f"alpha must lie in 1..{d - 1}, got {alpha}")
    g = np.asarray(jet.gradient, dtype=float)
    single = g.ndim == 1
    G = g.reshape(1, -1)[:, :d] if single else g[:, :d]
    if xp is None:
        xp = np.zeros((len(G), d - 1))
    T = np.asarray(chart.tangent_vectors(np.asarray(xp, dtype=float).reshape(len(G), d - 1)))
    out = np.einsum("nk,nk->n", G, T[:, alpha - 1, :])
    return float(out[0]) if single else out


def _disk_gamma(sign: float):
    def gamma(P):
        return sign * np.sqrt(1.0 - P[:, 0] ** 2)

    def grad(P):
        return (-sign * P[:, 0] / np.sqrt(1.0 - P[:, 0] ** 2))[:, None]

    return gamma, grad


def _flat_gamma(height: float):
    def gamma(P):
        return np.full(len(P), height)

    def grad(P):
        return np.zeros_like(P)

    return gamma, grad


def _face_frame(d: int, axis: int) -> np.ndarray:
    """Signed permutation with det +1 that moves ``axis`` to the last slot."""
    order = [j for j in range(d) if j != axis] + [axis]
    O = np.zeros((d, d))
    for row, col in enumerate(order):
        O[row, col] = 1.0
    if np.linalg.det(O) < 0:
        O[0] *= -1.0
    return O


def make_charts(domain: Domain, metric_weight: bool | None = None) -> ChartSet:
    """Built-in chart sets.

    Disk: four graph charts (top, right, bottom, left) over quarter arcs,
    kappa = sqrt(2)/2.  Box: one flat chart per face ``x_i = +-h``.
    ``metric_weight`` defaults to True on the disk and False (trivially 1)
    on boxes.
    """
    if not isinstance(domain, Domain):
        raise ValueError(f"unsupported domain {domain!r}")
    charts = []
    if domain.kind is DomainKind.DISK2D:
        weighted = True if metric_weight is None else metric_weight
        kappa = np.sqrt(2.0) / 2.0
        # (x', x_d) = (x, y) for the horizontal arcs, (-y, x) for the vertical ones
        rot = np.array([[0.0, -1.0], [1.0, 0.0]])
        spec = [("top", np.eye(2), 1.0), ("right", rot, 1.0),
                ("bottom", np.eye(2), -1.0), ("left", rot, -1.0)]
        for name, frame, sign in spec:
            g, dg = _disk_gamma(sign)
            charts.append(Chart(frame, np.zeros(2), g, dg, kappa, weighted, name))
    elif domain.kind is DomainKind.BOX:
        d, h = domain.dim, domain.half_width
        weighted = False if metric_weight is None else metric_weight
        for axis in range(d):
            O = _face_frame(d, axis)
            for sign in (-1.0, 1.0):
                g, dg = _flat_gamma(sign * h)
                name = f"x{axis + 1}={'+' if sign > 0 else '-'}{h:g}"
                charts.append(Chart(O, np.zeros(d), g, dg, h, weighted, name))
    else:
        raise ValueError(f"unsupported domain kind {domain.kind}")
    return ChartSet(charts, domain, covers_boundary=True)


def boundary_coverage(chart_set: ChartSet, points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """For each boundary point, whether some chart image contains it within ``tol``."""
    points = np.atleast_2d(points)
    covered = np.zeros(len(points), dtype=bool)
    for chart in chart_set:
        local = points @ chart.frame.T + chart.offset
        P = local[:, :-1]
        inside = np.all(np.abs(P) <= chart.kappa + tol, axis=1)
        if not inside.any():
            continue
        Pc = np.clip(P[inside], -chart.kappa, chart.kappa)
        height = chart.gamma(Pc)
        covered[np.flatnonzero(inside)[np.abs(local[inside, -1] - height) <= tol]] = True
    return covered
