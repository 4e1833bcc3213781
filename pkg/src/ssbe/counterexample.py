"""Harmonic perturbations that fool the L2 boundary penalty.

On the unit disk take u = 1 - r^2 (so -lap u = 4, u = 0 on the circle) and

    v_i(r, theta) = sin(i theta) r^i / i = Im(z^i) / i,   z = x1 + i x2.

Each v_i is harmonic, and

    ||v_i||^2_{L2(circle)} = pi / i^2
    ||grad v_i||^2_{L2(disk)} = pi / i
    ||v_i||^2_{L2(disk)}      = pi / ((2i + 2) i^2)

(the last one integrates r^(2i) against the polar Jacobian r; dropping the
Jacobian would give pi / ((2i + 1) i^2) instead).  Normalising v_i to unit H1
norm, u_i = u + v_i / ||v_i||_{H1} has zero PDE residual and a boundary
mismatch of order 1/i, yet ||u_i - u||_{H1} / ||u||_{H1} = 1 / ||u||_{H1} for
every i.

All norms here are computed by a fixed quadrature: the periodic trapezoid
rule in theta (uniform nodes) times 64-point Gauss-Legendre in r.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .diffnet import Jet

N_THETA = 10_000
N_RADIAL = 64


def perturbation_jet(i: int, point) -> Jet:
    """Value, Cartesian gradient and (exactly zero) Laplacian of v_i."""
    if i < 1:
        raise ValueError("i must be a positive integer")
    p = np.asarray(point, dtype=float)
    P = np.atleast_2d(p)
    z = P[:, 0] + 1j * P[:, 1]
    zi1 = z ** (i - 1)
    value = (zi1 * z).imag / i
    grad = np.column_stack([zi1.imag, zi1.real])
    lap = np.zeros(len(P))
    if p.ndim == 1:
        return Jet(float(value[0]), grad[0], 0.0)
    return Jet(value, grad, lap)


@dataclass(frozen=True)
class DiskQuadrature:
    points: np.ndarray
    weights: np.ndarray
    circle_points: np.ndarray
    circle_weights: np.ndarray


@lru_cache(maxsize=4)
def disk_quadrature(n_theta: int = N_THETA, n_radial: int = N_RADIAL) -> DiskQuadrature:
    th = 2.0 * np.pi * np.arange(n_theta) / n_theta
    w_th = 2.0 * np.pi / n_theta
    xg, wg = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * (xg + 1.0)
    w_r = 0.5 * wg * r  # Jacobian r
    R, TH = np.meshgrid(r, th, indexing="ij")
    pts = np.column_stack([(R * np.cos(TH)).ravel(), (R * np.sin(TH)).ravel()])
    w = (w_r[:, None] * w_th * np.ones_like(TH)).ravel()
    circle = np.column_stack([np.cos(th), np.sin(th)])
    return DiskQuadrature(pts, w, circle, np.full(n_theta, w_th))


def quadrature_norms(i: int, quad: DiskQuadrature | None = None) -> dict:
    """Squared norms of v_i computed by quadrature."""
    q = quad or disk_quadrature()
    vb = perturbation_jet(i, q.circle_points).value
    j = perturbation_jet(i, q.points)
    bdry = float(np.dot(q.circle_weights, vb * vb))
    dom = float(np.dot(q.weights, j.value * j.value))
    grad = float(np.dot(q.weights, np.sum(j.gradient ** 2, axis=1)))
    return {"bdry_l2_sq": bdry, "dom_l2_sq": dom, "grad_sq": grad, "h1_sq": dom + grad}


def analytic_norms(i: int) -> dict:
    """Closed-form boundary and gradient norms; the domain L2 part by quadrature."""
    if i < 1:
        raise ValueError("i must be a positive integer")
    dom = quadrature_norms(i)["dom_l2_sq"]
    grad = np.pi / i
    return {"bdry_l2_sq": np.pi / i ** 2, "dom_l2_sq": dom, "grad_sq": grad, "h1_sq": dom + grad}


def exact_solution_h1_sq(quad: DiskQuadrature | None = None) -> float:
    """||1 - r^2||^2_{H1(disk)} by quadrature (closed form 7 pi / 3)."""
    q = quad or disk_quadrature()
    X = q.points
    r2 = np.sum(X * X, axis=1)
    return float(np.dot(q.weights, (1.0 - r2) ** 2 + 4.0 * r2))


@dataclass
class FailureRow:
    i: int
    pinn_objective: float
    residual_part: float
    boundary_part: float
    relative_h1_error: float


def failure_demo(i_max: int, lam: float = 1.0) -> list[FailureRow]:
    """PINN objective and relative H1 error of u_i = u + v_i / ||v_i||_{H1}, i = 1..i_max.

    objective = (1/|disk|) ||-lap u_i - 4||^2 + (lam/|circle|) ||u_i||^2_{L2(circle)}
    """
    if i_max < 1:
        raise ValueError("i_max must be at least 1")
    q = disk_quadrature()
    area, perimeter = np.pi, 2.0 * np.pi
    u_h1_sq = exact_solution_h1_sq(q)
    rows = []
    for i in range(1, i_max + 1):
        norms = quadrature_norms(i, q)
        scale = 1.0 / np.sqrt(norms["h1_sq"])
        j = perturbation_jet(i, q.points)
        # -lap(u_i) - 4 = -(-4) - scale * lap(v_i) - 4
        res = 4.0 - scale * j.laplacian - 4.0
        residual_part = float(np.dot(q.weights, res * res)) / area
        ub = scale * perturbation_jet(i, q.circle_points).value  # u vanishes on the circle
        boundary_part = lam * float(np.dot(q.circle_weights, ub * ub)) / perimeter
        diff_sq = scale ** 2 * (np.dot(q.weights, j.value ** 2)
                                + np.dot(q.weights, np.sum(j.gradient ** 2, axis=1)))
        rows.append(FailureRow(i, residual_part + boundary_part, residual_part, boundary_part,
                               float(np.sqrt(diff_sq / u_h1_sq))))
    return rows


def failure_table_csv(rows: list[FailureRow]) -> str:
    lines = ["i,pinn_objective,relative_h1_error"]
    lines += [f"{r.i},{r.pinn_objective:.17g},{r.relative_h1_error:.17g}" for r in rows]
    return "\n".join(lines) + "\n"
