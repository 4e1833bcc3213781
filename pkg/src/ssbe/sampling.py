"""Seeded training samples.

Every routine draws from numpy's PCG64 generator (``np.random.default_rng``),
whose output for a given 64-bit seed is fixed across platforms.  Sub-streams
for the different sample groups are derived with ``SeedSequence.spawn`` so
that changing one count does not shift the others.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import ChartSet, Domain, DomainKind


def sample_interior(domain: Domain, n: int, seed: int) -> np.ndarray:
    """Uniform points strictly inside the domain, shape ``(n, dim)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    if domain.kind is DomainKind.DISK2D:
        u = rng.random((n, 2))
        r = np.sqrt(u[:, 0])
        theta = 2.0 * np.pi * u[:, 1]
        pts = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
        # r = sqrt(U) with U < 1 keeps points off the circle; guard rounding anyway
        bad = np.sum(pts * pts, axis=1) >= 1.0
        pts[bad] *= 1.0 - 1e-12
        return pts
    h = domain.half_width
    pts = rng.uniform(-h, h, size=(n, domain.dim))
    return pts


def sample_charts(chart_set: ChartSet, n_per_chart: int, seed: int) -> list[np.ndarray]:
    """Uniform chart parameters on ``[-kappa, kappa]^(d-1)`` for every chart."""
    if n_per_chart < 1:
        raise ValueError("n_per_chart must be at least 1")
    streams = np.random.SeedSequence(seed).spawn(len(chart_set))
    out = []
    for chart, ss in zip(chart_set, streams):
        rng = np.random.default_rng(ss)
        out.append(rng.uniform(-chart.kappa, chart.kappa, size=(n_per_chart, chart.dim - 1)))
    return out


def sample_times(n: int, horizon: float, seed: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be at least 1")
    return np.random.default_rng(seed).uniform(0.0, horizon, size=n)


@dataclass
class SampleSet:
    """Training points for one run.

    For time-dependent problems ``interior`` holds space-time points
    ``(x, t)``, ``chart_times`` pairs one time with every chart parameter,
    ``initial`` holds spatial points at ``t = 0`` and ``time_values`` is the
    time grid used by the product-form boundary sums.
    """
    interior: np.ndarray
    per_chart: list[np.ndarray]
    seed: int
    initial: np.ndarray | None = None
    chart_times: list[np.ndarray] | None = None
    time_values: np.ndarray | None = None
    horizon: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n_boundary(self) -> int:
        return int(sum(len(p) for p in self.per_chart))


def make_samples(domain: Domain, chart_set: ChartSet, n_interior: int, n_per_chart: int,
                 seed: int, horizon: float | None = None, n_initial: int = 0,
                 n_time: int = 0) -> SampleSet:
    """Draw a complete sample set; space-time when ``horizon`` is given."""
    s_int, s_chart, s_init, s_time, s_ctime = (
        int(s.generate_state(1, dtype=np.uint64)[0])
        for s in np.random.SeedSequence(seed).spawn(5))
    interior = sample_interior(domain, n_interior, s_int)
    per_chart = sample_charts(chart_set, n_per_chart, s_chart)
    if horizon is None:
        return SampleSet(interior, per_chart, seed)
    t_int = sample_times(n_interior, horizon, s_time)
    interior = np.column_stack([interior, t_int])
    initial = sample_interior(domain, max(n_initial, 1), s_init) if n_initial else None
    ctimes = [sample_times(len(p), horizon, s) for p, s in
              zip(per_chart, np.random.SeedSequence(s_ctime).spawn(len(per_chart)))]
    tvals = np.sort(sample_times(n_time, horizon, s_ctime + 1)) if n_time else None
    return SampleSet(interior, per_chart, seed, initial=initial, chart_times=ctimes,
                     time_values=tvals, horizon=horizon)
