"""Empirical PINN and SSBE losses with exact parameter gradients.

Both losses share the residual, initial and boundary-value terms:

    residual        mean_i (L u(x_i) - f(x_i))^2
    initial         mean_i (u(x_i, 0) - nu(x_i))^2              (parabolic)
    boundary_value  mean over all boundary samples of (u - g)^2

SSBE adds the tangential term, summed over charts and chart directions,

    boundary_tangential = sum_r (1/n_r) sum_i w_ri sum_a (D_a[u o chart_r] - D_a[g o chart_r])^2

where ``w_ri`` is the chart metric factor when the chart is weighted and 1
otherwise.  ``full_parabolic=True`` evaluates the boundary terms on the
product of chart parameters and ``samples.time_values`` and adds the
``mean (u_t - g_t)^2`` boundary term.

A model is either ``NetworkParams`` or any callable ``X -> Jet`` returning the
value, full input gradient and spatial Laplacian at a batch of inputs.  The
callable form is used to push exact solutions through the same code path.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum
from typing import Callable, Union

import numpy as np

from .diffnet import Jet, JetAdjoint, JetTape, NetworkParams
from .geometry import ChartSet
from .problems import PdeProblem
from .sampling import SampleSet

Model = Union[NetworkParams, Callable[[np.ndarray], Jet]]


class Method(str, Enum):
    PINN = "pinn"
    SSBE = "ssbe"


class EmptySampleSet(ValueError):
    pass


@dataclass(frozen=True)
class LossWeights:
    lambda_res: float = 1.0
    lambda_init: float = 1.0
    lambda_bdry_l2: float = 1.0
    lambda_bdry_h1: float = 1.0
    lambda_bdry_time: float = 1.0

    def __post_init__(self):
        for name, v in asdict(self).items():
            if not v >= 0:
                raise ValueError(f"{name} must be nonnegative, got {v}")

    @classmethod
    def analysis_preset(cls, chart_set: ChartSet) -> "LossWeights":
        """Weights under which ``total`` equals sum_r mean_r(value + tangential) + residual.

        With equally many samples per chart the pooled boundary mean is
        ``(1/l) sum_r mean_r``, so the value weight is the chart count ``l``.
        """
        return cls(1.0, 1.0, float(len(chart_set)), 1.0, 1.0)


@dataclass
class LossReport:
    residual: float
    boundary_value: float
    boundary_tangential: float
    initial: float
    boundary_time: float
    total: float

    def as_dict(self) -> dict:
        return asdict(self)


class ExactField:
    """Model seam returning ``scale`` times the exact solution's jet."""

    def __init__(self, problem: PdeProblem, scale: float = 1.0):
        self.problem = problem
        self.scale = float(scale)

    def __call__(self, X) -> Jet:
        j = self.problem.exact_jet(np.atleast_2d(X))
        s = self.scale
        return Jet(s * np.asarray(j.value), s * np.asarray(j.gradient), s * np.asarray(j.laplacian))


class PreparedSamples:
    """Concatenated network inputs and the slices that locate each block."""

    def __init__(self, problem: PdeProblem, samples: SampleSet, chart_set: ChartSet | None,
                 full_parabolic: bool):
        if samples.interior is None or len(samples.interior) == 0:
            raise EmptySampleSet("the interior sample set is empty")
        if chart_set is None:
            raise ValueError("a chart set is required")
        if len(samples.per_chart) != len(chart_set):
            raise ValueError("samples do not match the chart set")
        if problem.time_dependent:
            if samples.initial is None or samples.chart_times is None:
                raise ValueError("time-dependent problems need initial and boundary time samples")
            if full_parabolic and samples.time_values is None:
                raise ValueError("full_parabolic needs samples.time_values")
        self.problem = problem
        self.full_parabolic = bool(full_parabolic)
        D = problem.input_dim
        interior = np.asarray(samples.interior, dtype=float)
        if interior.shape[1] != D:
            raise ValueError(f"interior samples have dimension {interior.shape[1]}, expected {D}")
        blocks = [interior]
        pos = len(interior)
        self.interior = slice(0, pos)
        self.charts = []
        for r, chart in enumerate(chart_set):
            xp = np.asarray(samples.per_chart[r], dtype=float).reshape(-1, chart.dim - 1)
            t = None
            if problem.time_dependent:
                if full_parabolic:
                    tv = np.asarray(samples.time_values, dtype=float)
                    xp = np.repeat(xp, len(tv), axis=0)
                    t = np.tile(tv, len(samples.per_chart[r]))
                else:
                    t = np.asarray(samples.chart_times[r], dtype=float)
            X = problem.lift(chart, xp, t)
            g = problem.boundary_g(X)
            sl = slice(pos, pos + len(X))
            self.charts.append((chart, sl, xp, t, g))
            blocks.append(X)
            pos += len(X)
        self.boundary = slice(self.interior.stop, pos)
        self.initial = None
        if problem.time_dependent:
            x0 = np.asarray(samples.initial, dtype=float)
            blocks.append(np.column_stack([x0, np.zeros(len(x0))]))
            self.initial = slice(pos, pos + len(x0))
            self.nu = problem.initial_nu(x0)
            pos += len(x0)
        self.X = np.concatenate(blocks, axis=0)
        self.forcing = problem.forcing(interior)
        self.g = np.concatenate([c[4] for c in self.charts])
        self.g_t = problem.boundary_g_t(self.X[self.boundary]) if problem.time_dependent else None
        self._tangent_cache = [
            (chart.tangent_vectors(xp).reshape(len(xp), chart.dim - 1, chart.dim),
             np.asarray(chart.metric_factor(xp)).reshape(len(xp)),
             problem.boundary_tangential(chart, xp, t))
            for chart, sl, xp, t, g in self.charts]


def prepare(problem: PdeProblem, samples: SampleSet, chart_set: ChartSet | None = None,
            full_parabolic: bool = False) -> PreparedSamples:
    """Precompute inputs, data and chart tangents; reusable across training steps."""
    if chart_set is None:
        chart_set = problem.charts()
    return PreparedSamples(problem, samples, chart_set, full_parabolic)


def _evaluate(model: Model, X: np.ndarray, mask: np.ndarray, want_tape: bool):
    if isinstance(model, NetworkParams):
        tape = JetTape(model, X, mask)
        return tape.jet, (tape if want_tape else None)
    if want_tape:
        raise TypeError("parameter gradients need a NetworkParams model")
    return model(X), None


def _loss(model: Model, problem: PdeProblem, samples: SampleSet, weights: LossWeights,
          method: Method, chart_set: ChartSet | None, full_parabolic: bool, want_grad: bool):
    method = Method(method)
    if isinstance(samples, PreparedSamples):
        lay = samples
    else:
        lay = prepare(problem, samples, chart_set, full_parabolic)
    full_parabolic = lay.full_parabolic
    jet, tape = _evaluate(model, lay.X, problem.lap_mask, want_grad)
    u = np.asarray(jet.value)
    grad = np.asarray(jet.gradient)
    lap = np.asarray(jet.laplacian)
    op = problem.operator
    d = problem.space_dim
    n_all = len(lay.X)

    if want_grad:
        vbar = np.zeros(n_all)
        gbar = np.zeros((n_all, problem.input_dim))
        lbar = np.zeros(n_all)

    # residual
    si = lay.interior
    ui = u[si]
    Lu = -op.alpha * lap[si] + op.beta * ui
    if op.gamma != 0.0:
        Lu = Lu + op.gamma * ui ** op.k
    if problem.time_dependent:
        Lu = Lu + grad[si, -1]
    r = Lu - lay.forcing
    n_i = len(r)
    res_term = float(np.dot(r, r) / n_i)
    if want_grad:
        c = weights.lambda_res * 2.0 * r / n_i
        lbar[si] = -op.alpha * c
        dLdu = op.beta + (op.gamma * op.k * ui ** (op.k - 1) if op.gamma != 0.0 else 0.0)
        vbar[si] = c * dLdu
        if problem.time_dependent:
            gbar[si, -1] = c

    # boundary value, pooled over all boundary samples
    sb = lay.boundary
    e = u[sb] - lay.g
    n_b = len(e)
    bval_term = float(np.dot(e, e) / n_b)
    if want_grad:
        vbar[sb] += weights.lambda_bdry_l2 * 2.0 * e / n_b

    # tangential term, per-chart means summed over charts
    btan_term = 0.0
    if method is Method.SSBE:
        for (chart, sl, xp, t, g), (T, w, gtan) in zip(lay.charts, lay._tangent_cache):
            tau = np.einsum("nak,nk->na", T, grad[sl, :d]) - gtan
            n_r = len(tau)
            btan_term += float(np.sum(w * np.sum(tau * tau, axis=1)) / n_r)
            if want_grad:
                coef = weights.lambda_bdry_h1 * 2.0 * (w[:, None] * tau) / n_r
                gbar[sl, :d] += np.einsum("na,nak->nk", coef, T)

    init_term = 0.0
    btime_term = 0.0
    if problem.time_dependent:
        s0 = lay.initial
        e0 = u[s0] - lay.nu
        init_term = float(np.dot(e0, e0) / len(e0))
        if want_grad:
            vbar[s0] += weights.lambda_init * 2.0 * e0 / len(e0)
        if full_parabolic:
            et = grad[sb, -1] - lay.g_t
            btime_term = float(np.dot(et, et) / len(et))
            if want_grad:
                gbar[sb, -1] += weights.lambda_bdry_time * 2.0 * et / len(et)

    total = (weights.lambda_res * res_term + weights.lambda_init * init_term
             + weights.lambda_bdry_l2 * bval_term + weights.lambda_bdry_h1 * btan_term
             + weights.lambda_bdry_time * btime_term)
    report = LossReport(res_term, bval_term, btan_term, init_term, btime_term, float(total))
    if not want_grad:
        return report, None
    return report, tape.pullback(JetAdjoint(vbar, gbar, lbar))


def pinn_loss(model: Model, problem: PdeProblem, samples: SampleSet | PreparedSamples,
              weights: LossWeights = LossWeights(), chart_set: ChartSet | None = None,
              full_parabolic: bool = False) -> LossReport:
    return _loss(model, problem, samples, weights, Method.PINN, chart_set, full_parabolic, False)[0]


def ssbe_loss(model: Model, problem: PdeProblem, samples: SampleSet | PreparedSamples,
              weights: LossWeights = LossWeights(), chart_set: ChartSet | None = None,
              full_parabolic: bool = False) -> LossReport:
    return _loss(model, problem, samples, weights, Method.SSBE, chart_set, full_parabolic, False)[0]


def loss_and_gradient(params: NetworkParams, problem: PdeProblem, samples: SampleSet | PreparedSamples,
                      method: Method | str, weights: LossWeights = LossWeights(),
                      chart_set: ChartSet | None = None, full_parabolic: bool = False):
    """One forward and one reverse sweep: ``(LossReport, flat gradient)``."""
    return _loss(params, problem, samples, weights, Method(method), chart_set, full_parabolic, True)


def loss_gradient(params: NetworkParams, problem: PdeProblem, samples: SampleSet | PreparedSamples,
                  method: Method | str, weights: LossWeights = LossWeights(),
                  chart_set: ChartSet | None = None, full_parabolic: bool = False) -> np.ndarray:
    return loss_and_gradient(params, problem, samples, method, weights, chart_set, full_parabolic)[1]
