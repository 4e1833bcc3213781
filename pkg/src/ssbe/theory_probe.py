"""Numerical probes of the generalization analysis for two-layer ReLU^3/6 networks.

Two independent experiments live here:

* ``empirical_rademacher`` estimates the Rademacher complexity of the residual
  class F_Q and the boundary classes G_Q / DG_Q.  Every member is a sum of
  neurons, and each neuron feature phi(w, x) is positively homogeneous of
  degree 3 in ``w``.  The supremum over ``{path norm < Q}`` of
  ``(1/n) sum_i tau_i f(x_i)`` therefore equals

      Q * max_{|u| = 1} |(1/n) sum_i tau_i phi(u, x_i)|,

  a search over the unit sphere only.  The search (random directions, then
  Nelder-Mead from the best few) can miss the true maximum but never exceeds
  it, so the returned number is a LOWER estimate of the complexity.  Comparing
  it with the analytical UPPER bound is a consistency check, not a measurement
  of the true complexity.

* ``approximation_probe`` samples theta = {a_k / m, w_k} i.i.d. from a discrete
  distribution rho, so the target pair (f, g) is an exact finite sum and the
  quadratic risk of the m-neuron average can be measured directly.

Operator coefficients are constant: A = c_A I, b_hat, c.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import minimize

from .diffnet import Activation, activation_derivs
from .geometry import Chart, ChartSet, Domain, make_charts
from .sampling import sample_interior


class FunctionClass(str, Enum):
    F_Q = "F_Q"
    G_Q = "G_Q"
    DG_Q = "DG_Q"


def _sigma(z, order):
    return activation_derivs(Activation.RELU3_SIXTH, z, order=order)


@dataclass(frozen=True)
class TwoLayerParams:
    """x -> sum_k a_k sigma(w_k . x) with sigma(z) = max(z, 0)^3 / 6."""
    a: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        w = np.asarray(self.w, dtype=float)
        if w.ndim == 1:
            w = w[None, :]
        if a.ndim != 1 or len(a) < 1 or w.shape[0] != len(a):
            raise ValueError(f"need m >= 1 neurons with matching shapes, got a{a.shape}, w{w.shape}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(w))):
            raise ValueError("parameters must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "w", w)

    @property
    def m(self) -> int:
        return len(self.a)

    def __call__(self, x) -> np.ndarray:
        X = np.atleast_2d(np.asarray(x, dtype=float))
        return _sigma(X @ self.w.T, 0)[0] @ self.a

    def concat(self, other: "TwoLayerParams") -> "TwoLayerParams":
        return TwoLayerParams(np.concatenate([self.a, other.a]), np.vstack([self.w, other.w]))


def path_norm(params: TwoLayerParams) -> float:
    return float(np.sum(np.abs(params.a) * np.linalg.norm(params.w, axis=1) ** 3))


# --- neuron features --------------------------------------------------------

@dataclass(frozen=True)
class ConstantOperator:
    """Constant coefficients A = a_scale * I, b_hat, c of the residual features."""
    a_scale: float = 1.0
    b_hat: tuple = ()
    c: float = 1.0

    def b_vector(self, d: int) -> np.ndarray:
        if len(self.b_hat) == 0:
            return np.zeros(d)
        b = np.asarray(self.b_hat, dtype=float)
        if b.shape != (d,):
            raise ValueError(f"b_hat must have {d} entries")
        return b

    def bound(self, d: int) -> float:
        """M: the largest coefficient magnitude."""
        return float(max(abs(self.a_scale), np.max(np.abs(self.b_vector(d)), initial=0.0), abs(self.c)))

    @classmethod
    def uniform(cls, M: float, d: int) -> "ConstantOperator":
        return cls(M, tuple([M] * d), M)


def residual_features(W: np.ndarray, X: np.ndarray, op: ConstantOperator) -> np.ndarray:
    """f-feature of each neuron at each point, shape ``(k, n)``.

    w^T A w sigma''(w.x) + b_hat.w sigma'(w.x) + c sigma(w.x)
    """
    W = np.atleast_2d(W)
    Z = W @ X.T
    s0, s1, s2, _ = _sigma(Z, 2)
    quad = op.a_scale * np.sum(W * W, axis=1)[:, None]
    lin = (W @ op.b_vector(W.shape[1]))[:, None]
    return quad * s2 + lin * s1 + op.c * s0


def trace_features(W: np.ndarray, Xb: np.ndarray) -> np.ndarray:
    return _sigma(np.atleast_2d(W) @ Xb.T, 0)[0]


def tangential_features(W: np.ndarray, Xb: np.ndarray, T: np.ndarray) -> np.ndarray:
    """d/dx'_a of sigma(w . x(x')), shape ``(k, d-1, n)``; ``T`` is ``(n, d-1, d)``."""
    W = np.atleast_2d(W)
    s1 = _sigma(W @ Xb.T, 1)[1]
    return np.einsum("nad,kd->kan", T, W) * s1[:, None, :]


# --- Rademacher probe -------------------------------------------------------

def sphere_chart(d: int) -> Chart:
    """Upper cap of the unit sphere as a graph over ``[-kappa, kappa]^(d-1)``.

    kappa = 1/sqrt(d) keeps the cube inside the unit ball; for d = 2 this is
    the top chart of the disk (kappa = sqrt(2)/2, slope bound 1).
    """
    if d < 2:
        raise ValueError("boundary classes need d >= 2")

    def gamma(P):
        return np.sqrt(1.0 - np.sum(P * P, axis=1))

    def grad(P):
        return -P / gamma(P)[:, None]

    return Chart(np.eye(d), np.zeros(d), gamma, grad, 1.0 / np.sqrt(d), False, "sphere_cap")


def chart_slope_bound(chart: Chart, n_probe: int = 4096, seed: int = 0) -> float:
    """max |grad gamma| over the parameter cube: corners plus random probes."""
    k = chart.dim - 1
    corners = np.array(np.meshgrid(*([[-1.0, 1.0]] * k), indexing="ij")).reshape(k, -1).T
    rng = np.random.default_rng(seed)
    P = chart.kappa * np.vstack([corners, rng.uniform(-1, 1, size=(n_probe, k))])
    return float(np.max(np.linalg.norm(chart.gamma_grad(P).reshape(len(P), k), axis=1)))


def rademacher_bound(cls: FunctionClass | str, Q: float, n: int, d: int, M: float = 1.0,
                     slope_bound: float = 1.0) -> float:
    cls = FunctionClass(cls)
    if cls is FunctionClass.F_Q:
        return 4.0 * M * Q * d * d / np.sqrt(n)
    if cls is FunctionClass.G_Q:
        return Q / (3.0 * np.sqrt(n))
    return (slope_bound + 1.0) * Q / np.sqrt(n)


@dataclass
class RademacherEstimate:
    cls: FunctionClass
    Q: float
    n: int
    d: int
    estimate: float
    bound: float
    per_trial: np.ndarray = field(repr=False)


def _unit(U):
    U = np.atleast_2d(U)
    nrm = np.linalg.norm(U, axis=1, keepdims=True)
    return U / np.where(nrm > 0, nrm, 1.0)


def _probe_points(cls: FunctionClass, n: int, d: int, rng, chart: Chart):
    if cls is FunctionClass.F_Q:
        # uniform in the unit ball
        g = rng.standard_normal((n, d))
        r = rng.random(n) ** (1.0 / d)
        return _unit(g) * r[:, None], None
    xp = rng.uniform(-chart.kappa, chart.kappa, size=(n, d - 1))
    return chart.point(xp), chart.tangent_vectors(xp).reshape(n, d - 1, d)


def empirical_rademacher(cls: FunctionClass | str, Q: float, n: int, d: int, trials: int = 20,
                         restarts: int = 4, seed: int = 0, M: float = 1.0,
                         n_candidates: int = 256) -> RademacherEstimate:
    """Monte-Carlo lower estimate of Rad(class) on one random sample of size ``n``.

    F_Q uses points uniform in the unit ball and A = M I, b_hat = M 1, c = M.
    G_Q and DG_Q use points of ``sphere_chart(d)``; DG_Q differentiates along
    the first chart direction.
    """
    cls = FunctionClass(cls)
    if n < 1 or trials < 1 or restarts < 1:
        raise ValueError("n, trials and restarts must be at least 1")
    if Q < 0:
        raise ValueError("Q must be nonnegative")
    chart = sphere_chart(d) if cls is not FunctionClass.F_Q else None
    slope = chart_slope_bound(chart) if chart is not None else 1.0
    bound = rademacher_bound(cls, Q, n, d, M, slope)
    if Q == 0:
        return RademacherEstimate(cls, 0.0, n, d, 0.0, bound, np.zeros(trials))

    seeds = np.random.SeedSequence(seed).spawn(trials + 1)
    X, T = _probe_points(cls, n, d, np.random.default_rng(seeds[0]), chart)
    op = ConstantOperator.uniform(M, d)

    def features(U):
        if cls is FunctionClass.F_Q:
            return residual_features(U, X, op)
        if cls is FunctionClass.G_Q:
            return trace_features(U, X)
        return tangential_features(U, X, T)[:, 0, :]

    out = np.empty(trials)
    for t in range(trials):
        rng = np.random.default_rng(seeds[t + 1])
        tau = rng.choice([-1.0, 1.0], size=n)

        def score(U):
            return np.abs(features(_unit(U)) @ tau) / n

        cand = _unit(rng.standard_normal((max(n_candidates, restarts), d)))
        s = score(cand)
        best = float(np.max(s))
        for idx in np.argsort(s)[-restarts:]:
            res = minimize(lambda u: -score(u)[0], cand[idx], method="Nelder-Mead",
                           options={"xatol": 1e-6, "fatol": 1e-12, "maxiter": 200 * d})
            best = max(best, -float(res.fun))
        out[t] = Q * best
    return RademacherEstimate(cls, float(Q), n, d, float(out.mean()), bound, out)


def loglog_slope(ns, estimates) -> float:
    """Least-squares slope of log(estimate) against log(n)."""
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(estimates, float)), 1)[0])


# --- approximation probe ----------------------------------------------------

@dataclass(frozen=True)
class BarronPairSpec:
    """A discrete distribution rho over (a, w) atoms and the problem around it.

    ``probs[j]`` is the mass of atom ``(a[j], w[j])``.  The pair (f, g) is the
    rho-expectation of the neuron features, so it is known exactly.
    """
    a: np.ndarray
    w: np.ndarray
    probs: np.ndarray
    operator: ConstantOperator = ConstantOperator()
    domain: Domain = field(default_factory=Domain.disk)
    chart_set: ChartSet | None = None

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        w = np.atleast_2d(np.asarray(self.w, dtype=float))
        p = np.atleast_1d(np.asarray(self.probs, dtype=float))
        if w.shape[0] != len(a) or len(p) != len(a):
            raise ValueError("a, w and probs must describe the same atoms")
        if w.shape[1] != self.domain.dim:
            raise ValueError("atom dimension does not match the domain")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(w))):
            raise ValueError("atoms must be finite")
        if np.any(p < 0) or not np.isclose(p.sum(), 1.0):
            raise ValueError("probs must be a probability vector")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "probs", p / p.sum())
        if self.chart_set is None:
            object.__setattr__(self, "chart_set", make_charts(self.domain))

    @property
    def d(self) -> int:
        return self.domain.dim

    def barron_norm(self) -> float:
        """(E_rho a^2 |w|^6)^(1/2) for this rho: an upper bound on the infimum norm."""
        return float(np.sqrt(np.dot(self.probs, self.a ** 2 * np.linalg.norm(self.w, axis=1) ** 6)))

    def mean_path_norm(self) -> float:
        return float(np.dot(self.probs, np.abs(self.a) * np.linalg.norm(self.w, axis=1) ** 3))

    def slope_bound(self) -> float:
        return max(chart_slope_bound(c) for c in self.chart_set)

    def risk_bound(self, m: int) -> float:
        """(4M + l d (Mtilde + 1)) / m * ||(f, g)||_B^2."""
        l, d = len(self.chart_set), self.d
        M = self.operator.bound(d)
        return (4.0 * M + l * d * (self.slope_bound() + 1.0)) / m * self.barron_norm() ** 2


@dataclass
class ApproximationReport:
    m: int
    mean_risk: float
    std_error: float
    variance_reference: float
    theorem_bound: float
    barron_norm: float
    path_norm_event_fraction: float
    risks: np.ndarray = field(repr=False)


class _Features:
    """Atom features on fixed Monte-Carlo nodes; risk terms are weighted means."""

    def __init__(self, spec: BarronPairSpec, n_mc: int, seed: int):
        ss = np.random.SeedSequence(seed).spawn(1 + len(spec.chart_set))
        X = sample_interior(spec.domain, n_mc, int(ss[0].generate_state(1)[0]))
        blocks = [residual_features(spec.w, X, spec.operator) / np.sqrt(n_mc)]
        for r, chart in enumerate(spec.chart_set):
            rng = np.random.default_rng(ss[r + 1])
            xp = rng.uniform(-chart.kappa, chart.kappa, size=(n_mc, chart.dim - 1))
            Xb = chart.point(xp)
            T = chart.tangent_vectors(xp).reshape(n_mc, chart.dim - 1, chart.dim)
            blocks.append(trace_features(spec.w, Xb) / np.sqrt(n_mc))
            D = tangential_features(spec.w, Xb, T)
            blocks.append(D.reshape(len(spec.w), -1) / np.sqrt(n_mc))
        # rows: atoms; columns: every scaled quadrature node of every term
        self.Phi = spec.a[:, None] * np.concatenate(blocks, axis=1)
        self.target = spec.probs @ self.Phi

    def risk(self, weights: np.ndarray) -> float:
        e = weights @ self.Phi - self.target
        return float(np.dot(e, e))

    def variance(self, probs: np.ndarray) -> float:
        """Exact E_rho |phi - E phi|^2 summed over nodes."""
        second = probs @ (self.Phi ** 2)
        return float(np.sum(second - self.target ** 2))


def approximation_probe(spec: BarronPairSpec, m: int, n_mc: int = 2000, seed: int = 0,
                        n_draws: int = 500) -> ApproximationReport:
    """Mean quadratic risk of m-neuron averages drawn from rho.

    The risk sums the interior mean of (f_theta - f)^2 and, per chart, the
    parameter-cube mean of (g_theta - g)^2 plus the squared tangential
    derivative mismatch.  With discrete rho the neuron counts are multinomial,
    and E risk = variance_reference exactly (up to the shared quadrature).
    """
    if m < 1 or n_draws < 1:
        raise ValueError("m and n_draws must be at least 1")
    norm = spec.barron_norm()
    if norm == 0.0:
        raise ValueError("degenerate rho: the pair has zero Barron norm")
    feats = _Features(spec, n_mc, seed)
    rng = np.random.default_rng(np.random.SeedSequence([seed, m]))
    counts = rng.multinomial(m, spec.probs, size=n_draws)
    pn_atoms = np.abs(spec.a) * np.linalg.norm(spec.w, axis=1) ** 3
    risks = np.array([feats.risk(c / m) for c in counts])
    path_norms = counts @ pn_atoms / m
    return ApproximationReport(
        m=m,
        mean_risk=float(risks.mean()),
        std_error=float(risks.std(ddof=1) / np.sqrt(n_draws)) if n_draws > 1 else float("nan"),
        variance_reference=feats.variance(spec.probs) / m,
        theorem_bound=spec.risk_bound(m),
        barron_norm=norm,
        path_norm_event_fraction=float(np.mean(path_norms <= 2.0 * norm)),
        risks=risks,
    )


def random_barron_spec(n_atoms: int = 16, seed: int = 0, domain: Domain | None = None,
                       operator: ConstantOperator | None = None) -> BarronPairSpec:
    """Atoms with Gaussian a, w ~ N(0, I) and uniform masses."""
    domain = domain or Domain.disk()
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(n_atoms)
    w = rng.standard_normal((n_atoms, domain.dim))
    return BarronPairSpec(a, w, np.full(n_atoms, 1.0 / n_atoms),
                          operator or ConstantOperator(), domain)
