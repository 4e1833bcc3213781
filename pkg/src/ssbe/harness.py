"""Experiment orchestration: config parsing, full-batch training, reports.

A run is fully described by an ``ExperimentConfig`` (JSON on disk).  Both
methods of a ``method="both"`` run train on the very same ``SampleSet`` and
start from the same initial parameters.  Output files land in one directory
per config ``name``:

    report.json              config echo, seeds, curves, final errors, timings
    curve_<method>.csv       step, loss_total, loss_residual, loss_bdry_value,
                             loss_bdry_tangential, loss_initial, lr
    pointwise_<method>.csv   grid point, u_theta - u  (when write_pointwise)
    checkpoint_<method>.bin  see ``save_checkpoint``
"""
from __future__ import annotations

import csv
import errno
import json
import os
import struct
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .diffnet import Activation, NetworkParams, init_params
from .losses import (LossReport, LossWeights, Method, loss_and_gradient, pinn_loss, prepare,
                     ssbe_loss)
from .metrics import Norm, TestGrid, default_grid, error_fields, relative_error
from .optimizer import AdamState, LrSchedule, adam_step, lr_at
from .problems import PdeProblem, ProblemKind, problem_factory
from .sampling import make_samples

OUTPUT_ROOT_ENV = "SSBE_OUTPUT_ROOT"
LOG_EVERY = 100
CURVE_COLUMNS = ("step", "loss_total", "loss_residual", "loss_bdry_value",
                 "loss_bdry_tangential", "loss_initial", "lr")


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""


class TrainingDiverged(RuntimeError):
    def __init__(self, method: str, step: int, term: str, value: float):
        super().__init__(f"{method}: non-finite loss at step {step} (term {term!r} = {value})")
        self.method, self.step, self.term, self.value = method, step, term, value


@dataclass
class ExperimentConfig:
    name: str = "run"
    problem: str = "poisson_disk"
    problem_params: dict = field(default_factory=dict)
    method: str = "both"
    layer_sizes: list | None = None
    activation: str = "tanh"
    n_interior: int = 2500
    n_boundary_per_chart: int = 50
    n_initial: int = 0
    n_time: int = 0
    full_parabolic: bool = False
    metric_weight: bool | None = None
    weights: dict = field(default_factory=dict)
    total_steps: int = 20000
    lr_start: float = 1e-3
    lr_end: float = 1e-6
    param_seed: int = 0
    sample_seed: int = 0
    eval_resolution: int | None = None
    eval_seed: int = 12345
    write_pointwise: bool = False
    output_dir: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        def fail(path, msg):
            raise ConfigError(f"config.{path}: {msg}")

        if not isinstance(self.name, str) or not self.name or "/" in self.name:
            fail("name", "must be a non-empty string without '/'")
        try:
            kind = ProblemKind(self.problem)
        except ValueError:
            fail("problem", f"unknown problem {self.problem!r}; "
                            f"choose from {[k.value for k in ProblemKind]}")
        if not isinstance(self.problem_params, dict):
            fail("problem_params", "must be an object")
        try:
            problem = problem_factory(kind, **self.problem_params)
        except (TypeError, ValueError) as exc:
            fail("problem_params", str(exc))
        if self.method not in ("pinn", "ssbe", "both"):
            fail("method", f"must be pinn, ssbe or both, got {self.method!r}")
        try:
            Activation(self.activation)
        except ValueError:
            fail("activation", f"unknown activation {self.activation!r}")
        if self.layer_sizes is not None:
            sizes = list(self.layer_sizes)
            if not sizes or any(not isinstance(s, int) or s <= 0 for s in sizes):
                fail("layer_sizes", "must be a list of positive integers")
            if sizes[0] != problem.input_dim:
                fail("layer_sizes[0]", f"must equal the problem input dimension {problem.input_dim}")
            if sizes[-1] != 1:
                fail("layer_sizes[-1]", "must be 1")
        for name in ("n_interior", "n_boundary_per_chart"):
            v = getattr(self, name)
            if not isinstance(v, int) or v <= 0:
                fail(name, f"must be a positive integer, got {v!r}")
        for name in ("n_initial", "n_time", "total_steps"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                fail(name, f"must be a nonnegative integer, got {v!r}")
        if problem.time_dependent and self.n_initial <= 0:
            fail("n_initial", "time-dependent problems need initial samples")
        if self.full_parabolic and self.n_time <= 0:
            fail("n_time", "full_parabolic needs n_time > 0")
        allowed = {f.name for f in fields(LossWeights)}
        if not isinstance(self.weights, dict):
            fail("weights", "must be an object")
        for k, v in self.weights.items():
            if k not in allowed:
                fail(f"weights.{k}", f"unknown weight; allowed {sorted(allowed)}")
            if not isinstance(v, (int, float)) or not v >= 0:
                fail(f"weights.{k}", f"must be a nonnegative number, got {v!r}")
        for name in ("lr_start", "lr_end"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not v > 0:
                fail(name, f"must be positive, got {v!r}")
        if self.eval_resolution is not None and (not isinstance(self.eval_resolution, int)
                                                 or self.eval_resolution <= 0):
            fail("eval_resolution", "must be a positive integer or null")

    # --- serialization ---
    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be an object")
        known = {f.name for f in fields(cls)}
        for k in data:
            if k not in known:
                raise ConfigError(f"config.{k}: unknown field")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON ({exc})") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(errno.ENOENT, "config file not found", str(path))
        return cls.from_json(path.read_text())

    # --- derived objects ---
    def build_problem(self) -> PdeProblem:
        return problem_factory(self.problem, **self.problem_params)

    def resolved_layer_sizes(self, problem: PdeProblem) -> list[int]:
        return list(self.layer_sizes) if self.layer_sizes else [problem.input_dim, 30, 30, 30, 1]

    def loss_weights(self) -> LossWeights:
        return LossWeights(**{k: float(v) for k, v in self.weights.items()})

    def methods(self) -> list[Method]:
        return [Method.PINN, Method.SSBE] if self.method == "both" else [Method(self.method)]

    def resolved_output_dir(self) -> Path:
        if self.output_dir:
            return Path(self.output_dir)
        return Path(os.environ.get(OUTPUT_ROOT_ENV, "runs")) / self.name


@dataclass
class MethodResult:
    method: str
    curve: list[dict]
    initial_l2: float
    initial_h1: float
    final_l2: float
    final_h1: float
    steps: int
    wall_time: float
    params: NetworkParams | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("params")
        return d


@dataclass
class RunReport:
    config: dict
    seeds: dict
    results: dict
    wall_time: float
    output_dir: str | None = None

    def to_dict(self) -> dict:
        return {"config": self.config, "seeds": self.seeds, "wall_time": self.wall_time,
                "results": {k: v.to_dict() for k, v in self.results.items()}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _log_row(step: int, rep: LossReport, lr: float) -> dict:
    return {"step": step, "loss_total": rep.total, "loss_residual": rep.residual,
            "loss_bdry_value": rep.boundary_value, "loss_bdry_tangential": rep.boundary_tangential,
            "loss_initial": rep.initial, "lr": lr}


def _check_finite(method: str, step: int, rep: LossReport) -> None:
    for name, v in rep.as_dict().items():
        if not np.isfinite(v):
            raise TrainingDiverged(method, step, name, v)


def train(params: NetworkParams, problem: PdeProblem, prepared, method: Method,
          weights: LossWeights, schedule: LrSchedule, log_every: int = LOG_EVERY):
    """Full-batch Adam for ``schedule.total_steps`` steps; returns ``(params, curve)``.

    The curve row for step ``k`` holds the loss at the parameters before
    update ``k + 1`` and the learning rate of that update.  The final step is
    always logged.
    """
    theta = params.flatten()
    state = AdamState.zeros(len(theta), schedule)
    curve = []
    total = schedule.total_steps
    loss_fn = ssbe_loss if method is Method.SSBE else pinn_loss
    for step in range(total + 1):
        last = step == total
        if last:
            rep = loss_fn(params, problem, prepared, weights)
        else:
            rep, g = loss_and_gradient(params, problem, prepared, method, weights)
        _check_finite(method.value, step, rep)
        if step % log_every == 0 or last:
            curve.append(_log_row(step, rep, lr_at(schedule, step)))
        if last:
            break
        state, theta = adam_step(state, theta, g)
        params = params.with_flat(theta)
    return params, curve


def _errors(params, problem: PdeProblem, grid: TestGrid) -> tuple[float, float]:
    return (relative_error(params, problem, grid, Norm.L2),
            relative_error(params, problem, grid, Norm.H1))


def run_experiment(config: ExperimentConfig, write: bool = True,
                   output_dir: str | os.PathLike | None = None) -> RunReport:
    """Sample once, train every requested method, evaluate, optionally write files."""
    t0 = time.perf_counter()
    problem = config.build_problem()
    chart_set = problem.charts(config.metric_weight)
    samples = make_samples(problem.domain, chart_set, config.n_interior,
                           config.n_boundary_per_chart, config.sample_seed,
                           horizon=problem.horizon, n_initial=config.n_initial,
                           n_time=config.n_time)
    prepared = prepare(problem, samples, chart_set, config.full_parabolic)
    weights = config.loss_weights()
    schedule = LrSchedule(config.lr_start, config.lr_end, config.total_steps)
    sizes = config.resolved_layer_sizes(problem)
    grid = default_grid(problem, config.eval_resolution, config.eval_seed)

    results = {}
    for method in config.methods():
        t1 = time.perf_counter()
        p0 = init_params(config.param_seed, sizes, config.activation)
        l2_0, h1_0 = _errors(p0, problem, grid)
        params, curve = train(p0, problem, prepared, method, weights, schedule)
        l2, h1 = _errors(params, problem, grid)
        results[method.value] = MethodResult(method.value, curve, l2_0, h1_0, l2, h1,
                                             config.total_steps, time.perf_counter() - t1, params)

    report = RunReport(config.to_dict(),
                       {"param_seed": config.param_seed, "sample_seed": config.sample_seed,
                        "eval_seed": config.eval_seed},
                       results, time.perf_counter() - t0)
    if write:
        out = Path(output_dir) if output_dir is not None else config.resolved_output_dir()
        write_outputs(report, problem, grid, out, config)
        report.output_dir = str(out)
    return report


def write_curve_csv(path, curve: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CURVE_COLUMNS)
        w.writeheader()
        for row in curve:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def write_outputs(report: RunReport, problem: PdeProblem, grid: TestGrid, out: Path,
                  config: ExperimentConfig) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json())
    for name, res in report.results.items():
        write_curve_csv(out / f"curve_{name}.csv", res.curve)
        save_checkpoint(out / f"checkpoint_{name}.bin", res.params,
                        {"problem": config.problem, "problem_params": config.problem_params})
        if config.write_pointwise:
            e, ge, _, _ = error_fields(res.params, problem, grid)
            cols = [f"x{i}" for i in range(grid.points.shape[1])]
            table = np.column_stack([grid.points, e, np.linalg.norm(ge, axis=1)])
            np.savetxt(out / f"pointwise_{name}.csv", table, delimiter=",",
                       header=",".join(cols + ["error", "grad_error_norm"]), comments="",
                       fmt="%.17g")


# --- checkpoints ------------------------------------------------------------
#
# bytes 0-7    magic b"SSBECKPT"
# bytes 8-11   format version, uint32 little-endian
# bytes 12-15  header length H, uint32 little-endian
# next H bytes UTF-8 JSON: layer_sizes, activation, n_params, plus metadata
# remainder    n_params float64 little-endian, ordered as NetworkParams.flatten

CHECKPOINT_MAGIC = b"SSBECKPT"
CHECKPOINT_VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, params: NetworkParams, meta: dict | None = None) -> None:
    header = {"layer_sizes": list(params.layer_sizes), "activation": params.activation.value,
              "n_params": params.n_params, **(meta or {})}
    hb = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", CHECKPOINT_VERSION, len(hb)))
        fh.write(hb)
        fh.write(params.flatten().astype("<f8").tobytes())


def load_checkpoint(path) -> tuple[NetworkParams, dict]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(errno.ENOENT, "checkpoint file not found", str(path))
    raw = path.read_bytes()
    if raw[:8] != CHECKPOINT_MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    version, hlen = struct.unpack("<II", raw[8:16])
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    header = json.loads(raw[16:16 + hlen].decode())
    flat = np.frombuffer(raw[16 + hlen:], dtype="<f8").astype(float)
    if len(flat) != header["n_params"]:
        raise CheckpointError(f"expected {header['n_params']} parameters, found {len(flat)}")
    template = init_params(0, header["layer_sizes"], header["activation"])
    return template.with_flat(flat), header


def evaluate_checkpoint(path, resolution: int | None = None, seed: int = 12345) -> dict:
    params, header = load_checkpoint(path)
    if "problem" not in header:
        raise CheckpointError("checkpoint has no problem metadata")
    problem = problem_factory(header["problem"], **header.get("problem_params", {}))
    grid = default_grid(problem, resolution, seed)
    l2, h1 = _errors(params, problem, grid)
    return {"problem": header["problem"], "grid": grid.kind.value, "n_points": len(grid.points),
            "relative_l2": l2, "relative_h1": h1}


# --- self-check -------------------------------------------------------------

def verify_autodiff(seed: int, n_nets: int = 10, h: float = 1e-5) -> dict:
    """Compare jets and parameter pullbacks of random nets with central differences.

    Returns the worst relative errors over all nets; random depth 2-4,
    widths up to 16, both activations, input dimension in {1, 2, 5}.
    """
    from .diffnet import JetAdjoint, forward_jet, forward_value, pullback

    rng = np.random.default_rng(seed)
    worst = {"gradient": 0.0, "laplacian": 0.0, "pullback": 0.0}

    def rel(a, b):
        a, b = np.asarray(a), np.asarray(b)
        return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-3))

    for k in range(n_nets):
        d = int(rng.choice([1, 2, 5]))
        depth = int(rng.integers(2, 5))
        sizes = [d] + [int(rng.integers(2, 17)) for _ in range(depth - 1)] + [1]
        act = [Activation.TANH, Activation.RELU3_SIXTH][k % 2]
        p = init_params(int(rng.integers(2 ** 31)), sizes, act)
        x = rng.uniform(-1, 1, size=(3, d))
        mask = np.ones(d, dtype=bool)
        jet = forward_jet(p, x, mask)
        E = np.eye(d) * h
        fd_g = np.stack([(forward_value(p, x + e) - forward_value(p, x - e)) / (2 * h) for e in E], 1)
        hh = 1e-3
        fd_l = sum((forward_value(p, x + hh * e / h) - 2 * forward_value(p, x)
                    + forward_value(p, x - hh * e / h)) / hh ** 2 for e in E)
        worst["gradient"] = max(worst["gradient"], rel(jet.gradient, fd_g))
        worst["laplacian"] = max(worst["laplacian"], rel(jet.laplacian, fd_l))

        adj = JetAdjoint(rng.standard_normal(3), rng.standard_normal((3, d)), rng.standard_normal(3))
        g = pullback(p, x, mask, adj)
        theta = p.flatten()

        def scalar(th):
            j = forward_jet(p.with_flat(th), x, mask)
            return (np.dot(adj.value_bar, j.value) + np.sum(adj.gradient_bar * j.gradient)
                    + np.dot(adj.laplacian_bar, j.laplacian))

        fd = np.empty_like(theta)
        for i in range(len(theta)):
            tp, tm = theta.copy(), theta.copy()
            tp[i] += h
            tm[i] -= h
            fd[i] = (scalar(tp) - scalar(tm)) / (2 * h)
        worst["pullback"] = max(worst["pullback"], rel(g, fd))
    return worst
