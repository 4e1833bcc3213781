"""Adam with a geometric learning-rate decay."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class LrSchedule:
    lr_start: float = 1e-3
    lr_end: float = 1e-6
    total_steps: int = 10000


def lr_at(schedule: LrSchedule, step: int) -> float:
    """``lr_start * (lr_end / lr_start) ** (step / total_steps)``; clamps past the end."""
    if step < 0:
        raise ValueError("step must be nonnegative")
    if schedule.total_steps <= 0:
        return float(schedule.lr_start)
    if step >= schedule.total_steps:
        return float(schedule.lr_end)
    frac = step / schedule.total_steps
    return float(schedule.lr_start * (schedule.lr_end / schedule.lr_start) ** frac)


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    schedule: LrSchedule = field(default_factory=LrSchedule)
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def zeros(cls, n_params: int, schedule: LrSchedule | None = None, **kw) -> "AdamState":
        return cls(np.zeros(n_params), np.zeros(n_params), schedule or LrSchedule(), **kw)


def adam_step(state: AdamState, theta: np.ndarray, grad: np.ndarray):
    """One bias-corrected Adam update; returns ``(new_state, new_theta)``.

    The learning rate used for update number ``k`` (1-based) is
    ``lr_at(schedule, k - 1)``, so the first update uses ``lr_start``.
    """
    theta = np.asarray(theta, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if theta.shape != state.m.shape or grad.shape != state.m.shape:
        raise ValueError(f"length mismatch: params {theta.shape}, grad {grad.shape}, "
                         f"state {state.m.shape}")
    lr = lr_at(state.schedule, state.step)
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    m = b1 * state.m + (1.0 - b1) * grad
    v = b2 * state.v + (1.0 - b2) * grad * grad
    m_hat = m / (1.0 - b1 ** t)
    v_hat = v / (1.0 - b2 ** t)
    new_theta = theta - lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
    new_state = AdamState(m, v, state.schedule, t, b1, b2, state.epsilon)
    return new_state, new_theta
