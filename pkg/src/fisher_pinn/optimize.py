"""Adam with bias correction and an exponential learning-rate schedule.

Optimizer state is explicit and serializable so retraining can either
reset it (the baseline protocol) or resume with the accumulated moments
intact.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


class NonFiniteGradientError(ValueError):
    def __init__(self, index: int, value: float):
        super().__init__(f"gradient component {index} is non-finite ({value})")
        self.index = index
        self.value = value


@dataclass
class AdamState:
    """First/second moment vectors and step counter."""

    m: np.ndarray
    v: np.ndarray
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def zeros(cls, n_params: int, beta1: float = 0.9, beta2: float = 0.999,
              epsilon: float = 1e-8) -> "AdamState":
        return cls(m=np.zeros(n_params), v=np.zeros(n_params),
                   step_count=0, beta1=beta1, beta2=beta2, epsilon=epsilon)

    def reset(self) -> "AdamState":
        """Zeroed moments and step counter; hyperparameters kept."""
        return AdamState.zeros(len(self.m), self.beta1, self.beta2,
                               self.epsilon)

    def to_dict(self) -> dict:
        return {
            "m": self.m.tolist(),
            "v": self.v.tolist(),
            "step_count": self.step_count,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AdamState":
        return cls(m=np.asarray(d["m"], dtype=float),
                   v=np.asarray(d["v"], dtype=float),
                   step_count=int(d["step_count"]),
                   beta1=float(d["beta1"]), beta2=float(d["beta2"]),
                   epsilon=float(d["epsilon"]))


def adam_step(state: AdamState, params: np.ndarray, grads: np.ndarray,
              lr: float) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update; returns new params and state."""
    if grads.shape != params.shape:
        raise ValueError(f"gradient length {grads.shape} does not match "
                         f"parameter length {params.shape}")
    if not np.all(np.isfinite(grads)):
        idx = int(np.flatnonzero(~np.isfinite(grads))[0])
        raise NonFiniteGradientError(idx, float(grads[idx]))
    k = state.step_count + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    v = state.beta2 * state.v + (1.0 - state.beta2) * grads * grads
    m_hat = m / (1.0 - state.beta1 ** k)
    v_hat = v / (1.0 - state.beta2 ** k)
    new_params = params - lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
    new_state = replace(state, m=m, v=v, step_count=k)
    return new_params, new_state


@dataclass(frozen=True)
class LrSchedule:
    """lr(k) = initial_lr * decay_factor ** floor(k / decay_every)."""

    initial_lr: float = 1e-3
    decay_factor: float = 0.99
    decay_every: int = 100

    def __post_init__(self):
        if not 0.0 < self.decay_factor <= 1.0:
            raise ValueError(f"decay_factor must be in (0, 1], got {self.decay_factor}")
        if self.initial_lr <= 0:
            raise ValueError(f"initial_lr must be > 0, got {self.initial_lr}")
        if self.decay_every < 1:
            raise ValueError(f"decay_every must be >= 1, got {self.decay_every}")

    @classmethod
    def constant(cls, lr: float) -> "LrSchedule":
        return cls(initial_lr=lr, decay_factor=1.0, decay_every=1)


def lr_at(schedule: LrSchedule, iteration: int) -> float:
    if iteration < 0:
        raise ValueError(f"iteration must be >= 0, got {iteration}")
    return schedule.initial_lr * schedule.decay_factor ** (iteration // schedule.decay_every)
