"""Composite physics-informed loss, point sampling, adaptive loss
weights, and the training / retraining loops."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels
from .network import Architecture, _check_params
from .optimize import AdamState, LrSchedule, adam_step, lr_at
from .physics import Domain, PdeParams, boundary_condition, initial_condition


class NonFiniteLossError(RuntimeError):
    """Training produced a non-finite value; carries the last good state."""

    def __init__(self, message: str, last_state: "TrainState | None" = None):
        super().__init__(message)
        self.last_state = last_state


@dataclass(frozen=True)
class SamplingConfig:
    n_collocation: int = 10_000
    n_ic: int = 1_000
    n_bc_per_side: int = 1_000
    seed: int = 0
    resample_collocation: bool = True

    def __post_init__(self):
        for name in ("n_collocation", "n_ic", "n_bc_per_side"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


@dataclass(frozen=True)
class LossWeights:
    """Weights of the three loss terms.

    In adaptive mode w_ic and w_bc track the ratio of residual-loss to
    component-loss gradient norms, clamped to [1, ceiling]; w_res stays 1.
    """

    w_ic: float = 1.0
    w_bc: float = 1.0
    w_res: float = 1.0
    mode: str = "adaptive"
    ceiling: float = 1e4

    def __post_init__(self):
        if self.mode not in ("fixed", "adaptive"):
            raise ValueError(f"mode must be 'fixed' or 'adaptive', got {self.mode!r}")
        if min(self.w_ic, self.w_bc, self.w_res) < 0:
            raise ValueError("weights must be nonnegative")
        if self.ceiling < 1:
            raise ValueError(f"ceiling must be >= 1, got {self.ceiling}")


class Points(NamedTuple):
    """One iteration's sample points."""

    collocation_t: np.ndarray
    collocation_x: np.ndarray
    ic_x: np.ndarray
    bc_t: np.ndarray   # left points first, then right
    bc_x: np.ndarray


class HistoryEntry(NamedTuple):
    iteration: int
    lr: float
    total: float
    l_ic: float
    l_bc: float
    l_res: float
    w_ic: float
    w_bc: float


@dataclass
class TrainState:
    params: np.ndarray
    adam: AdamState
    weights: LossWeights
    iteration: int = 0
    loss_history: list = field(default_factory=list)


def sample_points(cfg: SamplingConfig, domain: Domain, iteration: int) -> Points:
    """Draw the iteration's point sets.

    IC and BC points are fixed by the seed alone (sampled once and
    reused); collocation points are redrawn per iteration when
    resample_collocation is on.
    """
    fixed_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0]))
    ic_x = fixed_rng.uniform(domain.x_min, domain.x_max, cfg.n_ic)
    bc_t = fixed_rng.uniform(domain.t_min, domain.t_max, 2 * cfg.n_bc_per_side)
    bc_x = np.concatenate([np.full(cfg.n_bc_per_side, domain.x_min),
                           np.full(cfg.n_bc_per_side, domain.x_max)])

    colloc_it = iteration if cfg.resample_collocation else 0
    colloc_rng = np.random.default_rng(
        np.random.SeedSequence([cfg.seed, 1, colloc_it]))
    collocation_t = colloc_rng.uniform(domain.t_min, domain.t_max,
                                       cfg.n_collocation)
    collocation_x = colloc_rng.uniform(domain.x_min, domain.x_max,
                                       cfg.n_collocation)
    return Points(collocation_t, collocation_x, ic_x, bc_t, bc_x)


def _check_finite(u: np.ndarray, kind: str, t, x) -> None:
    bad = np.flatnonzero(~np.isfinite(u))
    if bad.size:
        i = int(bad[0])
        ti = float(np.broadcast_to(t, u.shape)[i])
        raise NonFiniteLossError(
            f"non-finite network output at {kind} point (t={ti}, x={float(x[i])})")


def _evaluate(arch, theta, p, domain, points, want_grads):
    sizes = np.asarray(arch.layer_sizes(), dtype=np.int64)
    n = len(points.collocation_t)

    u, ut, ux, uxx, a0, acts, zjets = _kernels.mlp_jet_forward(
        theta, sizes, points.collocation_t, points.collocation_x)
    _check_finite(u, "collocation", points.collocation_t, points.collocation_x)
    r = ut - p.diffusion * uxx - p.reaction * u * (1.0 - u)
    l_res = float(np.mean(r * r))

    u_ic, a0_ic, cache_ic = _kernels.mlp_value_forward(
        theta, sizes, np.full_like(points.ic_x, domain.t_min), points.ic_x)
    _check_finite(u_ic, "initial-condition", domain.t_min, points.ic_x)
    d_ic = u_ic - initial_condition(p, points.ic_x)
    l_ic = float(np.mean(d_ic * d_ic))

    u_bc, a0_bc, cache_bc = _kernels.mlp_value_forward(
        theta, sizes, points.bc_t, points.bc_x)
    _check_finite(u_bc, "boundary", points.bc_t, points.bc_x)
    n_side = len(points.bc_t) // 2
    bc_target = np.concatenate([
        boundary_condition(p, domain, "left", points.bc_t[:n_side]),
        boundary_condition(p, domain, "right", points.bc_t[n_side:]),
    ])
    d_bc = u_bc - bc_target
    l_bc = float(np.mean(d_bc * d_bc))

    comps = (l_ic, l_bc, l_res)
    if not want_grads:
        return comps, None

    c = 2.0 * r / n
    g_res = _kernels.mlp_jet_backward(
        theta, sizes, a0, acts, zjets,
        -p.reaction * (1.0 - 2.0 * u) * c,  # d res / d u
        c,                                  # d res / d u_t
        np.zeros_like(c),
        -p.diffusion * c)                   # d res / d u_xx
    g_ic = _kernels.mlp_value_backward(
        theta, sizes, a0_ic, cache_ic, 2.0 * d_ic / len(d_ic))
    g_bc = _kernels.mlp_value_backward(
        theta, sizes, a0_bc, cache_bc, 2.0 * d_bc / len(d_bc))
    return comps, (g_ic, g_bc, g_res)


def loss_components(arch: Architecture, theta: np.ndarray, p: PdeParams,
                    domain: Domain, points: Points):
    """(L_ic, L_bc, L_res): mean squared IC/BC mismatches and PDE residual."""
    _check_params(arch, theta)
    comps, _ = _evaluate(arch, theta, p, domain, points, want_grads=False)
    return comps


def loss_and_grads(arch: Architecture, theta: np.ndarray, p: PdeParams,
                   domain: Domain, points: Points):
    """Loss components plus their exact parameter gradients (g_ic, g_bc, g_res)."""
    _check_params(arch, theta)
    return _evaluate(arch, theta, p, domain, points, want_grads=True)


def total_loss(components, weights: LossWeights) -> float:
    l_ic, l_bc, l_res = components
    return weights.w_ic * l_ic + weights.w_bc * l_bc + weights.w_res * l_res


def update_adaptive_weights(weights: LossWeights, grad_norms,
                            smoothing: float = 0.1) -> LossWeights:
    """Pull w_ic / w_bc toward g_res/g_k, clamped to [1, ceiling]."""
    if weights.mode != "adaptive":
        raise ValueError("weights are not in adaptive mode")
    g_ic, g_bc, g_res = grad_norms
    if min(g_ic, g_bc, g_res) < 0:
        raise ValueError("gradient norms must be nonnegative")

    def updated(w, g_k):
        if not (math.isfinite(g_k) and math.isfinite(g_res)):
            return w
        if g_k == 0.0 and g_res == 0.0:
            return w
        ratio = math.inf if g_k == 0.0 else g_res / g_k
        return min(max((1.0 - smoothing) * w + smoothing * ratio, 1.0),
                   weights.ceiling)

    return replace(weights, w_ic=updated(weights.w_ic, g_ic),
                   w_bc=updated(weights.w_bc, g_bc))


def train(state: TrainState, arch: Architecture, p: PdeParams, domain: Domain,
          cfg: SamplingConfig, schedule: LrSchedule, iterations: int,
          progress: Optional[callable] = None) -> TrainState:
    """Run the sample / differentiate / reweight / Adam loop.

    Deterministic given the config seeds; the learning-rate schedule is
    indexed by the global iteration counter so resumed runs continue it.
    Raises NonFiniteLossError (carrying the last good state) if the loss
    leaves the finite range.
    """
    params = state.params
    adam = state.adam
    weights = state.weights
    it = state.iteration
    history = list(state.loss_history)

    for _ in range(iterations):
        points = sample_points(cfg, domain, it)
        last_good = TrainState(params, adam, weights, it, history)
        comps, grads = loss_and_grads(arch, params, p, domain, points)
        g_ic, g_bc, g_res = grads
        if weights.mode == "adaptive":
            norms = (float(np.linalg.norm(g_ic)), float(np.linalg.norm(g_bc)),
                     float(np.linalg.norm(g_res)))
            weights = update_adaptive_weights(weights, norms)
        total = total_loss(comps, weights)
        if not math.isfinite(total):
            raise NonFiniteLossError(
                f"non-finite total loss {total} at iteration {it} "
                f"(components {comps})", last_state=last_good)
        lr = lr_at(schedule, it)
        grad = (weights.w_ic * g_ic + weights.w_bc * g_bc
                + weights.w_res * g_res)
        params, adam = adam_step(adam, params, grad, lr)
        history.append(HistoryEntry(it, lr, total, comps[0], comps[1],
                                    comps[2], weights.w_ic, weights.w_bc))
        it += 1
        if progress is not None:
            progress(history[-1])
    return TrainState(params, adam, weights, it, history)


def retrain(state: TrainState, arch: Architecture, p: PdeParams,
            domain: Domain, cfg: SamplingConfig, lr: float, iterations: int,
            preserve_optimizer: bool = False,
            progress: Optional[callable] = None) -> TrainState:
    """Resume training at a constant learning rate.

    Without preserve_optimizer the Adam moments and step counter are
    zeroed first (the baseline retraining protocol); with it the
    optimizer continues from its accumulated state.
    """
    adam = state.adam if preserve_optimizer else state.adam.reset()
    start = TrainState(state.params, adam, state.weights, state.iteration,
                       list(state.loss_history))
    return train(start, arch, p, domain, cfg, LrSchedule.constant(lr),
                 iterations, progress=progress)
