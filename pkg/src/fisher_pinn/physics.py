"""Fisher-KPP problem definition.

The PDE is u_t = D u_xx + R u (1 - u) on a rectangle in (x, t), with a
closed-form traveling-wave solution that supplies the initial and
Dirichlet boundary conditions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import autodiff
from .autodiff import Expr


@dataclass(frozen=True)
class PdeParams:
    """Diffusion coefficient and logistic reaction rate."""

    diffusion: float = 0.01
    reaction: float = 1.0

    def __post_init__(self):
        if self.diffusion <= 0:
            raise ValueError(f"diffusion must be > 0, got {self.diffusion}")
        if self.reaction <= 0:
            raise ValueError(f"reaction must be > 0, got {self.reaction}")


@dataclass(frozen=True)
class Domain:
    x_min: float = 0.0
    x_max: float = 1.0
    t_min: float = 0.0
    t_max: float = 1.0

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if not self.t_min < self.t_max:
            raise ValueError(f"need t_min < t_max, got [{self.t_min}, {self.t_max}]")


def wave_speed(p: PdeParams) -> float:
    """Front propagation speed c = sqrt(2 D R) of the traveling wave."""
    return math.sqrt(2.0 * p.diffusion * p.reaction)


def steepness(p: PdeParams) -> float:
    """Exponent scale k = sqrt(R / (2 D)) of the wave profile."""
    return math.sqrt(p.reaction / (2.0 * p.diffusion))


def exact_solution(p: PdeParams, x, t):
    """Traveling-wave solution 1 / (1 + exp(k (x - c t))).

    Accepts scalars or numpy arrays.  The exponential may overflow far
    ahead of the front; the value then underflows gracefully to 0.
    """
    z = steepness(p) * (np.asarray(x, dtype=float) - wave_speed(p) * np.asarray(t, dtype=float))
    with np.errstate(over="ignore"):
        out = 1.0 / (1.0 + np.exp(z))
    if out.ndim == 0:
        return float(out)
    return out


def initial_condition(p: PdeParams, x):
    """u(x, 0): the traveling wave at its initial position."""
    return exact_solution(p, x, 0.0)


def boundary_condition(p: PdeParams, domain: Domain, side: str, t):
    """Dirichlet value on the left or right spatial boundary at time t."""
    if side == "left":
        return exact_solution(p, domain.x_min, t)
    if side == "right":
        return exact_solution(p, domain.x_max, t)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def residual_operator(p: PdeParams, u_t, u_xx, u):
    """PDE residual u_t - D u_xx - R u (1 - u); zero for exact solutions."""
    return u_t - p.diffusion * u_xx - p.reaction * u * (1.0 - u)


def exact_solution_expr(p: PdeParams, t: Expr, x: Expr) -> Expr:
    """The closed-form solution as a differentiable expression graph."""
    one = Expr.constant(1.0)
    z = Expr.constant(steepness(p)) * (x - Expr.constant(wave_speed(p)) * t)
    return one / (one + autodiff.exp(z))
