"""Explicit finite-difference benchmark solver.

Forward Euler in time, central differences in space, Dirichlet boundary
values taken from the exact traveling wave at every time level.  The
time step must respect the diffusion stability bound dt <= dx^2 / (2 D).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .physics import Domain, PdeParams, boundary_condition, initial_condition


class CflError(ValueError):
    """Time step violates the explicit-scheme stability bound."""

    def __init__(self, dt: float, limit: float, min_nt: int):
        super().__init__(
            f"dt = {dt:g} exceeds the diffusion stability limit "
            f"dx^2/(2D) = {limit:g}; need at least N_t = {min_nt} time steps")
        self.dt = dt
        self.limit = limit
        self.min_nt = min_nt


@dataclass(frozen=True)
class Grid:
    """Uniform space-time discretization: nx nodes, nt time steps."""

    nx: int
    nt: int
    dx: float
    dt: float

    def __post_init__(self):
        if self.nx < 3:
            raise ValueError(f"need nx >= 3 spatial nodes, got {self.nx}")
        if self.nt < 1:
            raise ValueError(f"need nt >= 1 time steps, got {self.nt}")

    @classmethod
    def from_domain(cls, domain: Domain, nx: int = 201, nt: int = 1600) -> "Grid":
        return cls(nx=nx, nt=nt,
                   dx=(domain.x_max - domain.x_min) / (nx - 1),
                   dt=(domain.t_max - domain.t_min) / nt)

    def x_nodes(self, domain: Domain) -> np.ndarray:
        return np.linspace(domain.x_min, domain.x_max, self.nx)

    def t_levels(self, domain: Domain) -> np.ndarray:
        return np.linspace(domain.t_min, domain.t_max, self.nt + 1)


def cfl_limit(p: PdeParams, dx: float) -> float:
    """Largest stable dt for the diffusion term: dx^2 / (2 D)."""
    if dx <= 0:
        raise ValueError(f"dx must be > 0, got {dx}")
    return dx * dx / (2.0 * p.diffusion)


def check_cfl(p: PdeParams, domain: Domain, grid: Grid) -> None:
    limit = cfl_limit(p, grid.dx)
    if grid.dt > limit:
        span = domain.t_max - domain.t_min
        raise CflError(grid.dt, limit, math.ceil(span / limit))


def step(p: PdeParams, domain: Domain, grid: Grid, field: np.ndarray,
         t_n: float) -> np.ndarray:
    """Advance one time level; boundary nodes get the t_{n+1} Dirichlet
    values after the interior update."""
    field = np.asarray(field, dtype=float)
    if field.shape != (grid.nx,):
        raise ValueError(f"field length {field.shape} does not match nx = {grid.nx}")
    t_next = t_n + grid.dt
    # level-0 "boundary values" echo the field so the stencil sees the
    # input unchanged; only the t_{n+1} boundaries are imposed
    bc_left = np.array([field[0],
                        boundary_condition(p, domain, "left", t_next)])
    bc_right = np.array([field[-1],
                         boundary_condition(p, domain, "right", t_next)])
    out = _kernels.fdm_solve_kernel(field, bc_left, bc_right,
                                    p.diffusion, p.reaction, grid.dx, grid.dt)
    return out[1]


def solve(p: PdeParams, domain: Domain, grid: Grid,
          keep_history: bool = True) -> np.ndarray:
    """March the full solution; rows are time levels, columns x nodes.

    With keep_history=False only the final time level is returned
    (streaming mode for large grids).
    """
    check_cfl(p, domain, grid)
    x = grid.x_nodes(domain)
    t = grid.t_levels(domain)
    u0 = initial_condition(p, x)
    bc_left = boundary_condition(p, domain, "left", t)
    bc_right = boundary_condition(p, domain, "right", t)
    if keep_history:
        return _kernels.fdm_solve_kernel(u0, bc_left, bc_right,
                                         p.diffusion, p.reaction,
                                         grid.dx, grid.dt)
    return _kernels.fdm_final_row_kernel(u0, bc_left, bc_right,
                                         p.diffusion, p.reaction,
                                         grid.dx, grid.dt)
