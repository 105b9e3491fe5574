"""Error quantification: relative L2 norm and pointwise error fields."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ZeroNormError(ValueError):
    def __init__(self):
        super().__init__("relative L2 error is undefined for a zero-norm "
                         "reference vector")


@dataclass(frozen=True)
class ErrorReport:
    relative_l2: float
    max_abs_error: float
    argmax_location: tuple[float, float]  # (t, x)
    n_points: int

    def to_dict(self) -> dict:
        return {
            "relative_l2": self.relative_l2,
            "max_abs_error": self.max_abs_error,
            "argmax_location": {"t": self.argmax_location[0],
                                "x": self.argmax_location[1]},
            "n_points": self.n_points,
        }


def relative_l2(approx, exact) -> float:
    """||approx - exact||_2 / ||exact||_2 over a shared point set."""
    approx = np.asarray(approx, dtype=float).ravel()
    exact = np.asarray(exact, dtype=float).ravel()
    if approx.shape != exact.shape:
        raise ValueError(f"length mismatch: {approx.shape} vs {exact.shape}")
    if approx.size < 1:
        raise ValueError("need at least one point")
    denom = np.sqrt(np.sum(exact * exact))
    if denom == 0.0:
        raise ZeroNormError()
    return float(np.sqrt(np.sum((approx - exact) ** 2)) / denom)


def error_field(approx, exact, times=None, positions=None):
    """Pointwise |approx - exact| plus an aggregate report.

    approx/exact are matrices with rows indexing time and columns
    position.  times/positions give physical coordinates for the argmax
    location; they default to row/column indices.
    """
    approx = np.asarray(approx, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if approx.shape != exact.shape:
        raise ValueError(f"shape mismatch: {approx.shape} vs {exact.shape}")
    field = np.abs(approx - exact)
    flat_idx = int(np.argmax(field))
    ti, xi = np.unravel_index(flat_idx, field.shape) if field.ndim == 2 \
        else (0, flat_idx)
    t_loc = float(times[ti]) if times is not None else float(ti)
    x_loc = float(positions[xi]) if positions is not None else float(xi)
    report = ErrorReport(
        relative_l2=relative_l2(approx, exact),
        max_abs_error=float(field.flat[flat_idx]),
        argmax_location=(t_loc, x_loc),
        n_points=field.size,
    )
    return field, report


def compare_all(pinn_grid, fdm_grid, exact_grid, times=None, positions=None):
    """Three-way comparison: exact-vs-FDM, exact-vs-PINN, PINN-vs-FDM."""
    _, exact_vs_fdm = error_field(fdm_grid, exact_grid, times, positions)
    _, exact_vs_pinn = error_field(pinn_grid, exact_grid, times, positions)
    _, pinn_vs_fdm = error_field(pinn_grid, fdm_grid, times, positions)
    return {
        "exact_vs_fdm": exact_vs_fdm,
        "exact_vs_pinn": exact_vs_pinn,
        "pinn_vs_fdm": pinn_vs_fdm,
    }
