"""Fully connected Tanh network u(t, x; theta).

The parameter vector is flat and layer-major: for each layer, the
weight matrix (fan_out, fan_in) flattened row-major, then the biases.
This layout is part of the checkpoint contract and must not change.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import _kernels, autodiff
from .autodiff import Expr


class ParameterShapeError(ValueError):
    def __init__(self, expected: int, actual: int):
        super().__init__(f"parameter vector has length {actual}, "
                         f"architecture needs {expected}")
        self.expected = expected
        self.actual = actual


@dataclass(frozen=True)
class Architecture:
    """Layer plan of the network; defaults match the 7x50 configuration."""

    hidden_layers: int = 7
    hidden_width: int = 50
    input_dim: int = 2
    output_dim: int = 1
    activation: str = "tanh"

    def __post_init__(self):
        if self.hidden_layers < 1 or self.hidden_width < 1:
            raise ValueError("need hidden_layers >= 1 and hidden_width >= 1")
        if self.input_dim != 2 or self.output_dim != 1:
            raise ValueError("network maps (t, x) to a scalar: "
                             "input_dim must be 2 and output_dim 1")
        if self.activation != "tanh":
            raise ValueError(f"unsupported activation {self.activation!r}")

    def layer_sizes(self) -> list[int]:
        return ([self.input_dim]
                + [self.hidden_width] * self.hidden_layers
                + [self.output_dim])

    def param_count(self) -> int:
        sizes = self.layer_sizes()
        return sum(fi * fo + fo for fi, fo in zip(sizes[:-1], sizes[1:]))


def _check_params(arch: Architecture, params) -> None:
    if len(params) != arch.param_count():
        raise ParameterShapeError(arch.param_count(), len(params))


def xavier_init(arch: Architecture, seed: int) -> np.ndarray:
    """Weights ~ Normal(0, 2/(fan_in+fan_out)), biases zero; seed-determined."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    sizes = arch.layer_sizes()
    parts = []
    for fi, fo in zip(sizes[:-1], sizes[1:]):
        sigma = np.sqrt(2.0 / (fi + fo))
        parts.append(rng.normal(0.0, sigma, size=fi * fo))
        parts.append(np.zeros(fo))
    return np.concatenate(parts)


def split_params(arch: Architecture, theta: np.ndarray):
    """Views (W, b) per layer, W shaped (fan_out, fan_in)."""
    _check_params(arch, theta)
    sizes = arch.layer_sizes()
    out = []
    off = 0
    for fi, fo in zip(sizes[:-1], sizes[1:]):
        w = theta[off:off + fi * fo].reshape(fo, fi)
        b = theta[off + fi * fo:off + fi * fo + fo]
        off += fi * fo + fo
        out.append((w, b))
    return out


ExprOrFloat = Union[Expr, float]


def forward(arch: Architecture,
            params: Union[np.ndarray, Sequence[Expr]],
            t: ExprOrFloat, x: ExprOrFloat) -> Expr:
    """Build u(t, x) as an expression graph.

    `params` is either a flat numeric vector (embedded as constants) or
    a sequence of Expr in the same layout (so parameter gradients can
    flow).  The output layer is linear.
    """
    _check_params(arch, params)
    if isinstance(params, np.ndarray):
        nodes = [Expr.constant(v) for v in params]
    else:
        nodes = list(params)

    sizes = arch.layer_sizes()
    activ = [Expr._wrap(t), Expr._wrap(x)]
    off = 0
    n_layers = len(sizes) - 1
    for l, (fi, fo) in enumerate(zip(sizes[:-1], sizes[1:])):
        nxt = []
        for j in range(fo):
            z = nodes[off + fi * fo + j]  # bias
            for i in range(fi):
                z = z + nodes[off + j * fi + i] * activ[i]
            nxt.append(autodiff.tanh(z) if l < n_layers - 1 else z)
        activ = nxt
        off += fi * fo + fo
    return activ[0]


def param_vars(arch: Architecture) -> list[Expr]:
    """Variables p0..pN matching the flat parameter layout."""
    return [Expr.var(f"p{i}") for i in range(arch.param_count())]


def predict(arch: Architecture, theta: np.ndarray, t, x) -> np.ndarray:
    """Vectorized network values at paired points (t_i, x_i)."""
    _check_params(arch, theta)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    t, x = np.broadcast_arrays(t, x)
    sizes = np.asarray(arch.layer_sizes(), dtype=np.int64)
    u, _, _ = _kernels.mlp_value_forward(
        np.ascontiguousarray(theta, dtype=float), sizes,
        np.ascontiguousarray(t), np.ascontiguousarray(x))
    return u


def predict_grid(arch: Architecture, theta: np.ndarray,
                 times, positions) -> np.ndarray:
    """u on the Cartesian grid; rows index time, columns position."""
    times = np.asarray(times, dtype=float)
    positions = np.asarray(positions, dtype=float)
    tt, xx = np.meshgrid(times, positions, indexing="ij")
    u = predict(arch, theta, tt.ravel(), xx.ravel())
    return u.reshape(len(times), len(positions))
