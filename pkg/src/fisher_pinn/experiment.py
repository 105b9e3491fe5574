"""Experiment configuration and artifact serialization.

Everything a run needs is captured in one JSON config; every output
directory gets a copy so the run can be reproduced with one command.
Checkpoints are versioned JSON whose float arrays round-trip exactly
(Python's shortest-exact decimal encoding).  CSV output uses 17
significant digits, comma separators, a header row, and LF endings.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .fdm import Grid
from .network import Architecture
from .optimize import AdamState, LrSchedule
from .physics import Domain, PdeParams
from .pinn import LossWeights, SamplingConfig

CHECKPOINT_VERSION = 1


class ConfigError(ValueError):
    """Malformed or inconsistent configuration / checkpoint input."""


@dataclass(frozen=True)
class ExperimentConfig:
    pde: PdeParams = field(default_factory=PdeParams)
    domain: Domain = field(default_factory=Domain)
    architecture: Architecture = field(default_factory=Architecture)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    schedule: LrSchedule = field(default_factory=LrSchedule)
    nx: int = 201
    nt: int = 1600
    iterations: int = 10_000
    retrain_iterations: int = 20_000
    retrain_lr: float = 1e-4
    weight_mode: str = "adaptive"
    weight_ceiling: float = 1e4

    def __post_init__(self):
        if self.iterations < 0 or self.retrain_iterations < 0:
            raise ConfigError("iteration counts must be >= 0")
        if self.retrain_lr <= 0:
            raise ConfigError("retrain_lr must be > 0")
        if self.weight_mode not in ("fixed", "adaptive"):
            raise ConfigError(f"weight_mode must be 'fixed' or 'adaptive', "
                              f"got {self.weight_mode!r}")

    def grid(self) -> Grid:
        return Grid.from_domain(self.domain, nx=self.nx, nt=self.nt)

    def initial_weights(self) -> LossWeights:
        return LossWeights(mode=self.weight_mode, ceiling=self.weight_ceiling)

    def to_dict(self) -> dict:
        return {
            "pde": asdict(self.pde),
            "domain": asdict(self.domain),
            "architecture": asdict(self.architecture),
            "sampling": asdict(self.sampling),
            "schedule": asdict(self.schedule),
            "nx": self.nx,
            "nt": self.nt,
            "iterations": self.iterations,
            "retrain_iterations": self.retrain_iterations,
            "retrain_lr": self.retrain_lr,
            "weight_mode": self.weight_mode,
            "weight_ceiling": self.weight_ceiling,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            return cls(
                pde=PdeParams(**d.get("pde", {})),
                domain=Domain(**d.get("domain", {})),
                architecture=Architecture(**d.get("architecture", {})),
                sampling=SamplingConfig(**d.get("sampling", {})),
                schedule=LrSchedule(**d.get("schedule", {})),
                **{k: d[k] for k in ("nx", "nt", "iterations",
                                     "retrain_iterations", "retrain_lr",
                                     "weight_mode", "weight_ceiling")
                   if k in d},
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad experiment config: {e}") from e


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return ExperimentConfig.from_dict(data)


def write_json(path, obj) -> None:
    path = Path(path)
    text = json.dumps(obj, indent=2, ensure_ascii=False) + "\n"
    path.write_text(text, encoding="utf-8", newline="\n")


@dataclass
class Checkpoint:
    """Trained-network snapshot: everything retraining needs to resume."""

    architecture: Architecture
    params: np.ndarray
    adam: AdamState | None
    iteration: int
    weights: LossWeights
    sampling: SamplingConfig
    format_version: int = CHECKPOINT_VERSION
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "architecture": asdict(self.architecture),
            "params": self.params.tolist(),
            "adam": None if self.adam is None else self.adam.to_dict(),
            "iteration": self.iteration,
            "weights": asdict(self.weights),
            "sampling": asdict(self.sampling),
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Checkpoint":
        version = d.get("format_version")
        if version != CHECKPOINT_VERSION:
            raise ConfigError(f"unsupported checkpoint format_version "
                              f"{version!r}; this build reads "
                              f"{CHECKPOINT_VERSION}")
        try:
            arch = Architecture(**d["architecture"])
            params = np.asarray(d["params"], dtype=float)
            adam = None if d["adam"] is None else AdamState.from_dict(d["adam"])
            ckpt = cls(architecture=arch, params=params, adam=adam,
                       iteration=int(d["iteration"]),
                       weights=LossWeights(**d["weights"]),
                       sampling=SamplingConfig(**d["sampling"]),
                       format_version=version,
                       metadata=dict(d.get("metadata", {})))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"bad checkpoint: {e}") from e
        if len(ckpt.params) != arch.param_count():
            raise ConfigError(
                f"checkpoint parameter vector has length {len(ckpt.params)}, "
                f"architecture needs {arch.param_count()}")
        return ckpt


def save_checkpoint(path, ckpt: Checkpoint) -> None:
    write_json(path, ckpt.to_dict())


def load_checkpoint(path) -> Checkpoint:
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read checkpoint {path}: {e}") from e
    return Checkpoint.from_dict(data)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_loss_history(path, history, every: int = 10) -> None:
    """Downsampled loss-history CSV (every `every`-th iteration, plus the
    final entry)."""
    rows = [h for h in history if h.iteration % every == 0]
    if history and (not rows or rows[-1] is not history[-1]):
        rows.append(history[-1])
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["iteration", "lr", "L", "L_IC", "L_BC", "L_Res",
                    "w_ic", "w_bc"])
        for h in rows:
            w.writerow([str(h.iteration)] + [_fmt(v) for v in h[1:]])


def read_loss_history(path) -> list[tuple]:
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        next(reader)  # header
        return [(int(r[0]),) + tuple(float(v) for v in r[1:]) for r in reader]


def write_grid_csv(path, matrix, times, positions) -> None:
    """Solution / error matrix: header row of x nodes, first column of
    t levels."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (len(times), len(positions)):
        raise ValueError(f"matrix shape {matrix.shape} does not match "
                         f"{len(times)} times x {len(positions)} positions")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["t"] + [_fmt(x) for x in positions])
        for t_val, row in zip(times, matrix):
            w.writerow([_fmt(t_val)] + [_fmt(v) for v in row])


def read_grid_csv(path):
    """Inverse of write_grid_csv: (matrix, times, positions)."""
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        positions = np.array([float(v) for v in header[1:]])
        times = []
        rows = []
        for r in reader:
            times.append(float(r[0]))
            rows.append([float(v) for v in r[1:]])
    return np.array(rows), np.array(times), positions
