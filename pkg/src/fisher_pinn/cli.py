"""Command-line driver for the full experimental protocol.

Subcommands: train (network from scratch), retrain (resume from a
checkpoint at constant lr, optimizer reset or preserved), fdm
(finite-difference reference solve), compare (three-way error study).
Exit codes: 0 success, 1 usage/config error, 2 numerical failure
(CFL violation, non-finite loss).  FISHER_PINN_THREADS caps internal
parallelism.
"""

from __future__ import annotations

import argparse
import datetime
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import _kernels, metrics, physics
from .experiment import (Checkpoint, ConfigError, ExperimentConfig,
                         load_checkpoint, load_config, save_checkpoint,
                         write_grid_csv, write_json, write_loss_history)
from .fdm import CflError, solve
from .network import predict, predict_grid, xavier_init
from .optimize import AdamState, NonFiniteGradientError
from .pinn import NonFiniteLossError, TrainState, retrain, train

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _apply_thread_cap() -> None:
    raw = os.environ.get("FISHER_PINN_THREADS", "").strip()
    if not raw:
        return
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"FISHER_PINN_THREADS must be an integer, got {raw!r}")
    if n < 1:
        raise ConfigError(f"FISHER_PINN_THREADS must be >= 1, got {n}")
    try:
        import threadpoolctl
        threadpoolctl.threadpool_limits(n)
    except ImportError:
        pass
    try:
        import numba
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    except ImportError:
        pass


def _resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, sampling=replace(cfg.sampling, seed=args.seed))
    if getattr(args, "iterations", None) is not None:
        cfg = replace(cfg, iterations=args.iterations,
                      retrain_iterations=args.iterations)
    if getattr(args, "lr", None) is not None:
        cfg = replace(cfg, schedule=replace(cfg.schedule, initial_lr=args.lr),
                      retrain_lr=args.lr)
    if getattr(args, "weight_mode", None) is not None:
        cfg = replace(cfg, weight_mode=args.weight_mode)
    if getattr(args, "nx", None) is not None:
        cfg = replace(cfg, nx=args.nx)
    if getattr(args, "nt", None) is not None:
        cfg = replace(cfg, nt=args.nt)
    return cfg


def _prepare_out(args, cfg: ExperimentConfig) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "config_used.json", cfg.to_dict())
    return out


def _metadata(duration: float) -> dict:
    return {
        "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "duration_seconds": duration,
        "backend": _kernels.BACKEND,
    }


def _slice_report(cfg: ExperimentConfig, approx_row: np.ndarray):
    """Error of a final-time spatial slice against the exact solution."""
    x = cfg.grid().x_nodes(cfg.domain)
    exact_row = physics.exact_solution(cfg.pde, x, cfg.domain.t_max)
    _, rep = metrics.error_field(approx_row.reshape(1, -1),
                                 exact_row.reshape(1, -1),
                                 [cfg.domain.t_max], x)
    return rep


def _report_dict(cfg: ExperimentConfig, grid_matrix: np.ndarray,
                 duration: float, compared_to: str) -> dict:
    grid = cfg.grid()
    x = grid.x_nodes(cfg.domain)
    t = grid.t_levels(cfg.domain)
    exact = physics.exact_solution(cfg.pde, x[None, :], t[:, None])
    _, whole = metrics.error_field(grid_matrix, exact, t, x)
    rep = _slice_report(cfg, grid_matrix[-1])
    d = rep.to_dict()
    d["compared_to"] = compared_to
    d["slice_t"] = cfg.domain.t_max
    d["whole_domain"] = whole.to_dict()
    d["metadata"] = _metadata(duration)
    return d


def _progress_printer(total: int):
    def cb(entry):
        if entry.iteration % 500 == 0 or entry.iteration == total - 1:
            print(f"iter {entry.iteration}: L={entry.total:.6e} "
                  f"(ic {entry.l_ic:.3e}, bc {entry.l_bc:.3e}, "
                  f"res {entry.l_res:.3e}) w_ic={entry.w_ic:.1f} "
                  f"w_bc={entry.w_bc:.1f} lr={entry.lr:.2e}",
                  file=sys.stderr)
    return cb


def _write_train_artifacts(out: Path, cfg: ExperimentConfig,
                           state: TrainState, duration: float) -> dict:
    grid = cfg.grid()
    x = grid.x_nodes(cfg.domain)
    t = grid.t_levels(cfg.domain)
    pinn_grid = predict_grid(cfg.architecture, state.params, t, x)
    write_grid_csv(out / "pinn_grid.csv", pinn_grid, t, x)
    write_loss_history(out / "loss_history.csv", state.loss_history)
    ckpt = Checkpoint(architecture=cfg.architecture, params=state.params,
                      adam=state.adam, iteration=state.iteration,
                      weights=state.weights, sampling=cfg.sampling,
                      metadata=_metadata(duration))
    save_checkpoint(out / "checkpoint.json", ckpt)
    report = _report_dict(cfg, pinn_grid, duration, "exact solution")
    write_json(out / "report.json", report)
    return report


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    out = _prepare_out(args, cfg)
    theta = xavier_init(cfg.architecture, cfg.sampling.seed)
    state = TrainState(theta, AdamState.zeros(cfg.architecture.param_count()),
                       cfg.initial_weights())
    t0 = time.perf_counter()
    state = train(state, cfg.architecture, cfg.pde, cfg.domain, cfg.sampling,
                  cfg.schedule, cfg.iterations,
                  progress=_progress_printer(cfg.iterations))
    duration = time.perf_counter() - t0
    report = _write_train_artifacts(out, cfg, state, duration)
    print(f"trained {cfg.iterations} iterations in {duration:.2f} s; "
          f"relative L2 vs exact at t={cfg.domain.t_max}: "
          f"{report['relative_l2']:.6e}")
    return EXIT_OK


def cmd_retrain(args) -> int:
    cfg = _resolve_config(args)
    ckpt = load_checkpoint(args.checkpoint)
    if args.config is None:
        cfg = replace(cfg, architecture=ckpt.architecture,
                      sampling=ckpt.sampling if args.seed is None
                      else replace(ckpt.sampling, seed=args.seed))
    elif ckpt.architecture != cfg.architecture:
        raise ConfigError(
            f"checkpoint architecture {ckpt.architecture} does not match "
            f"config architecture {cfg.architecture}")
    preserve = args.preserve_optimizer
    if preserve and ckpt.adam is None:
        raise ConfigError("--preserve-optimizer needs a checkpoint that "
                          "contains optimizer state, and this one has none")
    out = _prepare_out(args, cfg)

    adam = ckpt.adam if ckpt.adam is not None \
        else AdamState.zeros(cfg.architecture.param_count())
    state = TrainState(ckpt.params, adam, ckpt.weights, ckpt.iteration)
    grid = cfg.grid()
    x = grid.x_nodes(cfg.domain)
    before = _slice_report(
        cfg, predict(cfg.architecture, ckpt.params,
                     np.full_like(x, cfg.domain.t_max), x))
    lr = cfg.retrain_lr
    iterations = cfg.retrain_iterations
    t0 = time.perf_counter()
    state = retrain(state, cfg.architecture, cfg.pde, cfg.domain,
                    cfg.sampling, lr, iterations, preserve_optimizer=preserve,
                    progress=_progress_printer(ckpt.iteration + iterations))
    duration = time.perf_counter() - t0
    report = _write_train_artifacts(out, cfg, state, duration)
    write_json(out / "retrain_report.json", {
        "mode": "preserve" if preserve else "reset",
        "lr": lr,
        "iterations": iterations,
        "start_iteration": ckpt.iteration,
        "before": before.to_dict(),
        "after": {k: report[k] for k in ("relative_l2", "max_abs_error",
                                         "argmax_location", "n_points")},
        "metadata": _metadata(duration),
    })
    print(f"retrained {iterations} iterations "
          f"({'preserved' if preserve else 'reset'} optimizer) in "
          f"{duration:.2f} s; relative L2 vs exact at t={cfg.domain.t_max}: "
          f"{before.relative_l2:.6e} -> {report['relative_l2']:.6e}")
    return EXIT_OK


def cmd_fdm(args) -> int:
    cfg = _resolve_config(args)
    out = _prepare_out(args, cfg)
    grid = cfg.grid()
    t0 = time.perf_counter()
    matrix = solve(cfg.pde, cfg.domain, grid, keep_history=True)
    duration = time.perf_counter() - t0
    x = grid.x_nodes(cfg.domain)
    t = grid.t_levels(cfg.domain)
    write_grid_csv(out / "fdm_grid.csv", matrix, t, x)
    report = _report_dict(cfg, matrix, duration, "exact solution")
    write_json(out / "report.json", report)
    print(f"FDM solve ({grid.nx} nodes x {grid.nt} steps) in {duration:.3f} s; "
          f"relative L2 vs exact at t={cfg.domain.t_max}: "
          f"{report['relative_l2']:.6e}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _resolve_config(args)
    ckpt = load_checkpoint(args.checkpoint)
    if args.config is not None and ckpt.architecture != cfg.architecture:
        raise ConfigError(
            f"checkpoint architecture {ckpt.architecture} does not match "
            f"config architecture {cfg.architecture}")
    cfg = replace(cfg, architecture=ckpt.architecture)
    out = _prepare_out(args, cfg)
    grid = cfg.grid()
    x = grid.x_nodes(cfg.domain)
    t = grid.t_levels(cfg.domain)
    fdm_grid = solve(cfg.pde, cfg.domain, grid, keep_history=True)
    pinn_grid = predict_grid(cfg.architecture, ckpt.params, t, x)
    exact_grid = physics.exact_solution(cfg.pde, x[None, :], t[:, None])

    reports = metrics.compare_all(pinn_grid, fdm_grid, exact_grid, t, x)
    final = {
        "exact_vs_fdm": metrics.relative_l2(fdm_grid[-1], exact_grid[-1]),
        "exact_vs_pinn": metrics.relative_l2(pinn_grid[-1], exact_grid[-1]),
        "pinn_vs_fdm": metrics.relative_l2(pinn_grid[-1], fdm_grid[-1]),
    }
    write_json(out / "comparison.json", {
        "whole_domain": {k: r.to_dict() for k, r in reports.items()},
        "final_slice": {"t": cfg.domain.t_max, **final},
        "metadata": _metadata(0.0),
    })
    write_grid_csv(out / "error_exact_fdm.csv", np.abs(fdm_grid - exact_grid), t, x)
    write_grid_csv(out / "error_exact_pinn.csv", np.abs(pinn_grid - exact_grid), t, x)
    write_grid_csv(out / "error_pinn_fdm.csv", np.abs(pinn_grid - fdm_grid), t, x)
    print("relative L2 at t={}: exact vs FDM {:.6e}, exact vs network "
          "{:.6e}, network vs FDM {:.6e}".format(
              cfg.domain.t_max, final["exact_vs_fdm"],
              final["exact_vs_pinn"], final["pinn_vs_fdm"]))
    return EXIT_OK


def _add_common(p, *, seed=False, iterations=False, lr=False,
                weight_mode=False, grid_flags=True):
    p.add_argument("--config", metavar="PATH",
                   help="JSON experiment config (defaults used if omitted)")
    p.add_argument("--out", metavar="DIR", required=True,
                   help="output directory (created if missing)")
    if seed:
        p.add_argument("--seed", type=int, help="override sampling/init seed")
    if iterations:
        p.add_argument("--iterations", type=int,
                       help="override iteration count")
    if lr:
        p.add_argument("--lr", type=float, help="override learning rate")
    if weight_mode:
        p.add_argument("--weight-mode", choices=["fixed", "adaptive"],
                       help="loss-weighting mode")
    if grid_flags:
        p.add_argument("--nx", type=int, help="spatial nodes")
        p.add_argument("--nt", type=int, help="time steps")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fisher-pinn",
                     description="Physics-informed and finite-difference "
                                 "solvers for the 1D Fisher-KPP equation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a network from scratch")
    _add_common(p, seed=True, iterations=True, lr=True, weight_mode=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("retrain", help="resume training from a checkpoint")
    p.add_argument("checkpoint", help="checkpoint.json to resume from")
    p.add_argument("--preserve-optimizer", action="store_true",
                   help="keep Adam moments/step instead of resetting them")
    _add_common(p, seed=True, iterations=True, lr=True, weight_mode=True)
    p.set_defaults(func=cmd_retrain)

    p = sub.add_parser("fdm", help="run the finite-difference reference solver")
    _add_common(p)
    p.set_defaults(func=cmd_fdm)

    p = sub.add_parser("compare", help="three-way error study "
                                       "(exact / FDM / network)")
    p.add_argument("checkpoint", help="trained checkpoint.json")
    _add_common(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if e.code is not None else EXIT_OK
    try:
        _apply_thread_cap()
        return args.func(args)
    except (CflError, NonFiniteLossError, NonFiniteGradientError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
