"""Physics-informed neural network and finite-difference solvers for the
1D Fisher-KPP equation, with a scalar autodiff engine, an explicit Adam
optimizer, and an experiment CLI."""

from .autodiff import Expr, UnboundVariableError
from .experiment import (Checkpoint, ConfigError, ExperimentConfig,
                         load_checkpoint, load_config, save_checkpoint)
from .fdm import CflError, Grid, cfl_limit, solve
from .metrics import ErrorReport, ZeroNormError, compare_all, error_field, relative_l2
from .network import (Architecture, ParameterShapeError, forward, predict,
                      predict_grid, xavier_init)
from .optimize import (AdamState, LrSchedule, NonFiniteGradientError,
                       adam_step, lr_at)
from .physics import (Domain, PdeParams, boundary_condition, exact_solution,
                      exact_solution_expr, initial_condition,
                      residual_operator, steepness, wave_speed)
from .pinn import (HistoryEntry, LossWeights, NonFiniteLossError, Points,
                   SamplingConfig, TrainState, loss_and_grads,
                   loss_components, retrain, sample_points, total_loss, train,
                   update_adaptive_weights)

__version__ = "0.1.0"

__all__ = [
    "Expr", "UnboundVariableError",
    "Checkpoint", "ConfigError", "ExperimentConfig",
    "load_checkpoint", "load_config", "save_checkpoint",
    "CflError", "Grid", "cfl_limit", "solve",
    "ErrorReport", "ZeroNormError", "compare_all", "error_field", "relative_l2",
    "Architecture", "ParameterShapeError", "forward", "predict",
    "predict_grid", "xavier_init",
    "AdamState", "LrSchedule", "NonFiniteGradientError", "adam_step", "lr_at",
    "Domain", "PdeParams", "boundary_condition", "exact_solution",
    "exact_solution_expr", "initial_condition", "residual_operator",
    "steepness", "wave_speed",
    "HistoryEntry", "LossWeights", "NonFiniteLossError", "Points",
    "SamplingConfig", "TrainState", "loss_and_grads", "loss_components",
    "retrain", "sample_points", "total_loss", "train",
    "update_adaptive_weights",
    "__version__",
]
