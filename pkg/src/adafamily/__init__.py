"""Blended Adam-family optimizers with a deterministic benchmark harness."""

from .data import (
    Batch,
    BatchPlan,
    CsvFormatError,
    Dataset,
    batches,
    gen_gaussian_blobs,
    load_csv_dataset,
    split,
)
from .harness import (
    AggregateResult,
    Metric,
    ProblemSetup,
    RunConfig,
    RunResult,
    build_problem,
    default_lineup,
    lr_scale_for_epoch,
    lr_scale_sequence,
    register_problem,
    run_grid,
    run_single,
    sweep_mu_configs,
)
from .optim import (
    Algorithm,
    BufferMismatchError,
    DecayMode,
    NonFiniteGradientError,
    OptimizerConfig,
    OptimizerState,
    auxiliary_real_count,
    dump_state,
    init_state,
    load_state,
    normalization_factor,
    reset,
    step,
)
from .problems import (
    LogisticRegression,
    MLP1,
    Problem,
    Quadratic,
    Rosenbrock2D,
    eval_loss_grad,
    finite_diff_grad,
    init_params,
    relative_error,
    spd_quadratic,
)
from .tables import emit_table, parse_table_csv

__all__ = [
    "Algorithm",
    "AggregateResult",
    "Batch",
    "BatchPlan",
    "BufferMismatchError",
    "CsvFormatError",
    "Dataset",
    "DecayMode",
    "LogisticRegression",
    "MLP1",
    "Metric",
    "NonFiniteGradientError",
    "OptimizerConfig",
    "OptimizerState",
    "Problem",
    "ProblemSetup",
    "Quadratic",
    "Rosenbrock2D",
    "RunConfig",
    "RunResult",
    "auxiliary_real_count",
    "batches",
    "build_problem",
    "default_lineup",
    "dump_state",
    "emit_table",
    "eval_loss_grad",
    "finite_diff_grad",
    "gen_gaussian_blobs",
    "init_params",
    "init_state",
    "load_csv_dataset",
    "load_state",
    "lr_scale_for_epoch",
    "lr_scale_sequence",
    "normalization_factor",
    "parse_table_csv",
    "register_problem",
    "relative_error",
    "reset",
    "run_grid",
    "run_single",
    "spd_quadratic",
    "split",
    "step",
    "sweep_mu_configs",
]

__version__ = "0.1.0"
