"""Nystrom subsampling with stochastic gradient methods for kernel regression.

Inputs are row-major point sets: ``X`` has shape ``(n, d)``. One-dimensional
arrays are accepted where a point set is expected and read as ``(n, 1)``.
"""

from ._nysgm import (
    CvResult,
    DegenerateError,
    Dataset,
    ExperimentReport,
    FactorCore,
    InputError,
    IoError,
    KernelSpec,
    KrrModel,
    NumericalError,
    NystromFactor,
    ParseError,
    Predictor,
    Schedule,
    TrainConfig,
    Trajectory,
    batch_sample_iteration,
    build_factor,
    cross_validate_step_size,
    draw_index_stream,
    eval_grid,
    eval_kernel,
    factor,
    feature_matrix,
    format_csv,
    gen_toy,
    gram,
    krr_solve,
    load_csv,
    mean_squared_error,
    parse_csv,
    regime_schedule,
    run_experiment,
    save_csv,
    select_landmarks,
    toy_regression_function,
    train,
    train_with_stream,
    truncate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
