"""Cached multistep flow-ODE samplers with Euler, Heun and RK-3 baselines."""

from ._core import (  # noqa: F401
    AffineField,
    CallableField,
    ConfigError,
    FormatError,
    GaussianMixtureFlowField,
    GridField,
    InvalidArgument,
    InvalidState,
    NumericalFailure,
    PolyTimeField,
    SingularSystem,
    StepError,
    VelocityField,
    __version__,
    compute_c,
    endpoint_error,
    energy_distance,
    fit_order,
    gaussian_w2,
    load_grid_field,
    make_shifted_schedule,
    make_uniform_schedule,
    sample,
    solve_b,
    sweep_csv,
)
