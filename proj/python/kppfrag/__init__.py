"""Steady Fisher-KPP total population and its optimisation.

Fields are float64 arrays: shape (N,) on a line, (ny, nx) on a square.
"""

from ._kppfrag import (
    ConfigError,
    Error,
    InvalidArgument,
    IoError,
    NoConvergence,
    best_perturbation,
    bv_seminorm,
    crenel,
    efficiency_ratio,
    gradient,
    jump_count,
    lemma2_bound_sweep,
    mean,
    objective,
    optimize,
    periodisation_check,
    periodise,
    periodise_refined,
    random_fourier_guess,
    render_plot_svg,
    run,
    solve,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
