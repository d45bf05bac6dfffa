"""Homogeneity tests for functional data based on depth-versus-depth plots."""

__version__ = "0.1.0"

from .curves import (
    FunctionalSample,
    Grid,
    ModelSpec,
    load_sample_csv,
    make_grid,
    simulate_sample,
    split_by_label,
    write_sample_csv,
)
from .ddplot import DDPlot, DDPlotTest, OlsFit, TestResult, bootstrap_test, build_ddplot, fit_ols, t_statistics
from .depth import (
    FD2Depth,
    FMDepth,
    RPDepth,
    fd2_depth,
    fm_depth,
    halfspace_depth_2d,
    halfspace_depth_2d_oracle,
    rp_depth,
    univariate_fm_depth,
)
from .flores import FloresStats, FloresTest, depth_in_augmented, flores_statistics, flores_test
from .sim import ExperimentSpec, PowerTable, TestConfig, builtin_model, delta_sweep, m_sweep, run_experiment

__all__ = [
    "DDPlot", "DDPlotTest", "ExperimentSpec", "FD2Depth", "FMDepth", "FloresStats", "FloresTest",
    "FunctionalSample", "Grid", "ModelSpec", "OlsFit", "PowerTable", "RPDepth", "TestConfig",
    "TestResult", "bootstrap_test", "build_ddplot", "builtin_model", "delta_sweep", "depth_in_augmented",
    "fd2_depth", "fit_ols", "flores_statistics", "flores_test", "fm_depth", "halfspace_depth_2d",
    "halfspace_depth_2d_oracle", "load_sample_csv", "m_sweep", "make_grid", "rp_depth", "run_experiment",
    "simulate_sample", "split_by_label", "t_statistics", "univariate_fm_depth", "write_sample_csv",
]
