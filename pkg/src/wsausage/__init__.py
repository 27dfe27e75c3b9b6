"""Monte Carlo laboratory for Wiener-sausage volumes on Euclidean space,
radial conformal metrics and the pre-Sierpinski gasket."""
from .asymptotics import (LimitConstant, RegimeClassification, capacity_ball,
                          classify_regime, conformal_limit_ratio, f_integral,
                          green_bm, lil_normalizers, psi, radial_limit,
                          sandwich_interval, scaled_limit_ratio)
from .engines import (RngSpec, SampledPath, exit_time, hitting_time,
                      sample_bm_path, sample_gasket_walk, sample_radial_path)
from .experiments import (EnsembleResult, ErrorBudget, FitResult, convergence_excess,
                          error_budget,
                          fit_limit, fluctuation_experiment, green_comparison,
                          lil_trace, run_ensemble, verify_sandwich)
from .sausage import (OccupancyGrid, SausageEstimate, graph_range,
                      max_visit_count, occupation_time, sausage_volume,
                      sausage_window)
from .space import (GasketGraph, HeatKernelParams, RadialMetricProfile,
                    ScalingFunction, SpaceDescriptor, gasket_neighbors,
                    measure_density, metric_factor, riemannian_distance_bound)

__version__ = "0.1.0"

__all__ = [
    "LimitConstant",
    "RegimeClassification",
    "capacity_ball",
    "classify_regime",
    "conformal_limit_ratio",
    "f_integral",
    "green_bm",
    "lil_normalizers",
    "psi",
    "radial_limit",
    "sandwich_interval",
    "scaled_limit_ratio",
    "RngSpec",
    "SampledPath",
    "exit_time",
    "hitting_time",
    "sample_bm_path",
    "sample_gasket_walk",
    "sample_radial_path",
    "EnsembleResult",
    "ErrorBudget",
    "FitResult",
    "error_budget",
    "convergence_excess",
    "fit_limit",
    "fluctuation_experiment",
    "green_comparison",
    "lil_trace",
    "run_ensemble",
    "verify_sandwich",
    "OccupancyGrid",
    "SausageEstimate",
    "graph_range",
    "max_visit_count",
    "occupation_time",
    "sausage_volume",
    "sausage_window",
    "GasketGraph",
    "HeatKernelParams",
    "RadialMetricProfile",
    "ScalingFunction",
    "SpaceDescriptor",
    "gasket_neighbors",
    "measure_density",
    "metric_factor",
    "riemannian_distance_bound",
]
