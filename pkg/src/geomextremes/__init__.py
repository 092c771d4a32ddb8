"""Extremes of geometric tuple statistics: simulation against limit laws.

The package samples Poisson and binomial point, hyperplane and k-flat
processes, scans tuples for the smallest values of a geometric functional,
and checks the scaled order statistics against their Weibull-type limits,
with Monte Carlo estimates of the quantities controlling the error bound.
"""

from .bodies import (
    ConvexBody,
    axis_box,
    ball,
    body_from_spec,
    convex_polygon,
    unit_ball_volume,
    unit_cube,
    unit_square,
)
from .bounds import BoundEstimate, estimate_alpha, estimate_r, theorem_bound_shape
from .config import (
    ConfigError,
    RunConfig,
    apply_overrides,
    load_config,
    load_config_text,
    model_from_config,
    parse_config,
    plan_from_config,
    render_config,
)
from .engine import (
    FunctionalSpec,
    ScaledOrderStatistics,
    count_in_window,
    min_distance_survey,
    min_pair_distance_grid,
    scan_tuples,
)
from .harness import (
    ExperimentPlan,
    ExperimentReport,
    empirical_survival,
    ks_distance,
    rate_regression,
    run_experiment,
    two_sample_ks,
)
from .kernels import (
    FlatDistanceResult,
    SimplexResult,
    flat_distance,
    largest_angle,
    line_pair_geometry,
    line_triple_areas,
    pair_distance,
    simplex_from_hyperplanes,
    subspace_bracket,
    triangle_flatness,
)
from .limits import (
    WeibullLimit,
    bracket_mean_mc,
    haar_bracket_mean,
    limit_flat_triangles,
    limit_gilbert_voronoi,
    limit_hyperplane_simplices,
    limit_kflats,
    weibull_survival,
)
from .models import (
    FlatTrianglesModel,
    GilbertVoronoiModel,
    HyperplaneSimplicesModel,
    KFlatModel,
    MODEL_NAMES,
    ModelSpec,
    build_model,
)
from .report import (
    ReportError,
    read_report,
    render_figures,
    render_tables,
    write_report,
)
from .sampling import (
    AffineFlat,
    DirectionLaw,
    Hyperplane,
    PointConfiguration,
    hyperplane_total_mass,
    sample_binomial_points,
    sample_hyperplane_process,
    sample_kflat_process,
    sample_poisson_points,
    uniform_in_body,
)

__version__ = "0.1.0"


def cli_main(argv=None) -> int:
    """Command-line dispatch; imported lazily to keep library imports light."""
    from .cli import cli_main as _cli_main

    return _cli_main(argv)


__all__ = [
    "AffineFlat",
    "BoundEstimate",
    "ConfigError",
    "ConvexBody",
    "DirectionLaw",
    "ExperimentPlan",
    "ExperimentReport",
    "FlatDistanceResult",
    "FlatTrianglesModel",
    "FunctionalSpec",
    "GilbertVoronoiModel",
    "Hyperplane",
    "HyperplaneSimplicesModel",
    "KFlatModel",
    "MODEL_NAMES",
    "ModelSpec",
    "PointConfiguration",
    "ReportError",
    "RunConfig",
    "ScaledOrderStatistics",
    "SimplexResult",
    "WeibullLimit",
    "apply_overrides",
    "axis_box",
    "ball",
    "body_from_spec",
    "bracket_mean_mc",
    "build_model",
    "cli_main",
    "convex_polygon",
    "count_in_window",
    "empirical_survival",
    "estimate_alpha",
    "estimate_r",
    "flat_distance",
    "haar_bracket_mean",
    "hyperplane_total_mass",
    "ks_distance",
    "largest_angle",
    "limit_flat_triangles",
    "limit_gilbert_voronoi",
    "limit_hyperplane_simplices",
    "limit_kflats",
    "line_pair_geometry",
    "line_triple_areas",
    "load_config",
    "load_config_text",
    "min_distance_survey",
    "min_pair_distance_grid",
    "model_from_config",
    "pair_distance",
    "parse_config",
    "plan_from_config",
    "rate_regression",
    "read_report",
    "render_config",
    "render_figures",
    "render_tables",
    "run_experiment",
    "sample_binomial_points",
    "sample_hyperplane_process",
    "sample_kflat_process",
    "sample_poisson_points",
    "scan_tuples",
    "simplex_from_hyperplanes",
    "subspace_bracket",
    "theorem_bound_shape",
    "triangle_flatness",
    "two_sample_ks",
    "uniform_in_body",
    "unit_ball_volume",
    "unit_cube",
    "unit_square",
    "weibull_survival",
    "write_report",
]
