"""Gromov-Hausdorff style distances between finite metric spaces and self-maps,
with shadowing-based conjugacy checks for finite dynamical systems."""

from .dynamics import (
    ConjugacyCheck,
    SelfMapSystem,
    c0_distance,
    gh0_distance,
    is_local_conjugacy,
    pgh0_distance,
    theorem_pointed_checks,
)
from .errors import *  # noqa: F401,F403
from .gh import (
    ApproxCertificate,
    MapTable,
    distortion,
    distortion_on,
    eps_inverse,
    gh_exact,
    gh_hat_exact,
    gh_sandwich,
    gh_upper,
    is_gha,
)
from .metric import (
    FiniteMetricSpace,
    PointedSpace,
    PointSet,
    ball,
    diameter,
    hausdorff,
    tube,
    validate_metric,
)
from .pointed import (
    DistanceInterval,
    PointedApproxParams,
    SpaceSequence,
    ball_sandwich_check,
    is_lcl,
    is_multipointed_gha,
    is_pointed_gha,
    map_convergence,
    pgh_distance,
    point_convergence,
    sequence_convergence,
    triangle_check,
)
from .stability import (
    PseudoOrbit,
    ScaleFunction,
    ShadowReport,
    build_conjugacy,
    estimate_expansivity,
    gamma_from,
    is_pseudo_orbit,
    remark32_check,
    separation_time,
    shadowing_points,
    stability_report,
    traces,
)

__version__ = "0.1.0"
