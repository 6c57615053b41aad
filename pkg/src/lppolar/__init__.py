"""Lp-polarity toolkit.

Computes Lp-support functions, Lp-polar bodies and Mahler volumes, Lp-Santalo
points, and Steiner symmetrals of convex bodies, and numerically verifies the
Santalo-type inequalities relating them (exactly in dimensions 1-3, by Monte
Carlo above).
"""

from .bodies import (
    AffineImage,
    Ball,
    ConvexBody,
    Direction,
    Simplex,
    VPolytope,
    ball,
    barycenter,
    bodies_equal,
    body_from_dict,
    body_to_dict,
    direction,
    fiber_extent,
    halfspace_split_volume,
    materialize,
    regular_polygon,
    steiner_symmetral,
    transform,
    translate,
    triangulate,
    unit_ball_volume,
    volume,
    vpolytope,
)
from .corpus import corpus, random_hull
from .errors import (
    BallNonOrthogonal,
    BracketFailure,
    DegenerateBody,
    LpPolarError,
    NonIntegrable,
    NonInvertible,
    UnboundedLP,
    UnsupportedDimension,
    UnsupportedKind,
)
from .quadrature import (
    DEFAULT_SPEC,
    DividedDifferenceTable,
    QuadratureSpec,
    exp_divided_difference,
    exp_integral_simplex,
    radial_integral,
    sphere_nodes,
)
from .santalo import (
    SantaloResult,
    SantaloSolveOptions,
    SeparationResult,
    SeparationSearch,
    ball_reference,
    bergman_bound,
    santalo_point,
    separating_translation,
    split_fraction,
    steiner_pipeline,
)
from .support import (
    LpSupportEvaluator,
    P_INF,
    PExponent,
    PolarFunctional,
    exp_moment,
    h_p,
    lp_polar_transform_check,
    mahler_volume,
    polar_halfspace_volumes,
    polar_norm,
    polar_slice_length,
    polar_volume,
)
from .verify import (
    VerificationReport,
    hp_profiles,
    run_suite,
    sinh_log_convexity_slack,
    verify_ball_corollary,
    verify_hp_inequality,
    verify_main_theorem,
    verify_slice_inclusion,
    verify_volume_lemma,
)

__version__ = "0.1.0"
