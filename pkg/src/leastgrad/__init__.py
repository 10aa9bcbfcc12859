"""Least gradient problems on convex planar domains via boundary optimal
transport: solve, certify, and analyze minimal-total-variation extensions
of BV boundary data."""

from .boundary import (
    BoundaryBV,
    BoundaryMeasure,
    BoundaryMeasurePair,
    JumpSpec,
    MassAtom,
    Piece,
    discretize,
)
from .duality import (
    DualField,
    DualityReport,
    Potential,
    PotentialField,
    dual_field_z,
    dual_potentials,
    duality_report,
    extend_potential,
)
from .errors import (
    CrossingSegmentsError,
    GridTooSmallError,
    InconsistentTraceError,
    InteriorPointError,
    LeastGradError,
    NotOptimalError,
    NotStrictlyConvexError,
    NumericFailureError,
    OnCaseBoundaryError,
    OnJumpSetError,
    TooLargeError,
    UnbalancedError,
    ZeroMeasureError,
    ZeroVariationError,
)
from .fields import (
    DensityGrid,
    GridSpec,
    SbvSplit,
    boundary_mass,
    density_norms,
    rasterize_density,
    sbv_split,
)
from .geometry import (
    BoundaryPoint,
    ConvexDomain,
    ConvexPolygon,
    Disc,
    domain_from_json,
    hausdorff_boundary_distance,
)
from .harness import (
    MonotoneVerdict,
    StabilityReport,
    StepRecord,
    brothers_g1,
    brothers_g2,
    brothers_reference,
    check_monotone_polygon,
    quantize,
    run_data_stability,
    run_domain_approx,
)
from .pipeline import SolveResult, solve_lgp
from .reconstruct import (
    Chord,
    Face,
    PlanarSolution,
    Subdivision,
    assign_face_values,
    build_arrangement,
    evaluate_u,
    total_variation_solution,
)
from .transport import (
    CostNorm,
    PlanPair,
    PlanReport,
    TransportPlan,
    brute_force_oracle,
    count_crossings,
    plan_diagnostics,
    require_non_crossing,
    solve_kantorovich,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
