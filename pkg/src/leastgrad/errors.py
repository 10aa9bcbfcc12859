"""Exception types shared across the package."""


class LeastGradError(Exception):
    """Base class for all domain/model errors."""


class InteriorPointError(LeastGradError):
    """Projection requested for a point strictly inside the domain."""


class ZeroMeasureError(LeastGradError):
    """The boundary measure is identically zero; the solution is constant."""


class ZeroVariationError(LeastGradError):
    """Rescaling requested for a datum with zero total variation."""


class UnbalancedError(LeastGradError):
    """Source and target masses differ beyond tolerance."""


class NumericFailureError(LeastGradError):
    """The transportation solver exceeded its anti-cycling iteration bound."""


class TooLargeError(LeastGradError):
    """Instance exceeds the brute-force oracle's size bound."""


class NotOptimalError(LeastGradError):
    """No feasible dual certificate exists for the given plan."""


class GridTooSmallError(LeastGradError):
    """A segment endpoint lies outside the rasterization grid."""


class CrossingSegmentsError(LeastGradError):
    """Plan segments cross in the interior; the plan is not usable."""


class InconsistentTraceError(LeastGradError):
    """A face touches boundary arcs whose datum values disagree."""


class OnJumpSetError(LeastGradError):
    """Evaluation point lies on the jump set of the solution."""


class OnCaseBoundaryError(LeastGradError):
    """Reference formula evaluated on a boundary between its case regions."""


class NotStrictlyConvexError(LeastGradError):
    """Operation requires a strictly convex domain."""
