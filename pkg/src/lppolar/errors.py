"""Exception types shared across the package."""


class LpPolarError(Exception):
    """Base class for all package-specific errors."""


class DegenerateBody(LpPolarError):
    """Body is lower-dimensional (empty interior) or otherwise unusable."""


class UnsupportedKind(LpPolarError):
    """Operation not defined for this body representation."""


class UnsupportedDimension(LpPolarError):
    """Requested an exact rule/algorithm outside its dimension range."""


class NonInvertible(LpPolarError):
    """Linear map is singular."""


class BallNonOrthogonal(LpPolarError):
    """A ball can only be mapped exactly by a scaled-orthogonal matrix."""


class NonIntegrable(LpPolarError):
    """Improper radial integral diverges (tail slope not positive)."""


class BracketFailure(LpPolarError):
    """Bisection bracket could not be established or evaluated."""


class UnboundedLP(LpPolarError):
    """Linear program is unbounded (should not happen for bounded bodies)."""
