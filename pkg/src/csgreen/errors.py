"""Exception types raised by csgreen."""


class CSGreenError(Exception):
    """Base class for numerical failures in this package."""


class UnsupportedPowerError(ValueError):
    """Requested a potential power below -1."""


class PartitionError(ValueError):
    """Block size too small for the band width of the source matrix."""


class TailSingularityError(CSGreenError):
    """An inner matrix of the continued-fraction tail could not be inverted."""

    def __init__(self, depth, message=None):
        self.depth = depth
        super().__init__(message or f"singular continued-fraction term at block depth {depth}")


class NonConvergenceError(CSGreenError):
    """Tail depth cap reached before the Green's matrix stabilized."""

    def __init__(self, estimate, depth):
        self.estimate = estimate
        self.depth = depth
        super().__init__(
            f"continued fraction not converged at depth {depth} (last relative change {estimate:.3e})"
        )


class AtPoleError(CSGreenError):
    """The tail-corrected matrix is singular: z is an eigenvalue to working precision."""

    def __init__(self, z, cond=None):
        self.z = z
        self.cond = cond
        super().__init__(f"z = {z} is a pole of the Green's matrix (condition number {cond:.3e})")


class ContourError(CSGreenError):
    """The integration contour does not isolate a single simple pole."""
