"""Exception types raised by memchan."""


class MemchanError(Exception):
    """Base class for all package errors."""


class ZeroVariance(MemchanError, ValueError):
    """A singular (delta) distribution was passed where a density is required."""


class SingularRegion(MemchanError, ValueError):
    """Parameters lie in the singular region (mu == 1 or sigma == 0)."""


class BlockMismatch(MemchanError, ValueError):
    """The number of blocks does not divide the number of modes."""


class DimensionMismatch(MemchanError, ValueError):
    pass


class NotOrthogonal(MemchanError, ValueError):
    pass


class DomainError(MemchanError, ValueError):
    pass


class QuadratureError(MemchanError, RuntimeError):
    """Adaptive quadrature did not reach its target.

    The achieved error estimate is kept on ``abserr``.
    """

    def __init__(self, message, abserr=float("nan")):
        super().__init__(f"{message} (error estimate {abserr:.3g})")
        self.abserr = abserr
