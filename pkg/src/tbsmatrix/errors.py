"""Exception types raised by the library."""


class TbsError(Exception):
    """Base class for library errors."""


class InvalidArgumentError(TbsError, ValueError):
    pass


class NoOpenChannelError(TbsError):
    """No channel propagates at the requested energy."""


class SingularResolventError(TbsError):
    """E - H_eff cannot be inverted (real pole hit exactly)."""


class BandEdgeError(TbsError):
    """Wave-matching system is singular at a band edge (k = 0 or pi)."""


class DefectivePoleError(TbsError):
    """Pole expansion requested across a non-diagonalizable pole cluster."""


class ConvergenceError(TbsError):
    """Iterative root search did not converge."""
