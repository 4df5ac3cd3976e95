"""Exception hierarchy shared by all modules."""


class MMOTError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(MMOTError, ValueError):
    """Input data violates a type invariant."""


class CapacityError(MMOTError):
    """An enumeration or evaluation budget would be exceeded."""


class InfeasibleError(MMOTError):
    """A linear program that should be feasible turned out not to be."""


class NumericalError(MMOTError):
    """Ill-conditioning or a failed numerical post-check."""


class CyclingError(NumericalError):
    """Too many consecutive degenerate pivots under Bland's rule."""


class NotMongeError(MMOTError):
    """An SAE state falls outside the equal-weight, uniform-marginal class."""
