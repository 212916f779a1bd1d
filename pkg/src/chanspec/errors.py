"""Exception types shared across the package."""


class ChanspecError(Exception):
    """Base class for all package-specific errors."""


class NumericalError(ChanspecError):
    """Iteration cap hit, degeneracy, or a numerically meaningless request."""


class NotCompletelyPositive(ChanspecError):
    """Kraus extraction was requested for a map whose Choi matrix is not PSD."""


class InfeasibleError(ChanspecError):
    """The target provably violates a necessary condition (decision negative)."""


class SynthesisError(ChanspecError):
    """The search was exhausted without a construction; existence is not refuted."""
