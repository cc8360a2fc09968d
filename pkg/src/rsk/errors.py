class RskError(Exception):
    """Base class; ``code`` is the stable machine-readable name."""

    code = "RSK_ERROR"


class PreconditionError(RskError, ValueError):
    code = "PRECONDITION"


class ConstructionUnavailable(RskError, ValueError):
    code = "CONSTRUCTION_UNAVAILABLE"


class NondegeneracyError(RskError):
    code = "NONDEGENERACY_FAIL"

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class RoundingAmbiguous(RskError):
    code = "ROUNDING_AMBIGUOUS"


class ConditioningError(RskError, ValueError):
    code = "CONDITIONING"


class NegativeSpectrumError(RskError, ValueError):
    code = "NEGATIVE_SPECTRUM"


class LeavesTorusError(RskError):
    code = "LEAVES_TORUS"


class UnwrapError(RskError):
    code = "UNWRAP_FAIL"


class RingMismatchError(RskError, ValueError):
    code = "RING_MISMATCH"
