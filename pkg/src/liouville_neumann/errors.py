"""Exception hierarchy shared by all modules."""


class LiouvilleError(Exception):
    """Base class for every error raised by this package."""


class ConstraintViolation(LiouvilleError, ValueError):
    pass


class DegenerateInput(LiouvilleError, ValueError):
    pass


class DomainError(LiouvilleError, ValueError):
    pass


class CriticalPoint(LiouvilleError, ArithmeticError):
    pass


class PoleEvaluation(LiouvilleError, ArithmeticError):
    pass


class StepTooLarge(LiouvilleError):
    pass


class RangeViolation(LiouvilleError, ValueError):
    """1 + K|g|^2 <= 0 was met for K <= 0."""


class SymmetryViolation(LiouvilleError, ValueError):
    pass


class NormalizationFailure(LiouvilleError, RuntimeError):
    """Internal bug: no det-1 coefficients reproduce the requested data."""


class NoSolution(LiouvilleError):
    """No finite-area canonical solution exists for the requested data."""


class PoleProximity(LiouvilleError, ValueError):
    pass


class StepUnderflow(LiouvilleError, RuntimeError):
    pass


class GridTooCoarse(LiouvilleError):
    pass


class MarginViolation(LiouvilleError, ValueError):
    pass


class DegenerateFit(LiouvilleError):
    pass


class FitFailure(LiouvilleError):
    pass


class VertexLimitNonconvergent(LiouvilleError):
    pass


class NoBracket(LiouvilleError):
    pass
