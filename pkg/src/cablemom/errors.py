"""Exception and warning types raised by cablemom."""


class CableModelError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CableModelError, ValueError):
    pass


class OverlapError(ValidationError):
    pass


class HoleBreachError(ValidationError):
    pass


class TopologyError(ValidationError):
    pass


class GridError(ValidationError):
    pass


class DomainError(CableModelError, ValueError):
    pass


class EvalError(CableModelError, ArithmeticError):
    pass


class ConvergenceError(CableModelError, RuntimeError):
    pass


class SingularSystemError(CableModelError, ArithmeticError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class UnsupportedGeometryError(CableModelError, ValueError):
    pass


class ParseError(CableModelError, ValueError):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ThinWallWarning(UserWarning):
    pass


class TruncationWarning(UserWarning):
    pass


class PassivityWarning(UserWarning):
    pass


class RangeWarning(UserWarning):
    pass
