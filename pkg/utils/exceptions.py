"""Exception types shared by every package"""


class QpmKitError(Exception):
    """Base class for all toolkit errors"""


class ConfigError(QpmKitError):
    """Bad config file, unit, material name, band or configured object"""


class RangeError(QpmKitError, ValueError):
    """Input outside a model's validity window"""

    def __init__(self, axis, value, window):
        self.axis = axis
        self.value = value
        self.window = window
        super().__init__(
            f"{axis} {value!r} outside valid range [{window[0]}, {window[1]}]"
        )


class ContractViolation(QpmKitError, ValueError):
    """Caller broke a precondition of an operation"""


class ShapeError(QpmKitError, ValueError):
    """Two fields that must share a grid do not"""


class SolverError(QpmKitError):
    """Eigen-solver failure, with iteration diagnostics"""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        if self.diagnostics:
            details = ", ".join(f"{k}={v}" for k, v in self.diagnostics.items())
            message = f"{message} ({details})"
        super().__init__(message)


class ModelValidityError(QpmKitError):
    """Pair-statistics model used outside its validity range"""
