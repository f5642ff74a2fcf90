"""Exception and warning types raised across the package."""


class DissipertError(Exception):
    """Base class for all package errors."""


class AnalyticClassViolation(DissipertError):
    """Function has Fourier support outside ``[0, inf)``."""


class KernelRangeError(DissipertError):
    """Littlewood-Paley bank does not cover the band of a function."""


class OrderMismatch(DissipertError):
    pass


class DivergentTail(DissipertError):
    pass


class SynthesisError(DissipertError):
    """Frequency data cannot be integrated (e.g. non-integrable at zero)."""


class DomainError(DissipertError):
    pass


class NotDissipative(DissipertError):
    pass


class SingularShift(DissipertError):
    pass


class UnitEigenvalue(DissipertError):
    pass


class HalfPlaneViolation(DissipertError):
    pass


class NegativeTime(DissipertError):
    pass


class NotContraction(DissipertError):
    pass


class MassDefect(DissipertError):
    pass


class ConfluenceError(DissipertError):
    pass


class NotSelfAdjoint(DissipertError):
    pass


class Unsupported(DissipertError):
    pass


class NoConvergence(DissipertError):
    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class ShapeError(DissipertError, ValueError):
    pass


class NotApplicable(DissipertError):
    pass


class SweepDegenerate(DissipertError):
    pass


class ReplayCorrupt(DissipertError):
    pass


class ConfigError(DissipertError):
    """Invalid experiment configuration; ``line`` is 1-based when known."""

    def __init__(self, message, line=None, path=None):
        super().__init__(message)
        self.line = line
        self.path = path

    def __str__(self):
        msg = super().__str__()
        loc = self.path or "<config>"
        if self.line is not None:
            return f"{loc}:{self.line}: {msg}"
        return f"{loc}: {msg}"


class TailWarning(UserWarning):
    """Littlewood-Paley series truncated with a non-negligible tail."""
