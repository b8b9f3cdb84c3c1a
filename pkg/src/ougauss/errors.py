"""Exception hierarchy shared by every module."""

from __future__ import annotations


class OUGaussError(Exception):
    """Base class for library errors."""


class ValidationError(OUGaussError, ValueError):
    """Bad input: dimension mismatch, parameter out of range, unknown name."""


class KernelRangeError(ValidationError):
    """Kernel requested in the near-diagonal small-t regime where it is unreliable."""


class InadmissibleFieldError(ValidationError):
    """The function fails the growth condition, so its Poisson integral does not exist."""


class ConvergenceError(OUGaussError, ArithmeticError):
    """Quadrature did not reach the requested tolerance.

    Carries the best available estimate and the achieved error bound so callers
    can decide whether the result is still usable.
    """

    def __init__(self, message: str, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error

    def to_dict(self) -> dict:
        def _plain(v):
            try:
                return [float(a) for a in v]
            except TypeError:
                return None if v is None else float(v)

        return {
            "error": "convergence",
            "message": str(self),
            "estimate": _plain(self.estimate),
            "achieved_error": _plain(self.error),
        }
