"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class RingError(ValueError):
    """Base class for every error raised by this package."""


class BadRingSize(RingError):
    pass


class AmplitudeUnderflow(RingError, ArithmeticError):
    """An oscillator amplitude fell to or below ``EPS_AMP``.

    ``step`` and ``time`` are filled in when the failure happens inside an
    integration loop.
    """

    def __init__(self, message: str, step: int | None = None, time: float | None = None):
        super().__init__(message)
        self.step = step
        self.time = time


class WavenumberOutOfRange(RingError):
    pass


class DetunedSystem(RingError):
    """Static eigenvalues requested for a ring with nonzero detuning."""


class ZeroDetuning(RingError):
    """Floquet analysis requested for a ring with zero detuning."""


class InadmissibleCoupling(RingError):
    """Phase-only coupling function violates g(x) + g(pi - x) = 0."""


class NonFiniteFlow(RingError, ArithmeticError):
    """Matrix flow produced inf/nan entries."""


class ConvergenceError(RingError, ArithmeticError):
    pass


class ConfigError(RingError):
    pass
