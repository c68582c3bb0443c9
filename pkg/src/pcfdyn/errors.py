"""Exception hierarchy shared by every module of the package."""


class PcfDynError(Exception):
    """Base class for all errors raised by :mod:`pcfdyn`."""


class ValidationError(PcfDynError, ValueError):
    """Input data is malformed or violates a structural invariant."""


class PreconditionError(PcfDynError):
    """An operation was called on data outside its domain."""


class ConsistencyError(PcfDynError):
    """Two independent computations of the same quantity disagree."""


class NotExpandingWithinHorizon(PcfDynError):
    def __init__(self, horizon):
        super().__init__(f"no expanding iterate found up to depth {horizon}")
        self.horizon = horizon


class Escaped(PcfDynError):
    """A point left the domain of the interval map.

    ``step`` is 1-based: ``Escaped(1)`` means the point itself is not in any
    subinterval.
    """

    def __init__(self, step):
        super().__init__(f"point escaped at step {step}")
        self.step = step


class LiftError(PcfDynError):
    """Base class for failures of numerical path lifting."""


class CriticalValueCollision(LiftError):
    def __init__(self, t, value):
        super().__init__(f"path passes within clearance of critical value {value!r} at t={t:.6g}")
        self.t = t
        self.value = value


class StepFailure(LiftError):
    def __init__(self, t, reason="corrector did not converge"):
        super().__init__(f"continuation failed at t={t:.6g}: {reason}")
        self.t = t


class AmbiguousTag(PcfDynError):
    """Homotopy tagging could not decide a curve's class; carries a report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}
