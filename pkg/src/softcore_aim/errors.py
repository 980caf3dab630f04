"""Exception hierarchy shared by every module of the package."""


class SoftcoreError(Exception):
    """Base class for all errors raised by softcore_aim."""


# numeric kernel
class PoleAtCenter(SoftcoreError, ZeroDivisionError):
    """A rational function was expanded about one of its poles."""


class CenterMismatch(SoftcoreError, ValueError):
    """Two Taylor series with different expansion points were combined."""


class OrderExhausted(SoftcoreError, ValueError):
    """A truncated series ran out of derivative orders."""


class NoSignChange(SoftcoreError, ValueError):
    """A bracket does not enclose a sign change."""


class MaxIterationsExceeded(SoftcoreError, RuntimeError):
    pass


class DegenerateInterval(SoftcoreError, ValueError):
    pass


# polynomial solutions
class DegenerateLeadingCoefficients(SoftcoreError, ValueError):
    pass


class LeadingCoefficientVanishes(SoftcoreError, ValueError):
    """The constructed polynomial has lower degree than requested."""


class UnsupportedDegree(SoftcoreError, ValueError):
    pass


class NoRootsInRange(SoftcoreError, ValueError):
    pass


class NonPolynomialConstraint(SoftcoreError, ValueError):
    pass


class NotInCatalog(SoftcoreError, KeyError):
    pass


# AIM
class NoConvergence(SoftcoreError, RuntimeError):
    """Roots of the termination condition did not settle over the N schedule.

    ``history`` holds the ``(N, root)`` pairs that were computed, so callers
    can still inspect the best available estimate.
    """

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)

    @property
    def best(self):
        """Root from the pair of successive N values that agreed most closely."""
        roots = [(n, e) for n, e in self.history if e is not None]
        if not roots:
            return None
        if len(roots) == 1:
            return roots[0][1]
        pairs = zip(roots, roots[1:])
        (_, _), (_, e) = min(pairs, key=lambda p: abs(p[1][1] - p[0][1]))
        return e


# models
class RequiresBetaZero(SoftcoreError, ValueError):
    pass


class InvalidProblem(SoftcoreError, ValueError):
    pass


class ConfigError(SoftcoreError, ValueError):
    """Configuration could not be parsed; carries the offending line/field."""

    def __init__(self, message, *, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field
