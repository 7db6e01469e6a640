"""Exception hierarchy shared by all modules."""


class NhgeoError(Exception):
    """Base class for every error raised by nhgeo."""


class DegeneracyError(NhgeoError, ArithmeticError):
    """The two levels coincide (|R| below tolerance).

    ``classification`` carries the :class:`~nhgeo.core.DegeneracyClass` when
    the caller had enough information to build one.
    """

    def __init__(self, message, classification=None, where=None):
        super().__init__(message)
        self.classification = classification
        self.where = where


class StringProximityError(NhgeoError, ArithmeticError):
    """Point lies on (or too close to) the Dirac string at the south pole."""


class CoordinateSingularityError(NhgeoError, ArithmeticError):
    """X^2 + Y^2 = 0 with X, Y not both zero: the azimuth is undefined."""


class ExceptionalPointError(NhgeoError, ArithmeticError):
    """Evaluation requested exactly at an exceptional point."""


class LevelCrossingError(NhgeoError, ArithmeticError):
    """Tracked level came within the gap tolerance of another level."""


class NonConvergenceError(NhgeoError, ArithmeticError):
    """Iteration or refinement did not reach the requested accuracy."""


class AmbiguousPairError(NhgeoError, ValueError):
    """Requested level pair is not the closest pair at the point."""


class StiffnessError(NhgeoError, ArithmeticError):
    """Adaptive step size underflowed."""


class ToleranceError(NhgeoError, ArithmeticError):
    """A conserved quantity drifted beyond its bound."""


class UnwrapError(NhgeoError, ArithmeticError):
    """A phase increment between stored steps exceeded pi/2."""


class BranchCutError(NhgeoError, ValueError):
    """Argument lies on the branch cut of a principal square root."""


class SingularModulusError(NhgeoError, ValueError):
    """Complete elliptic integral requested at k^2 = 1."""


class SingularArgumentError(NhgeoError, ValueError):
    """Closed form is singular at this argument."""


class ExceptionalCircleError(SingularArgumentError):
    """(h, delta) sits on the exceptional circle h^2 + delta^2 = 1."""


class DomainError(NhgeoError, ValueError):
    """Parameter outside the domain of the operation."""


class ConfigError(NhgeoError, ValueError):
    """Invalid scan configuration."""


class NearExceptionalWarning(UserWarning):
    """Quadrature ran with a relaxed tolerance close to the exceptional circle."""
