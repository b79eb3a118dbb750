"""Exception types shared across the package.

The CLI maps these onto process exit codes (see cli.py): invalid input and
exponent routing problems are usage errors (2), certification failures are 3,
resource caps are 4, accuracy/window problems are 5.
"""


class SchattenLabError(Exception):
    """Base class for all package errors."""


class InvalidInputError(SchattenLabError, ValueError):
    """Malformed or inconsistent input (shapes, non-finite entries, parse errors)."""


class ExponentError(SchattenLabError, ValueError):
    """Exponent outside [1, inf], or routed to an engine that does not support it."""


class UndefinedDirectionError(SchattenLabError, ValueError):
    """Duality map of the zero vector/matrix."""


class CertificationError(SchattenLabError):
    """Input fails a positivity/unitality/contractivity certificate."""


class PreconditionError(SchattenLabError):
    """A documented operation precondition does not hold."""


class ResourceError(SchattenLabError):
    """Requested computation exceeds the configured size caps."""


class WindowError(SchattenLabError):
    """Dilation verification requested beyond the faithful truncation window."""


class AccuracyError(SchattenLabError):
    """A numerical routine could not reach its required accuracy."""


class AxiomError(SchattenLabError):
    """A supplied algebraic structure violates its axioms (e.g. a bad Cayley table)."""
