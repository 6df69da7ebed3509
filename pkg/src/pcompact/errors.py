"""Exception hierarchy shared across the package."""


class PCompactError(Exception):
    """Base class for all errors raised by pcompact."""


class CatalogMissError(PCompactError, KeyError):
    """Requested scheme label is not in the built-in catalog."""


class DerivationError(PCompactError):
    """The Taylor moment system could not be solved."""


class DegenerateSchemeError(PCompactError):
    """Scheme weights make the normalization divisor vanish."""


class FactorizationError(PCompactError):
    """No admissible real prefactorization exists.

    ``candidates`` holds every root found, so callers can inspect why
    the selection failed.
    """

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


class SingularSystemError(PCompactError):
    """A linear system that must be invertible turned out singular."""


class StencilOverflowError(PCompactError):
    """The grid is too small for the requested stencil."""


class ClosureError(PCompactError):
    """Boundary closure cannot supply the data a sweep needs."""


class PoleError(PCompactError):
    """A symbol denominator vanished."""


class DivergenceError(PCompactError):
    """Time marching produced a non-finite value."""

    def __init__(self, message, step=None, report=None):
        super().__init__(message)
        self.step = step
        self.report = report


class PostShockError(PCompactError):
    """Analytic Burgers solution requested at or beyond the shock time."""


class UndefinedOrderError(PCompactError, ValueError):
    """Observed order needs two positive errors on distinct grids."""


class BenchmarkInvalidError(PCompactError):
    """Timed run was too short to be resolved reliably."""


class GridMismatchError(PCompactError, ValueError):
    """Two grid functions compared on different grids."""
