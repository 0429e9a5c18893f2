"""Exception types shared across the package."""

__all__ = [
    "FiberdynError",
    "SpaceMismatchError",
    "KindMismatchError",
    "DegreeBudgetError",
    "ConstructionError",
    "ConfigError",
]


class FiberdynError(Exception):
    """Base class for all package-specific errors."""


class SpaceMismatchError(FiberdynError, ValueError):
    """Operands are defined over different atomic measure spaces."""


class KindMismatchError(FiberdynError, ValueError):
    """Operands have incompatible fiber kinds (matrix vs trig poly, or sizes)."""


class DegreeBudgetError(FiberdynError, ArithmeticError):
    """A trigonometric-polynomial product would exceed the declared degree budget.

    Products of trig polynomials grow the degree; there is no silent
    truncation anywhere in the package, so an over-budget product is a hard
    error rather than a lossy approximation.
    """


class ConstructionError(FiberdynError, ValueError):
    """A bundle invariant failed at construction time.

    The message names the first offending atom and the violated invariant.
    """


class ConfigError(FiberdynError, ValueError):
    """An experiment configuration or input document is malformed.

    The message names the offending field.  The CLI maps this (and only
    this, plus argument-parsing failures) to exit code 2; invariant
    violations in otherwise well-formed inputs exit 1 instead.
    """
