"""Exception hierarchy for pqlocal."""


class PQLocalError(Exception):
    """Base class for all pqlocal errors."""


class DimensionMismatch(PQLocalError):
    """Operands carry different matrix dimensions."""


class EvalAtPole(PQLocalError):
    """Series evaluated at lambda = 0 with negative orders retained."""


class NegativeOrderRecenter(PQLocalError):
    """Recentering requested for a series with a pole part."""


class ExpressionSyntaxError(PQLocalError):
    """Malformed expression text.

    ``position`` is the 0-based character index at which parsing failed.
    """

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownSymbol(PQLocalError):
    """Expression references a symbol not declared by the model."""

    def __init__(self, name, where=""):
        msg = f"unknown symbol '{name}'"
        if where:
            msg += f" in {where}"
        super().__init__(msg)
        self.name = name


class DivisionByZero(PQLocalError):
    """A coefficient expression hit a pole at the evaluation point."""


class SchemaError(PQLocalError):
    """Model document violates the schema.

    ``path`` addresses the offending element, e.g. ``/P/-2/0/1``.
    """

    def __init__(self, message, path="/"):
        super().__init__(f"{message} (at {path})")
        self.path = path


class DegenerateLeadingEigenvalues(PQLocalError):
    """Leading coefficient has (nearly) repeated eigenvalues."""


class NotConverged(PQLocalError):
    """Iterative seed solve failed to reach the requested tolerance."""


class InsufficientTruncation(PQLocalError):
    """Requested orders exceed what the supplied truncations support."""


class ResidualTooLarge(PQLocalError):
    """A stacked linear solve left a residual above tolerance."""


class StepFailure(PQLocalError):
    """Fixed-step integration produced non-finite values or failed its
    step-halving error check."""


class GridTooCoarse(PQLocalError):
    """Too few samples for the finite-difference stencil."""


class DegeneratePsi0(PQLocalError):
    """det(Psi0) dropped below the nondegeneracy threshold."""


class UnsupportedModel(PQLocalError):
    """Operation does not apply to this model's order structure."""


class UnsupportedLambdaEvaluation(PQLocalError):
    """Closed-form lambda evaluation is only available in the regular case."""


class UnknownEntry(PQLocalError):
    """Requested catalog entry does not exist."""
