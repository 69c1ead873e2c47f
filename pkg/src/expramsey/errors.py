"""Exception hierarchy shared across the package.

Three rough bands: parse errors (malformed input text or files), evaluation
errors (a value exists mathematically but cannot be computed or certified
under the requested regime), and budget errors (a configured resource cap was
hit before the computation finished). Callers that need an exit code can map
the bands directly.
"""


class ExpRamseyError(Exception):
    """Base class for all package-specific errors."""


class ParseError(ExpRamseyError):
    """Malformed tower expression, colouring spec, sequence spec, or file."""


class ArityMismatch(ParseError):
    """Generator count disagrees with the arity a relation expects."""


class EvaluationError(ExpRamseyError):
    """A requested value could not be computed in the requested form."""


class ExactnessRequired(EvaluationError):
    """An exact integer was needed but only a Huge verdict is available."""


class UncertifiableLogStar(EvaluationError):
    """Interval bounds stayed too coarse to certify an iterated-log count."""


class UncertifiableComparison(EvaluationError):
    """Interval bounds stayed too coarse to certify a comparison."""


class UnsupportedShape(EvaluationError):
    """The term's structure lies outside the supported fragment for this op."""


class OutOfDomain(EvaluationError):
    """A colouring or map was evaluated outside its declared domain."""


class SymbolicUnsupported(EvaluationError):
    """The operation is defined for literal integers only."""


class WeightUndefined(EvaluationError):
    """A weight function was queried on a subset it does not define."""


class SequenceNotSufficientlyLacunary(ExpRamseyError):
    """A growth-ratio requirement failed while building a lacunary colouring."""


class BudgetError(ExpRamseyError):
    """A configured resource budget was exhausted before completion."""


class FactorizationBudgetExceeded(BudgetError):
    """Factorization gave up before finding a complete splitting."""


class BudgetExceeded(BudgetError):
    """Enumeration, generation, or search hit its cap or time budget."""
