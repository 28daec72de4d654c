"""Exception types shared across the package."""


class BilliardError(Exception):
    """Base class for domain errors (the CLI maps these to exit code 1)."""


class AdmissibilityError(BilliardError, ValueError):
    """Triangle angles violate the delta margin."""


class InsufficientData(BilliardError):
    pass


class BudgetExceeded(BilliardError):
    pass


class AmbiguousHit(BilliardError):
    pass


class DuplicateAngle(BilliardError):
    pass


class HypothesisNotMet(BilliardError):
    pass


class SearchFailed(BilliardError):
    """Hypotheses of the close-triple search hold but no triple was found.

    This is a counterexample on the given data, so callers must
    surface it rather than swallow it.
    """


class ZeroPolynomial(BilliardError):
    pass


class Infeasible(BilliardError):
    pass


class DegenerateRange(BilliardError):
    pass


class PrecisionWarning(UserWarning):
    pass
