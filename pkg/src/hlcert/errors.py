"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input lies outside the supported mathematical domain."""


class SingularExponentError(DomainError):
    """An exponent formula hit a zero denominator for these parameters."""


class TransferHypothesisError(DomainError):
    """The exponent-transfer hypothesis fails; the message names the failed condition."""


class BudgetError(RuntimeError):
    """Requested computation exceeds the configured enumeration or memory budget."""


class ViolationError(RuntimeError):
    """A certified inequality failed numerically.

    The inequalities checked by this package are proven theorems, so a
    violation always signals an implementation bug, never a counterexample.
    The CLI maps this to exit code 2.
    """
