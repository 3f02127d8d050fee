"""Exception hierarchy shared by all modules.

Every error raised on purpose by this package derives from ``ZbiasError``,
so callers (and the CLI) can distinguish domain failures from bugs.
"""


class ZbiasError(Exception):
    """Base class for all package errors."""


class ScenarioFormatError(ZbiasError):
    """A scenario file is syntactically malformed (bad line, unknown key or kind)."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvariantViolation(ZbiasError):
    """A scenario or result violates a structural constraint.

    ``field`` names the offending quantity when one can be singled out.
    """

    def __init__(self, message: str, field: str | None = None):
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class DegeneratePopulationError(ZbiasError):
    """Pr(A=1) is 0 or 1, so a conditional estimand has an empty population."""


class UndefinedStratumError(ZbiasError):
    """Pr(A=a, Z=z) = 0 on a stratum with positive mass, so E(Y|A=a,Z=z) is undefined."""


class UndefinedConditionalError(ZbiasError):
    """A conditional distribution required by a check has an empty conditioning event."""


class ZeroDenominatorError(ZbiasError):
    """A ratio-scale quantity has a zero denominator."""


class MissingOutcomeLawError(ZbiasError):
    """Distributional effects need a full outcome law, which the scenario lacks."""


class NonpositiveCellError(ZbiasError):
    """A multiplicative decomposition needs strictly positive cells."""


class NonBinaryOutcomeError(ZbiasError):
    """A check defined only for 0/1 outcomes was applied to something else."""


class PremiseViolationError(ZbiasError):
    """The caller invoked a lemma check on inputs outside the lemma's premises."""
