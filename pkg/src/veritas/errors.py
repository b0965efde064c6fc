"""Exception types shared across the library.

Numeric degeneracies get their own types so callers (and the CLI exit-code
mapping) can tell a bad argument from a genuinely undefined result.
"""

from __future__ import annotations

__all__ = [
    "VeritasError",
    "DomainError",
    "UndefinedEvidenceError",
    "QuadratureError",
    "InconsistentParametersError",
    "NetworkValidationError",
    "ImpossibleFindingsError",
    "StateSpaceTooLargeError",
]


class VeritasError(Exception):
    """Base class for all library-specific errors."""


class DomainError(VeritasError, ValueError):
    """An argument is outside the mathematical domain of the operation."""


class UndefinedEvidenceError(VeritasError, ArithmeticError):
    """The evidence is impossible under every hypothesis considered.

    A 0/0 Bayes factor carries no information about the hypotheses at
    hand; it signals that the hypothesis set itself is wrong.  The
    message deliberately says so instead of letting NaN leak out.
    """

    def __init__(self, message: str | None = None):
        super().__init__(
            message
            or "Bayes factor is 0/0: the evidence is impossible under every "
            "hypothesis considered; seek other hypotheses."
        )


class QuadratureError(VeritasError, ArithmeticError):
    """Numerical integration failed to reach the requested tolerance."""


class InconsistentParametersError(DomainError):
    """A parametrization implies a probability outside [0, 1]."""


class NetworkValidationError(VeritasError):
    """A network description violates structural rules.

    ``problems`` lists every violation found, one human-readable string
    each, so callers can report them all at once.
    """

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class ImpossibleFindingsError(VeritasError):
    """The joint finding set has probability zero under the network."""

    def __init__(self, findings: dict[str, str]):
        self.findings = dict(findings)
        shown = ", ".join(f"{n}={s}" for n, s in self.findings.items())
        super().__init__(
            f"findings {{{shown}}} have probability zero under this network; "
            "seek other hypotheses."
        )


class StateSpaceTooLargeError(VeritasError):
    """Joint enumeration was asked for more states than the oracle allows."""
