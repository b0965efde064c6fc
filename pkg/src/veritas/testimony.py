"""Effective Bayes factors for evidence that arrives through a witness.

A report "E happened" from a fallible witness is itself evidence, one
step removed from E.  Its Bayes factor follows from the total
probability of the report under each hypothesis:

    BF(E_T) = [P(E_T|E) P(E|H)  + P(E_T|~E) P(~E|H)]
              ---------------------------------------
              [P(E_T|E) P(E|H') + P(E_T|~E) P(~E|H')]

The reliability of the channel enters through the lie factor
lambda = P(E_T|~E) / P(E_T|E); the weight of the report can never
exceed -log10(lambda), however strong the underlying evidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, InconsistentParametersError, UndefinedEvidenceError
from .evidence import bayes_factor, odds_from_jl, prob_from_jl

__all__ = [
    "TestimonyChannel",
    "HypothesisLikelihoods",
    "WeightTable",
    "effective_bayes_factor",
    "effective_bf_factored",
    "effective_bf_degenerate",
    "testimony_weight",
    "testimony_weight_table",
    "WEIGHT_TABLE_COLUMNS",
]

Number = int | float | Fraction


def _require_prob(value: Number, name: str) -> None:
    if not 0 <= value <= 1:
        raise DomainError(f"{name} must be a probability in [0, 1], got {value!r}")


@dataclass(frozen=True)
class TestimonyChannel:
    """Report behavior of a witness: P(E_T|E) and P(E_T|~E).

    Together with their complements these form the full 2x2
    row-stochastic matrix of the channel, so asymmetric witnesses
    (different truthfulness about E and about ~E) are representable;
    `complement` reads the channel as seen by the opposite report.
    """

    __test__ = False  # keep pytest from collecting the Test... name

    p_report_given_true: Number
    p_report_given_false: Number

    def __post_init__(self) -> None:
        _require_prob(self.p_report_given_true, "p_report_given_true")
        _require_prob(self.p_report_given_false, "p_report_given_false")

    @property
    def lie_factor(self) -> Number:
        """lambda = P(E_T|~E)/P(E_T|E); undefined for a never-E-reporting witness."""
        if self.p_report_given_true == 0:
            raise DomainError("lie factor undefined: P(E_T|E) = 0")
        return self.p_report_given_false / self.p_report_given_true

    @property
    def j_lambda(self) -> float:
        """log10 of the lie factor (-inf for a witness that never lies)."""
        lam = self.lie_factor
        return -math.inf if lam == 0 else math.log10(lam)

    def matrix(self) -> tuple[tuple[Number, Number], tuple[Number, Number]]:
        """Rows (given E, given ~E); columns (reports E, reports ~E)."""
        q, r = self.p_report_given_true, self.p_report_given_false
        return ((q, 1 - q), (r, 1 - r))

    def complement(self) -> "TestimonyChannel":
        """The channel governing the report "~E happened"."""
        return TestimonyChannel(
            1 - self.p_report_given_false, 1 - self.p_report_given_true
        )


@dataclass(frozen=True)
class HypothesisLikelihoods:
    """P(E|H) and P(E|H') for the two hypotheses being compared."""

    p_e_given_h: Number
    p_e_given_hbar: Number

    def __post_init__(self) -> None:
        _require_prob(self.p_e_given_h, "p_e_given_h")
        _require_prob(self.p_e_given_hbar, "p_e_given_hbar")

    @property
    def ideal_bf(self) -> Number:
        """Bayes factor of observing E directly (no witness in between)."""
        return bayes_factor(self.p_e_given_h, self.p_e_given_hbar)

    def complement(self) -> "HypothesisLikelihoods":
        """Likelihoods of the complementary evidence ~E."""
        return HypothesisLikelihoods(1 - self.p_e_given_h, 1 - self.p_e_given_hbar)


def effective_bayes_factor(
    ch: TestimonyChannel, lk: HypothesisLikelihoods
) -> Number:
    """Bayes factor of the report E_T, by total probability under each hypothesis.

    Exact when fed exact numbers.  A zero denominator means the report
    cannot occur under the second hypothesis, so its occurrence is not
    interpretable as a ratio; that raises `UndefinedEvidenceError`.
    """
    q, r = ch.p_report_given_true, ch.p_report_given_false
    num = q * lk.p_e_given_h + r * (1 - lk.p_e_given_h)
    den = q * lk.p_e_given_hbar + r * (1 - lk.p_e_given_hbar)
    if den == 0:
        raise UndefinedEvidenceError(
            "the report has probability zero under the denominator hypothesis; "
            "its Bayes factor is not defined as a finite ratio."
        )
    return num / den


def effective_bf_factored(
    ideal_bf: Number, p_e_given_h: Number, lam: Number
) -> Number:
    """Same factor, written as a correction multiplying the ideal one.

        BF(E_T) = BF(E) x [1 + lam*(1/P(E|H) - 1)] / [1 + lam*(BF(E)/P(E|H) - 1)]

    Only valid for finite positive ideal_bf and P(E|H) > 0; the
    degenerate cases have their own closed forms
    (`effective_bf_degenerate`).
    """
    if not 0 < p_e_given_h <= 1:
        raise DomainError(
            "factored form needs 0 < P(E|H) <= 1; use effective_bf_degenerate"
        )
    if not 0 < ideal_bf < math.inf:
        raise DomainError(
            "factored form needs finite positive ideal_bf; "
            "use effective_bf_degenerate"
        )
    if lam < 0:
        raise DomainError(f"lie factor must be nonnegative, got {lam!r}")
    # denominators cleared by P(E|H) so exact inputs stay exact
    num = p_e_given_h + lam * (1 - p_e_given_h)
    den = p_e_given_h + lam * (ideal_bf - p_e_given_h)
    return ideal_bf * num / den


def effective_bf_degenerate(
    ch: TestimonyChannel, lk: HypothesisLikelihoods
) -> Number:
    """Closed forms for the two falsifying-likelihood cases.

    P(E|H) = 0:   BF = 1 / [P(~E|H') + P(E|H')/lambda]
    P(E|H') = 0:  BF = lambda*P(E|H) + P(~E|H)

    Exactly one of the two likelihoods must be zero.
    """
    h_zero = lk.p_e_given_h == 0
    hbar_zero = lk.p_e_given_hbar == 0
    if h_zero == hbar_zero:
        raise DomainError(
            "degenerate form applies when exactly one of P(E|H), P(E|H') is zero"
        )
    lam = ch.lie_factor
    if h_zero:
        if lam == 0:
            return 0  # a never-lying witness reporting the impossible
        return 1 / ((1 - lk.p_e_given_hbar) + lk.p_e_given_hbar / lam)
    return lam * lk.p_e_given_h + (1 - lk.p_e_given_h)


def testimony_weight(
    delta_jl_e: float, j_lambda: float, jl_e_given_h: float
) -> float:
    """Weight of a reported evidence, parametrized on the log scales.

    Reconstructs P(E|H) from ``jl_e_given_h`` (a leaning, so odds ->
    probability), sets P(E|H') = P(E|H) / 10**delta_jl_e, takes
    lambda = 10**j_lambda, and returns log10 of the effective Bayes
    factor.  P(E|H) itself cancels from the channel side, so the direct
    likelihood form is used:

        weight = log10( [P(E|H)  + lam*(1 - P(E|H)) ] /
                        [P(E|H') + lam*(1 - P(E|H'))] )

    Infinite arguments take their analytic limits.  A parametrization
    that implies P(E|H') > 1 is rejected, not clamped.
    """
    p_h = prob_from_jl(jl_e_given_h)
    p_hbar = p_h * odds_from_jl(-delta_jl_e)
    if p_hbar > 1:
        raise InconsistentParametersError(
            f"implied P(E|H') = {p_hbar} exceeds 1 "
            f"(delta_jl_e={delta_jl_e}, jl_e_given_h={jl_e_given_h})"
        )
    lam = odds_from_jl(j_lambda)
    if lam == math.inf:
        num, den = 1 - p_h, 1 - p_hbar
    elif lam == 0 and p_hbar > 0:
        # faithful witness: the report is as good as the evidence
        return float(delta_jl_e)
    else:
        num = p_h + lam * (1 - p_h)
        den = p_hbar + lam * (1 - p_hbar)
    if den == 0:
        if num == 0:
            raise UndefinedEvidenceError()
        return math.inf
    if num == 0:
        return -math.inf
    return math.log10(num / den)


WEIGHT_TABLE_COLUMNS = (10.0, 3.0, 2.0, 1.0, 0.0, -1.0, -3.0, -10.0)


@dataclass(frozen=True)
class WeightTable:
    """Grid of testimony weights over (j_lambda row, jl_e_given_h column)."""

    delta_jl_e: float
    j_lambda_rows: tuple[float, ...]
    jl_e_given_h_columns: tuple[float, ...]
    weights: tuple[tuple[float, ...], ...]

    def cell(self, j_lambda: float, jl_e_given_h: float) -> float:
        i = self.j_lambda_rows.index(j_lambda)
        j = self.jl_e_given_h_columns.index(jl_e_given_h)
        return self.weights[i][j]


def _default_rows(delta_jl_e: float) -> tuple[float, ...]:
    # -inf, then integer rows down from -(delta+2); near-zero channels get
    # the extra -0.5 row where the integer grid would be too coarse.
    deepest = math.ceil(delta_jl_e) + 2
    finite = [float(-k) for k in range(deepest, 0, -1)]
    if delta_jl_e <= 1:
        finite.append(-0.5)
    finite.append(0.0)
    return (-math.inf, *sorted(finite))


def testimony_weight_table(delta_jl_e: float) -> WeightTable:
    """Weights of a reported evidence across channel reliabilities.

    Rows sweep the lie factor (log scale, -inf = perfectly faithful up
    to 0 = uninformative); columns sweep how expected the evidence is
    under the favored hypothesis.
    """
    if not delta_jl_e > 0:
        raise DomainError(f"delta_jl_e must be positive, got {delta_jl_e!r}")
    rows = _default_rows(delta_jl_e)
    grid = tuple(
        tuple(testimony_weight(delta_jl_e, jlam, col) for col in WEIGHT_TABLE_COLUMNS)
        for jlam in rows
    )
    return WeightTable(delta_jl_e, rows, WEIGHT_TABLE_COLUMNS, grid)
