"""Belief arithmetic on the probability, odds and log-odds scales.

The same belief state can be read three ways: as a probability in
[0, 1], as odds ``p/(1-p)`` in [0, +inf], or as the base-10 logarithm of
the odds, here called the judgement leaning (JL).  Evidence enters as a
Bayes factor that multiplies the odds, equivalently as a JL increment
(the weight of evidence) that adds.

Plain Python arithmetic is used throughout so that exact types survive:
feed `fractions.Fraction` values in and the odds/posterior results stay
exact.  Logarithms necessarily come back as floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, UndefinedEvidenceError

__all__ = [
    "Belief",
    "UncertainJL",
    "DiscreteWeight",
    "odds_from_prob",
    "prob_from_odds",
    "jl_from_odds",
    "odds_from_jl",
    "jl_from_prob",
    "prob_from_jl",
    "bayes_factor",
    "update_odds",
    "posterior_prob",
    "combine_bayes_factors",
    "accumulate_jl",
    "jl_reference_table",
    "combine_uncertain_jl",
    "convolve_weights",
    "expected_frequency",
]

Number = int | float | Fraction


def _require_prob(value: Number, name: str) -> None:
    if isinstance(value, float) and math.isnan(value):
        raise DomainError(f"{name} must be a probability in [0, 1], got nan")
    if not 0 <= value <= 1:
        raise DomainError(f"{name} must be a probability in [0, 1], got {value!r}")


def _require_nonnegative(value: Number, name: str) -> None:
    if isinstance(value, float) and math.isnan(value):
        raise UndefinedEvidenceError()
    if value < 0:
        raise DomainError(f"{name} must be nonnegative, got {value!r}")


def odds_from_prob(p: Number) -> Number:
    """Odds ``p/(1-p)`` of a probability; ``p=1`` maps to +inf."""
    _require_prob(p, "p")
    if p == 1:
        return math.inf
    return p / (1 - p)


def prob_from_odds(o: Number) -> Number:
    """Probability ``o/(1+o)`` of odds; +inf maps to 1."""
    _require_nonnegative(o, "odds")
    if o == math.inf:
        return 1.0
    return o / (1 + o)


def jl_from_odds(o: Number) -> float:
    """Judgement leaning log10(odds); 0 and +inf map to -/+ inf."""
    _require_nonnegative(o, "odds")
    if o == 0:
        return -math.inf
    if o == math.inf:
        return math.inf
    return math.log10(o)


def odds_from_jl(jl: float) -> float:
    """Odds 10**jl; the infinities round-trip."""
    try:
        return 10.0 ** jl
    except OverflowError:
        return math.inf


def jl_from_prob(p: Number) -> float:
    """Judgement leaning of a probability (composition of the two maps)."""
    return jl_from_odds(odds_from_prob(p))


def prob_from_jl(jl: float) -> float:
    """Probability of a judgement leaning (composition of the two maps)."""
    return prob_from_odds(odds_from_jl(jl))


def bayes_factor(p_e_given_h1: Number, p_e_given_h2: Number) -> Number:
    """Likelihood ratio P(E|H1)/P(E|H2) of one piece of evidence.

    A zero numerator falsifies H1 (factor 0); a zero denominator
    falsifies H2 (factor +inf).  Both zero means the evidence is
    impossible under either hypothesis, which raises
    `UndefinedEvidenceError` rather than producing a number.
    """
    _require_prob(p_e_given_h1, "p_e_given_h1")
    _require_prob(p_e_given_h2, "p_e_given_h2")
    if p_e_given_h2 == 0:
        if p_e_given_h1 == 0:
            raise UndefinedEvidenceError()
        return math.inf
    return p_e_given_h1 / p_e_given_h2


def update_odds(prior: Number, bf: Number) -> Number:
    """Posterior odds = Bayes factor x prior odds.

    ``bf=0`` falsifies the numerator hypothesis (posterior odds 0);
    ``bf=+inf`` with a positive prior falsifies the denominator
    (posterior odds +inf).  The indeterminate products 0*inf raise
    `UndefinedEvidenceError`.
    """
    _require_nonnegative(prior, "prior odds")
    _require_nonnegative(bf, "bayes factor")
    if (bf == 0 and prior == math.inf) or (bf == math.inf and prior == 0):
        raise UndefinedEvidenceError()
    return bf * prior


def posterior_prob(x0: Number, b: Number) -> Number:
    """Posterior probability ``b*x0 / (1 + b*x0)`` from prior odds and a BF.

    Equal to the equivalent forms ``b/(b + 1/x0)`` and ``x0/(x0 + 1/b)``.
    Either argument at +inf forces probability 1; a zero Bayes factor
    forces 0.  ``x0=0`` with ``b=0`` (and the 0*inf pairings) raise
    `UndefinedEvidenceError`.
    """
    _require_nonnegative(x0, "prior odds")
    _require_nonnegative(b, "bayes factor")
    if (x0 == 0 and b == 0) or (x0 == 0 and b == math.inf) or (x0 == math.inf and b == 0):
        raise UndefinedEvidenceError()
    if x0 == math.inf or b == math.inf:
        return 1.0
    t = b * x0
    if t == math.inf:
        return 1.0
    return t / (1 + t)


def combine_bayes_factors(bfs: list[Number]) -> Number:
    """Product of Bayes factors of independent pieces of evidence.

    The empty product is 1.  A mix of 0 and +inf among the factors is
    contradictory (one member falsifies each hypothesis) and raises
    `UndefinedEvidenceError`.
    """
    for bf in bfs:
        _require_nonnegative(bf, "bayes factor")
    if any(bf == 0 for bf in bfs) and any(bf == math.inf for bf in bfs):
        raise UndefinedEvidenceError()
    return math.prod(bfs)


def accumulate_jl(prior: float, deltas: list[float]) -> float:
    """Prior judgement leaning plus the weights of independent evidence.

    The additive mirror of `combine_bayes_factors`: opposite infinities
    in the sum raise `UndefinedEvidenceError` instead of returning NaN.
    """
    terms = [prior, *deltas]
    if math.inf in terms and -math.inf in terms:
        raise UndefinedEvidenceError()
    return sum(terms)


@dataclass(frozen=True)
class Belief:
    """One belief state, constructed from and viewable on any scale."""

    p: float

    def __post_init__(self) -> None:
        _require_prob(self.p, "p")

    @classmethod
    def from_odds(cls, o: Number) -> "Belief":
        return cls(prob_from_odds(o))

    @classmethod
    def from_jl(cls, jl: float) -> "Belief":
        return cls(prob_from_jl(jl))

    @property
    def odds(self) -> float:
        return odds_from_prob(self.p)

    @property
    def jl(self) -> float:
        return jl_from_prob(self.p)


@dataclass(frozen=True)
class ReferenceRow:
    """One row of the JL reference table, raw values plus display strings."""

    jl: float
    odds: float
    percent: float
    odds_display: str
    percent_display: str


def _sig2(value: float) -> str:
    """Format to two significant figures, keeping trailing zeros ('0.050')."""
    if value == 0:
        return "0"
    exponent = math.floor(math.log10(abs(value)))
    decimals = max(0, 1 - exponent)
    rounded = round(value, 1 - exponent)
    return f"{rounded:.{decimals}f}"


def _percent_display(pct: float) -> str:
    # Mirrors the reference layout: two significant figures up to 91%,
    # one decimal place beyond (where the integer would hide the change).
    decimals = 1 if (pct < 10 or pct >= 92) else 0
    return f"{round(pct, decimals):.{decimals}f}"


def jl_reference_table() -> list[ReferenceRow]:
    """Reference rows mapping JL to odds and probability, jl in [-2, 2].

    Steps of 0.1; odds shown at two significant figures, probability at
    the conventional mixed precision (see `_percent_display`).
    """
    rows = []
    for tenths in range(-20, 21):
        jl = tenths / 10
        o = odds_from_jl(jl)
        pct = 100 * prob_from_odds(o)
        rows.append(ReferenceRow(jl, o, pct, _sig2(o), _percent_display(pct)))
    return rows


@dataclass(frozen=True)
class UncertainJL:
    """A judgement leaning with standard uncertainty.

    ``sd`` is a standard deviation.  Because a reader may intend "±" as
    a 95% range instead, `half_width_95` exposes the Gaussian 1.96*sd
    half-width alongside; report whichever convention the audience
    expects, or both.
    """

    mean: float
    sd: float = 0.0

    def __post_init__(self) -> None:
        if self.sd < 0 or math.isnan(self.sd):
            raise DomainError(f"sd must be nonnegative, got {self.sd!r}")

    @classmethod
    def from_uniform(cls, lo: float, hi: float) -> "UncertainJL":
        """Term distributed uniformly on [lo, hi]: sd = width/sqrt(12)."""
        if hi < lo:
            raise DomainError(f"empty uniform range [{lo}, {hi}]")
        return cls((lo + hi) / 2, (hi - lo) / math.sqrt(12))

    @property
    def half_width_95(self) -> float:
        return 1.96 * self.sd


def combine_uncertain_jl(terms: list[UncertainJL]) -> UncertainJL:
    """Sum of independent uncertain JL terms.

    Means add; standard uncertainties combine in quadrature.  The empty
    combination is the exact zero leaning.
    """
    mean = sum(t.mean for t in terms)
    sd = math.sqrt(sum(t.sd * t.sd for t in terms))
    return UncertainJL(mean, sd)


@dataclass(frozen=True)
class DiscreteWeight:
    """Weights over integer offsets, e.g. the spread of a sum of die rolls.

    Weights are relative (not normalized); integer weights stay exact
    under convolution.
    """

    offsets: tuple[int, ...]
    weights: tuple[Number, ...]

    def __post_init__(self) -> None:
        if len(self.offsets) != len(self.weights):
            raise DomainError("offsets and weights must have equal length")
        if len(set(self.offsets)) != len(self.offsets):
            raise DomainError("duplicate offsets")
        if any(w < 0 for w in self.weights):
            raise DomainError("weights must be nonnegative")
        if list(self.offsets) != sorted(self.offsets):
            order = sorted(range(len(self.offsets)), key=lambda i: self.offsets[i])
            object.__setattr__(self, "offsets", tuple(self.offsets[i] for i in order))
            object.__setattr__(self, "weights", tuple(self.weights[i] for i in order))

    @classmethod
    def delta(cls, offset: int = 0) -> "DiscreteWeight":
        return cls((offset,), (1,))

    @classmethod
    def uniform(cls, offsets: list[int]) -> "DiscreteWeight":
        return cls(tuple(offsets), (1,) * len(offsets))

    def as_dict(self) -> dict[int, Number]:
        return dict(zip(self.offsets, self.weights))


def convolve_weights(a: DiscreteWeight, b: DiscreteWeight) -> DiscreteWeight:
    """Discrete convolution: offsets add, weights multiply-accumulate."""
    acc: dict[int, Number] = {}
    for oa, wa in zip(a.offsets, a.weights):
        for ob, wb in zip(b.offsets, b.weights):
            acc[oa + ob] = acc.get(oa + ob, 0) + wa * wb
    offsets = tuple(sorted(acc))
    return DiscreteWeight(offsets, tuple(acc[o] for o in offsets))


def expected_frequency(p: Number, n: int) -> tuple[float, float]:
    """Expected count and its standard deviation for n independent trials."""
    _require_prob(p, "p")
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n!r}")
    return n * p, math.sqrt(n * p * (1 - p))
