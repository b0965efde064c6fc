"""Worked scenarios and the two numerical studies.

The closed-form scenarios (box draws, diagnostic test, detective vs
jury) package the evidence arithmetic into small report objects.  The
two studies are numerical: discriminating between a pair of Gaussian
generators by accumulating evidence weights over repeated draws, and
Monte Carlo propagation of uncertainty through a nonlinear formula.

Randomness contract: every simulation is reproducible from its seed.
Walk trajectory i draws from ``default_rng(SeedSequence(seed,
spawn_key=(i,)))``, so a trajectory's stream depends only on (seed, i),
never on execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureError
from .evidence import (
    UncertainJL,
    combine_uncertain_jl,
    jl_from_odds,
    posterior_prob,
    update_odds,
)

__all__ = [
    "GaussianPair",
    "StepMoments",
    "WalkStatistics",
    "WalkResult",
    "PropagationStats",
    "BoxReport",
    "AidsReport",
    "ColumboReport",
    "gaussian_delta_jl",
    "crossing_points",
    "integer_evidence_table",
    "IntegerEvidenceRow",
    "walk_statistics",
    "simulate_walks",
    "walks_to_csv",
    "propagate_z",
    "histogram_to_csv",
    "box_report",
    "aids_report",
    "columbo_report",
]

_LN10 = math.log(10)


@dataclass(frozen=True)
class GaussianPair:
    """Two competing Gaussian generators for the same observable."""

    mu1: float = 0.0
    sigma1: float = 1.0
    mu2: float = 0.4
    sigma2: float = 2.0

    def __post_init__(self) -> None:
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise DomainError(
                f"standard deviations must be positive, got "
                f"{self.sigma1} and {self.sigma2}"
            )

    def log_density_1(self, x: float) -> float:
        z = (x - self.mu1) / self.sigma1
        return -0.5 * z * z - math.log(self.sigma1 * math.sqrt(2 * math.pi))

    def log_density_2(self, x: float) -> float:
        z = (x - self.mu2) / self.sigma2
        return -0.5 * z * z - math.log(self.sigma2 * math.sqrt(2 * math.pi))


def gaussian_delta_jl(x: float, g: GaussianPair | None = None) -> float:
    """Evidence weight of one observation: log10 of the density ratio.

    The finite observation resolution multiplies both densities by the
    same interval width, so it cancels and plain densities suffice.
    """
    g = g or GaussianPair()
    return (g.log_density_1(x) - g.log_density_2(x)) / _LN10


def crossing_points(g: GaussianPair | None = None) -> tuple[float, ...]:
    """Observations where the two densities are equal (weight exactly 0).

    Equal-width generators cross once; otherwise the log ratio is a
    quadratic with two roots and the weight is positive strictly
    between them when generator 1 is the narrower.
    """
    g = g or GaussianPair()
    a = 1 / (2 * g.sigma2**2) - 1 / (2 * g.sigma1**2)
    b = g.mu1 / g.sigma1**2 - g.mu2 / g.sigma2**2
    c = (
        g.mu2**2 / (2 * g.sigma2**2)
        - g.mu1**2 / (2 * g.sigma1**2)
        + math.log(g.sigma2 / g.sigma1)
    )
    if a == 0:
        if b == 0:
            return ()
        return (-c / b,)
    disc = b * b - 4 * a * c
    if disc < 0:
        return ()
    root = math.sqrt(disc)
    lo, hi = sorted(((-b - root) / (2 * a), (-b + root) / (2 * a)))
    return (lo, hi)


@dataclass(frozen=True)
class IntegerEvidenceRow:
    x: int
    bayes_factor: float
    delta_jl: float
    bf_display: str
    jl_display: str


def _two_sig(value: float) -> str:
    """Two significant figures, scientific below 0.1, trailing zeros kept."""
    if value == 0:
        return "0.0"
    if value < 0.1:
        mantissa, exp = f"{value:.1e}".split("e")
        return f"{mantissa}e{int(exp):+03d}"
    decimals = max(0, 1 - math.floor(math.log10(value)))
    return f"{value:.{decimals}f}"


def integer_evidence_table(
    g: GaussianPair | None = None,
    xs: range = range(-6, 7),
) -> tuple[IntegerEvidenceRow, ...]:
    """Bayes factor and weight for whole-number observations."""
    g = g or GaussianPair()
    rows = []
    for x in xs:
        jl = gaussian_delta_jl(x, g)
        bf = 10.0**jl
        rows.append(
            IntegerEvidenceRow(x, bf, jl, _two_sig(bf), f"{jl:.1f}")
        )
    return tuple(rows)


@dataclass(frozen=True)
class StepMoments:
    """Mean and spread of the per-draw evidence weight under one truth."""

    mean: float
    sd: float

    def scaled(self, n_draws: int) -> "StepMoments":
        if n_draws < 1:
            raise DomainError(f"n_draws must be >= 1, got {n_draws}")
        return StepMoments(n_draws * self.mean, math.sqrt(n_draws) * self.sd)

    @property
    def half_width_95(self) -> float:
        return 1.96 * self.sd

    @property
    def relative_uncertainty(self) -> float:
        return self.sd / abs(self.mean)


@dataclass(frozen=True)
class WalkStatistics:
    h1: StepMoments
    h2: StepMoments

    def for_truth(self, truth: str) -> StepMoments:
        if truth == "H1":
            return self.h1
        if truth == "H2":
            return self.h2
        raise DomainError(f"truth must be 'H1' or 'H2', got {truth!r}")


_QUAD_ABS_TOL = 1e-6


def _expectation(g: GaussianPair, truth: str, power: int) -> float:
    if truth == "H1":
        mu, sigma, log_pdf = g.mu1, g.sigma1, g.log_density_1
    else:
        mu, sigma, log_pdf = g.mu2, g.sigma2, g.log_density_2

    def integrand(x: float) -> float:
        delta = (g.log_density_1(x) - g.log_density_2(x)) / _LN10
        return delta**power * math.exp(log_pdf(x))

    value, abserr = integrate.quad(
        integrand, mu - 12 * sigma, mu + 12 * sigma,
        epsabs=_QUAD_ABS_TOL, epsrel=1e-10, limit=200,
    )
    if abserr > 10 * _QUAD_ABS_TOL:
        raise QuadratureError(
            f"moment integral reported error {abserr:.2e}, "
            f"above the {_QUAD_ABS_TOL:.0e} tolerance"
        )
    return value


def walk_statistics(g: GaussianPair | None = None) -> WalkStatistics:
    """Per-draw mean and sd of the evidence weight under each truth.

    Adaptive quadrature over the truth generator's central 12 sigma;
    the tails beyond contribute less than 1e-12.
    """
    g = g or GaussianPair()
    moments = []
    for truth in ("H1", "H2"):
        m1 = _expectation(g, truth, 1)
        m2 = _expectation(g, truth, 2)
        moments.append(StepMoments(m1, math.sqrt(m2 - m1 * m1)))
    return WalkStatistics(*moments)


@dataclass(frozen=True)
class WalkResult:
    """Cumulative evidence-weight walks simulated under a known truth."""

    trajectories: tuple[tuple[float, ...], ...]
    generator_truth: str
    seed: int
    n_draws: int

    @property
    def final_jls(self) -> tuple[float, ...]:
        return tuple(t[-1] for t in self.trajectories)

    def as_dict(self) -> dict:
        return {
            "generator_truth": self.generator_truth,
            "seed": self.seed,
            "n_draws": self.n_draws,
            "trajectories": [list(t) for t in self.trajectories],
        }


def simulate_walks(
    g: GaussianPair | None = None,
    truth: Literal["H1", "H2"] = "H1",
    n_draws: int = 50,
    n_traj: int = 100,
    seed: int = 0,
) -> WalkResult:
    """Accumulate the evidence weight of fresh draws from the true generator.

    Each trajectory starts at 0 and has ``n_draws + 1`` points.  Output
    is bit-identical for identical arguments.
    """
    g = g or GaussianPair()
    if truth not in ("H1", "H2"):
        raise DomainError(f"truth must be 'H1' or 'H2', got {truth!r}")
    if n_traj < 1:
        raise DomainError(f"n_traj must be >= 1, got {n_traj}")
    if n_draws < 0:
        raise DomainError(f"n_draws must be >= 0, got {n_draws}")
    mu, sigma = (g.mu1, g.sigma1) if truth == "H1" else (g.mu2, g.sigma2)
    trajectories = []
    for i in range(n_traj):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(i,))
        )
        draws = rng.normal(mu, sigma, n_draws)
        log_ratio = np.empty(n_draws + 1)
        log_ratio[0] = 0.0
        if n_draws:
            z1 = (draws - g.mu1) / g.sigma1
            z2 = (draws - g.mu2) / g.sigma2
            steps = (
                0.5 * (z2 * z2 - z1 * z1) + math.log(g.sigma2 / g.sigma1)
            ) / _LN10
            np.cumsum(steps, out=log_ratio[1:])
        trajectories.append(tuple(float(v) for v in log_ratio))
    return WalkResult(tuple(trajectories), truth, seed, n_draws)


def walks_to_csv(result: WalkResult) -> str:
    lines = ["traj_id,step,jl"]
    for tid, traj in enumerate(result.trajectories):
        for step, jl in enumerate(traj):
            lines.append(f"{tid},{step},{jl!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Monte Carlo propagation


@dataclass(frozen=True)
class PropagationStats:
    mean: float
    sd: float
    median: float
    modal_interval: tuple[float, float]  # (center, width as requested)
    histogram_edges: tuple[float, ...]
    histogram_masses: tuple[float, ...]
    n_samples: int
    seed: int

    def as_dict(self, include_histogram: bool = False) -> dict:
        out = {
            "mean": self.mean,
            "sd": self.sd,
            "median": self.median,
            "modal_interval": {
                "center": self.modal_interval[0],
                "width": self.modal_interval[1],
            },
            "n_samples": self.n_samples,
            "seed": self.seed,
        }
        if include_histogram:
            out["histogram"] = {
                "edges": list(self.histogram_edges),
                "masses": list(self.histogram_masses),
            }
        return out


_HISTOGRAM_BINS = 10_000


def propagate_z(
    n_samples: int = 1_000_000,
    seed: int = 1,
    interval_width: float = 0.02,
) -> PropagationStats:
    """Push uniform and triangular inputs through z = y sin(pi^4 + x^2) / sqrt(x^3 + y^2).

    x is uniform on (9, 11); y is triangular on (15, 30) with mode 20,
    sampled by inverse CDF.  The modal interval is the window of the
    requested width with the most sample mass, located by sliding over
    a 10^4-bin histogram at bin resolution.
    """
    if n_samples < 10_000:
        raise DomainError(f"n_samples must be >= 10000, got {n_samples}")
    if interval_width <= 0:
        raise DomainError(f"interval_width must be positive, got {interval_width}")
    rng = np.random.default_rng(seed)
    x = rng.uniform(9.0, 11.0, n_samples)
    y = rng.triangular(15.0, 20.0, 30.0, n_samples)
    z = y * np.sin(math.pi**4 + x * x) / np.sqrt(x**3 + y * y)

    counts, edges = np.histogram(z, bins=_HISTOGRAM_BINS)
    masses = counts / n_samples
    bin_width = edges[1] - edges[0]
    k = max(1, round(interval_width / bin_width))
    window = np.convolve(masses, np.ones(k), mode="valid")
    best = int(np.argmax(window))
    center = (edges[best] + edges[best + k]) / 2

    return PropagationStats(
        mean=float(np.mean(z)),
        sd=float(np.std(z)),
        median=float(np.median(z)),
        modal_interval=(float(center), interval_width),
        histogram_edges=tuple(float(e) for e in edges),
        histogram_masses=tuple(float(m) for m in masses),
        n_samples=n_samples,
        seed=seed,
    )


def histogram_to_csv(stats: PropagationStats) -> str:
    lines = ["bin_lo,bin_hi,mass"]
    edges, masses = stats.histogram_edges, stats.histogram_masses
    for i, mass in enumerate(masses):
        lines.append(f"{edges[i]!r},{edges[i + 1]!r},{mass!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Closed-form scenario reports


@dataclass(frozen=True)
class BoxStep:
    draws: int
    odds: Fraction | float
    probability: Fraction | float
    jl: float


@dataclass(frozen=True)
class BoxReport:
    """Running belief about an all-white box as white draws accumulate."""

    prior_odds: Fraction | float
    bf_per_white: Fraction | float
    steps: tuple[BoxStep, ...]

    def as_dict(self) -> dict:
        return {
            "prior_odds": float(self.prior_odds),
            "bf_per_white": float(self.bf_per_white),
            "steps": [
                {
                    "draws": s.draws,
                    "odds": float(s.odds),
                    "probability": float(s.probability),
                    "jl": s.jl,
                }
                for s in self.steps
            ],
            "black_draw": {"bayes_factor": 0.0, "posterior_probability": 0.0},
        }


def box_report(
    n_whites: int = 2,
    prior_odds: Fraction | float = 1,
    bf_per_white: Fraction | float = 13,
) -> BoxReport:
    """Sequential white draws, each multiplying the odds by the same factor.

    A black draw is not a step: it falsifies the all-white composition
    outright (Bayes factor 0), which the report notes separately.
    """
    if n_whites < 0:
        raise DomainError(f"n_whites must be >= 0, got {n_whites}")
    if isinstance(prior_odds, int):
        prior_odds = Fraction(prior_odds)
    if isinstance(bf_per_white, int):
        bf_per_white = Fraction(bf_per_white)
    steps = []
    odds = prior_odds
    for draw in range(n_whites + 1):
        steps.append(
            BoxStep(
                draws=draw,
                odds=odds,
                probability=posterior_prob(odds, 1),
                jl=jl_from_odds(odds),
            )
        )
        odds = update_odds(odds, bf_per_white)
    return BoxReport(prior_odds, bf_per_white, tuple(steps))


@dataclass(frozen=True)
class TestOutcome:
    result: str
    bayes_factor: Fraction
    delta_jl: float
    posterior_odds: Fraction
    posterior_jl: float
    posterior_probability: Fraction

    def as_dict(self) -> dict:
        return {
            "result": self.result,
            "bayes_factor": float(self.bayes_factor),
            "delta_jl": self.delta_jl,
            "posterior_odds": float(self.posterior_odds),
            "posterior_jl": self.posterior_jl,
            "posterior_probability": float(self.posterior_probability),
        }


@dataclass(frozen=True)
class AidsReport:
    """One screening test for a rare infection, read on the log-odds scale.

    The test is excellent (sensitivity 99.9%, false-positive rate 0.2%)
    yet a positive barely lifts an unselected subject past even odds,
    because the prior is three orders of magnitude against.
    """

    prior_odds: Fraction
    prior_jl: float
    positive: TestOutcome
    negative: TestOutcome
    two_positives_from_even_jl: float

    def as_dict(self) -> dict:
        return {
            "prior_odds": float(self.prior_odds),
            "prior_jl": self.prior_jl,
            "positive": self.positive.as_dict(),
            "negative": self.negative.as_dict(),
            "two_positives_from_even_jl": self.two_positives_from_even_jl,
        }


def aids_report() -> AidsReport:
    prior = Fraction(1, 399)
    bf_pos = Fraction(999, 2)     # 99.9 / 0.2
    bf_neg = Fraction(1, 998)     # 0.1 / 99.8
    outcomes = []
    for name, bf in (("positive", bf_pos), ("negative", bf_neg)):
        odds = update_odds(prior, bf)
        outcomes.append(
            TestOutcome(
                result=name,
                bayes_factor=bf,
                delta_jl=jl_from_odds(bf),
                posterior_odds=odds,
                posterior_jl=jl_from_odds(odds),
                posterior_probability=posterior_prob(prior, bf),
            )
        )
    return AidsReport(
        prior_odds=prior,
        prior_jl=jl_from_odds(prior),
        positive=outcomes[0],
        negative=outcomes[1],
        two_positives_from_even_jl=2 * jl_from_odds(bf_pos),
    )


@dataclass(frozen=True)
class ColumboReport:
    """The same modest clue read against two very different priors.

    The detective walks in convinced; the court starts skeptical.  A
    Bayes factor of 13 moves both leanings by the same 1.1, which
    settles nothing for the court and everything for the detective.
    """

    bayes_factor: float
    delta_jl: float
    detective_prior: UncertainJL
    detective_posterior: UncertainJL
    jury_prior: UncertainJL
    jury_posterior: UncertainJL

    def as_dict(self) -> dict:
        def u(x: UncertainJL) -> dict:
            return {"jl": x.mean, "half_width_95": x.half_width_95}

        return {
            "bayes_factor": self.bayes_factor,
            "delta_jl": self.delta_jl,
            "detective": {
                "prior": u(self.detective_prior),
                "posterior": u(self.detective_posterior),
            },
            "jury": {
                "prior": u(self.jury_prior),
                "posterior": u(self.jury_posterior),
            },
        }


def columbo_report(bayes_factor: float = 13.0) -> ColumboReport:
    if bayes_factor <= 0:
        raise DomainError(f"bayes_factor must be positive, got {bayes_factor}")
    delta = UncertainJL(math.log10(bayes_factor), 0.0)
    detective = UncertainJL(2.5, 0.5 / 1.96)
    jury = UncertainJL(-1.5, 0.5 / 1.96)
    return ColumboReport(
        bayes_factor=bayes_factor,
        delta_jl=delta.mean,
        detective_prior=detective,
        detective_posterior=combine_uncertain_jl([detective, delta]),
        jury_prior=jury,
        jury_posterior=combine_uncertain_jl([jury, delta]),
    )
