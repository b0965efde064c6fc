"""Tests for witness-mediated Bayes factors.

The canonical channel is a witness who reports the true color of a
drawn ball with probability 5/6 (lie factor 1/5); the canonical
likelihoods are white draws from boxes with 13/13 vs 1/13 white balls.
"""

from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from veritas.errors import (
    DomainError,
    InconsistentParametersError,
    UndefinedEvidenceError,
)
from veritas.testimony import (
    WEIGHT_TABLE_COLUMNS,
    HypothesisLikelihoods,
    TestimonyChannel,
    effective_bayes_factor,
    effective_bf_degenerate,
    effective_bf_factored,
)
from veritas.testimony import testimony_weight as weight_of_report
from veritas.testimony import testimony_weight_table as weight_table_for

DIE_CHANNEL = TestimonyChannel(Fraction(5, 6), Fraction(1, 6))
WHITE_DRAW = HypothesisLikelihoods(Fraction(1), Fraction(1, 13))


class TestChannel:
    def test_lie_factor(self):
        assert DIE_CHANNEL.lie_factor == Fraction(1, 5)
        assert DIE_CHANNEL.j_lambda == pytest.approx(-math.log10(5))

    def test_faithful_witness_j_lambda(self):
        assert TestimonyChannel(0.8, 0).j_lambda == -math.inf

    def test_lie_factor_needs_positive_true_report(self):
        with pytest.raises(DomainError):
            TestimonyChannel(0, 0.3).lie_factor

    def test_matrix_rows_are_distributions(self):
        for row in TestimonyChannel(0.9, 0.3).matrix():
            assert sum(row) == 1

    def test_complement_of_symmetric_channel(self):
        assert DIE_CHANNEL.complement() == DIE_CHANNEL

    def test_asymmetric_channel_representable(self):
        ch = TestimonyChannel(0.9, 0.3)
        comp = ch.complement()
        assert comp.p_report_given_true == pytest.approx(0.7)
        assert comp.p_report_given_false == pytest.approx(0.1)
        back = comp.complement()
        assert back.p_report_given_true == pytest.approx(ch.p_report_given_true)
        assert back.p_report_given_false == pytest.approx(ch.p_report_given_false)

    def test_probability_validation(self):
        with pytest.raises(DomainError):
            TestimonyChannel(1.2, 0.1)


class TestEffectiveBayesFactor:
    def test_white_report_through_die_witness(self):
        bf = effective_bayes_factor(DIE_CHANNEL, WHITE_DRAW)
        assert bf == Fraction(65, 17)
        assert float(bf) == pytest.approx(3.82, abs=0.005)

    def test_black_report_through_die_witness(self):
        bf = effective_bayes_factor(
            DIE_CHANNEL.complement(), WHITE_DRAW.complement()
        )
        assert bf == Fraction(13, 61)
        assert float(bf) == pytest.approx(0.213, abs=5e-4)

    def test_perfect_witness_recovers_ideal(self):
        for q in (Fraction(1), Fraction(3, 4), Fraction(1, 10)):
            ch = TestimonyChannel(q, 0)
            assert effective_bayes_factor(ch, WHITE_DRAW) == 13

    def test_zero_denominator_is_undefined(self):
        ch = TestimonyChannel(1, 0)
        lk = HypothesisLikelihoods(1, 0)
        with pytest.raises(UndefinedEvidenceError):
            effective_bayes_factor(ch, lk)

    @given(
        st.fractions(min_value=Fraction(1, 20), max_value=1),
        st.fractions(min_value=0, max_value=1),
        st.fractions(min_value=Fraction(1, 100), max_value=1),
        st.fractions(min_value=Fraction(1, 100), max_value=1),
    )
    def test_lambda_one_gives_factor_one(self, q, _r, p_h, p_hbar):
        """A witness equally likely to report E either way says nothing."""
        ch = TestimonyChannel(q, q)
        lk = HypothesisLikelihoods(p_h, p_hbar)
        assert effective_bayes_factor(ch, lk) == 1

    @given(
        st.fractions(min_value=Fraction(1, 20), max_value=1),
        st.fractions(min_value=0, max_value=1),
        st.fractions(min_value=Fraction(1, 100), max_value=1),
        st.fractions(min_value=Fraction(1, 100), max_value=1),
    )
    def test_factored_form_matches_direct(self, q, r, p_h, p_hbar):
        ch = TestimonyChannel(q, r)
        lk = HypothesisLikelihoods(p_h, p_hbar)
        direct = effective_bayes_factor(ch, lk)
        factored = effective_bf_factored(lk.ideal_bf, p_h, ch.lie_factor)
        assert factored == direct  # exact: all-rational arithmetic

    def test_monotone_decreasing_in_lie_factor(self):
        lams = [k / 20 for k in range(1, 21)]
        factors = [effective_bf_factored(13, 1, lam) for lam in lams]
        assert all(a > b for a, b in zip(factors, factors[1:]))
        assert factors[-1] == 1  # lam = 1


class TestFactoredForm:
    def test_die_witness(self):
        assert effective_bf_factored(13, 1, Fraction(1, 5)) == Fraction(65, 17)

    def test_faithful_limit(self):
        assert effective_bf_factored(13, 0.7, 0) == 13

    def test_rejects_degenerate_inputs(self):
        with pytest.raises(DomainError):
            effective_bf_factored(13, 0, 0.2)
        with pytest.raises(DomainError):
            effective_bf_factored(0, 0.5, 0.2)
        with pytest.raises(DomainError):
            effective_bf_factored(math.inf, 0.5, 0.2)


class TestDegenerateForms:
    def test_impossible_under_h(self):
        lk = HypothesisLikelihoods(0, Fraction(12, 13))
        bf = effective_bf_degenerate(DIE_CHANNEL, lk)
        assert bf == Fraction(13, 61)
        # and it agrees with the direct computation
        assert bf == effective_bayes_factor(DIE_CHANNEL, lk)

    def test_impossible_under_hbar(self):
        lk = HypothesisLikelihoods(1, 0)
        assert effective_bf_degenerate(DIE_CHANNEL, lk) == Fraction(1, 5)

    def test_impossible_under_hbar_half(self):
        ch = TestimonyChannel(1, 0)  # never lies
        lk = HypothesisLikelihoods(0.5, 0)
        assert effective_bf_degenerate(ch, lk) == 0.5

    def test_requires_exactly_one_zero(self):
        with pytest.raises(DomainError):
            effective_bf_degenerate(DIE_CHANNEL, WHITE_DRAW)
        with pytest.raises(DomainError):
            effective_bf_degenerate(DIE_CHANNEL, HypothesisLikelihoods(0, 0))

    @given(st.fractions(min_value=Fraction(1, 50), max_value=Fraction(49, 50)),
           st.fractions(min_value=Fraction(1, 50), max_value=1))
    def test_h_zero_form_matches_direct(self, p_hbar, r):
        ch = TestimonyChannel(1, r)
        lk = HypothesisLikelihoods(0, p_hbar)
        assert effective_bf_degenerate(ch, lk) == effective_bayes_factor(ch, lk)


class TestWeightParametrization:
    @pytest.mark.parametrize(
        "delta,j_lambda,jl_h,expected,tol",
        [
            (6, -3, 0, 2.70, 0.005),
            (3, -2, -1, 1.00, 0.005),
            (1, -0.5, 0, 0.27, 0.005),
            (6, -8, -10, 4e-3, 5e-4),
        ],
    )
    def test_reference_cells(self, delta, j_lambda, jl_h, expected, tol):
        assert weight_of_report(delta, j_lambda, jl_h) == pytest.approx(
            expected, abs=tol
        )

    def test_faithful_witness_row_is_exact(self):
        for jl_h in WEIGHT_TABLE_COLUMNS:
            assert weight_of_report(6, -math.inf, jl_h) == 6.0

    def test_uninformative_witness_row_is_zero(self):
        for jl_h in WEIGHT_TABLE_COLUMNS:
            assert weight_of_report(6, 0, jl_h) == pytest.approx(0.0, abs=1e-12)

    def test_impossible_evidence_gives_no_weight(self):
        # P(E|H) -> 0 with the ideal factor held fixed: the report is
        # about something that almost surely did not happen either way.
        assert abs(weight_of_report(6, -3, -20)) < 1e-9

    def test_inconsistent_parameters_rejected(self):
        with pytest.raises(InconsistentParametersError):
            weight_of_report(-1, -1, 10)

    def test_faithful_witness_and_impossible_evidence_is_undefined(self):
        with pytest.raises(UndefinedEvidenceError):
            weight_of_report(6, -math.inf, -math.inf)

    @given(
        st.floats(min_value=0.1, max_value=8),
        st.floats(min_value=-8, max_value=-0.01),
        st.floats(min_value=-10, max_value=10),
    )
    def test_weight_bounded_by_channel_and_evidence(self, delta, j_lambda, jl_h):
        """The report is worth at most the evidence itself, and at most
        the (log) inverse lie factor, whichever is smaller."""
        w = weight_of_report(delta, j_lambda, jl_h)
        assert w <= min(delta, -j_lambda) + 1e-9

    @given(
        st.floats(min_value=0.1, max_value=8),
        st.floats(min_value=-8, max_value=0),
        st.floats(min_value=-10, max_value=10),
    )
    def test_weight_is_nonnegative_for_supporting_evidence(
        self, delta, j_lambda, jl_h
    ):
        assert weight_of_report(delta, j_lambda, jl_h) >= -1e-12


class TestWeightTable:
    def test_layout_for_strong_evidence(self):
        table = weight_table_for(6)
        assert table.j_lambda_rows == (
            -math.inf, -8.0, -7.0, -6.0, -5.0, -4.0, -3.0, -2.0, -1.0, 0.0,
        )
        assert table.jl_e_given_h_columns == WEIGHT_TABLE_COLUMNS
        assert len(table.weights) == len(table.j_lambda_rows)

    def test_layout_for_weak_evidence_includes_half_row(self):
        table = weight_table_for(1)
        assert table.j_lambda_rows == (-math.inf, -3.0, -2.0, -1.0, -0.5, 0.0)

    def test_cell_lookup(self):
        table = weight_table_for(3)
        assert table.cell(-2, -1) == pytest.approx(1.00, abs=0.005)
        assert table.cell(-math.inf, 10) == 3.0

    def test_rejects_nonpositive_delta(self):
        with pytest.raises(DomainError):
            weight_table_for(0)

    def test_rows_decrease_toward_uninformative(self):
        """Within any column, a less reliable witness never adds weight."""
        table = weight_table_for(3)
        for j in range(len(table.jl_e_given_h_columns)):
            column = [row[j] for row in table.weights]
            for above, below in zip(column, column[1:]):
                assert above >= below - 1e-12
