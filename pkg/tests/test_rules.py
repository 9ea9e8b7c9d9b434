"""Tests for tallies, apportionment, win rules and the rule validators."""

from fractions import Fraction

import pytest
from conftest import reverse_plurality
from hypothesis import given
from hypothesis import strategies as st

from sweeplab import (
    ElectionSpec,
    Rounding,
    Voter,
    WinRuleSpec,
    allocate_seats,
    make_rule,
    tally,
    validate_exclusivity,
    validate_monotonicity,
)
from sweeplab.model import RuleVariant
from sweeplab.rules import fptp_win_probs, pr_win_probs


@pytest.mark.unit
class TestTally:
    """Test vote counting."""

    def test_counts_only_voters_who_voted(self):
        """Test that abstainers do not count."""
        voters = [Voter(0, 0, 1), Voter(1, 1, 1), Voter(2, 0, 1)]
        assert tally({0, 1}, ElectionSpec(0), voters, 2) == (1, 1)
        assert tally(0b101, ElectionSpec(0), voters, 2) == (2, 0)

    def test_ineligible_ballots_are_discarded(self):
        """Test that a voter outside the eligibility set is not counted."""
        voters = [Voter(0, 0, 1), Voter(1, 1, 1)]
        election = ElectionSpec(0, WinRuleSpec.fptp(), frozenset({0}))
        assert tally(0b11, election, voters, 2) == (1, 0)

    def test_joint_ballot_lists(self):
        """Test that a ballot map folds parties onto shared lists."""
        voters = [Voter(0, 0, 1), Voter(1, 1, 1), Voter(2, 2, 1)]
        assert tally(0b111, ElectionSpec(0), voters, 2, ballot_of=[0, 0, 1]) == (2, 1)


@pytest.mark.unit
class TestFptp:
    """Test plurality win probabilities."""

    def test_clear_winner(self):
        """Test that the plurality winner takes probability 1."""
        assert fptp_win_probs((3, 5, 1)) == (0, 1, 0)

    def test_three_way_tie(self):
        """Test that a k-way tie gives each 1/k."""
        third = Fraction(1, 3)
        assert fptp_win_probs((2, 2, 2)) == (third, third, third)

    def test_empty_tally_is_a_full_tie(self):
        """Test that nobody voting is a tie between all parties."""
        assert fptp_win_probs((0, 0)) == (Fraction(1, 2), Fraction(1, 2))


@pytest.mark.unit
class TestApportionment:
    """Test seat allocation by every rounding."""

    @pytest.mark.parametrize(
        "counts,seats,rounding,expected",
        [
            ((100, 80, 30), 8, Rounding.DHONDT, (4, 3, 1)),
            ((47, 29, 24), 5, Rounding.HARE, (2, 2, 1)),
            ((47, 29, 24), 5, Rounding.DROOP, (3, 1, 1)),
            ((53, 24, 23), 7, Rounding.SAINTE_LAGUE, (3, 2, 2)),
            ((53, 24, 23), 7, Rounding.DHONDT, (4, 2, 1)),
            ((0, 0, 0), 5, Rounding.DHONDT, (2, 2, 1)),
            ((0, 0, 0), 5, Rounding.HARE, (2, 2, 1)),
        ],
    )
    def test_known_allocations(self, counts, seats, rounding, expected):
        """Test allocations worked out by hand."""
        assert allocate_seats(counts, WinRuleSpec.most_seats(seats, rounding)) == expected

    def test_quotient_tie_goes_to_lower_id(self):
        """Test that equal quotients award the seat to the lower party id."""
        assert allocate_seats((10, 10), WinRuleSpec.most_seats(1)) == (1, 0)

    @given(
        st.lists(st.integers(min_value=0, max_value=60), min_size=2, max_size=5),
        st.integers(min_value=1, max_value=9),
        st.integers(min_value=2, max_value=7),
        st.sampled_from([Rounding.DHONDT, Rounding.SAINTE_LAGUE]),
    )
    def test_divisor_allocation_ignores_vote_scale(self, counts, seats, factor, rounding):
        """Test that multiplying every tally by the same factor keeps the seats."""
        spec = WinRuleSpec.most_seats(seats, rounding)
        scaled = [factor * v for v in counts]
        assert allocate_seats(scaled, spec) == allocate_seats(counts, spec)

    def test_seats_always_add_up(self):
        """Test that every method hands out exactly the seat count."""
        for rounding in Rounding:
            for counts in [(7, 0, 3), (1, 1, 1), (13, 2, 9), (0, 0, 5)]:
                spec = WinRuleSpec.strict_majority(6, rounding)
                assert sum(allocate_seats(counts, spec)) == 6

    def test_fptp_spec_rejected(self):
        """Test that seat allocation needs a PR rule."""
        with pytest.raises(ValueError):
            allocate_seats((1, 2), WinRuleSpec.fptp())


@pytest.mark.unit
class TestPrRules:
    """Test the two PR win rules."""

    def test_most_seats_splits_ties(self):
        """Test that equal top seat counts share the win."""
        half = Fraction(1, 2)
        assert pr_win_probs((2, 2, 1), RuleVariant.PR_MOST_SEATS) == (half, half, 0)

    def test_strict_majority_needs_more_than_half(self):
        """Test that exactly half the seats is not a win."""
        assert pr_win_probs((2, 2), RuleVariant.PR_STRICT_MAJORITY) == (0, 0)
        assert pr_win_probs((3, 2), RuleVariant.PR_STRICT_MAJORITY) == (1, 0)

    def test_builtin_rule_applies_spec(self):
        """Test a bound rule end to end."""
        rule = make_rule(WinRuleSpec.strict_majority(8))
        assert rule((100, 80, 30)) == (0, 0, 0)
        assert rule((100, 20, 10)) == (1, 0, 0)

    def test_pooled_seats(self):
        """Test that post-poll partners pool seats before the rule applies."""
        rule = make_rule(WinRuleSpec.most_seats(4))
        assert allocate_seats((50, 30, 40), rule.spec) == (2, 1, 1)
        assert rule.pooled((50, 30, 40), (0, 0, 1), 2) == (1, 0)

    def test_pooled_fptp_sums_probabilities(self):
        """Test that FPTP pooling adds the members' win probabilities."""
        rule = make_rule(WinRuleSpec.fptp())
        assert rule.pooled((2, 2, 1), (0, 0, 1), 2) == (1, 0)


@pytest.mark.unit
class TestValidators:
    """Test the exhaustive exclusivity and monotonicity checks."""

    @pytest.mark.parametrize("parties", [2, 3])
    def test_fptp_passes(self, parties):
        """Test that FPTP satisfies both conditions."""
        rule = make_rule(WinRuleSpec.fptp())
        assert validate_exclusivity(rule, parties)
        assert validate_monotonicity(rule, parties)

    def test_dhondt_most_seats_two_parties_passes(self):
        """Test that D'Hondt with most-seats passes both conditions for two parties."""
        rule = make_rule(WinRuleSpec.most_seats(5, Rounding.DHONDT))
        assert validate_exclusivity(rule, 2)
        assert validate_monotonicity(rule, 2)

    @pytest.mark.parametrize("rounding", [Rounding.DHONDT, Rounding.SAINTE_LAGUE])
    def test_divisor_strict_majority_three_parties_passes(self, rounding):
        """Test that divisor methods with strict majority pass for three parties."""
        rule = make_rule(WinRuleSpec.strict_majority(5, rounding))
        assert validate_exclusivity(rule, 3)
        assert validate_monotonicity(rule, 3)

    def test_dhondt_most_seats_three_parties_fails(self):
        """Test the three-party most-seats counterexample."""
        spec = WinRuleSpec.most_seats(5, Rounding.DHONDT)
        assert allocate_seats((9, 7, 3), spec) == (3, 2, 0)
        assert allocate_seats((9, 7, 4), spec) == (2, 2, 1)
        rule = make_rule(spec)
        assert rule((9, 7, 3))[1] == 0
        assert rule((9, 7, 4))[1] == Fraction(1, 2)
        result = validate_monotonicity(rule, 3)
        assert not result
        assert result.counterexample is not None
        assert result.party != result.rival

    def test_hare_most_seats_three_parties_fails(self):
        """Test a largest-remainder counterexample found by hand."""
        rule = make_rule(WinRuleSpec.most_seats(3, Rounding.HARE))
        assert allocate_seats((0, 2, 2), rule.spec) == (0, 2, 1)
        assert allocate_seats((1, 2, 2), rule.spec) == (1, 1, 1)
        assert rule((0, 2, 2))[2] == 0
        assert rule((1, 2, 2))[2] == Fraction(1, 3)
        assert not validate_monotonicity(rule, 3, bound=2)

    @pytest.mark.parametrize("rounding", [Rounding.HARE, Rounding.DROOP])
    def test_largest_remainder_verdict_is_genuine(self, rounding):
        """Test that any reported counterexample really breaks monotonicity."""
        rule = make_rule(WinRuleSpec.strict_majority(5, rounding))
        result = validate_monotonicity(rule, 3)
        if result:
            assert result.counterexample is None
            return
        counts, s, r = result.counterexample, result.party, result.rival
        before = rule(counts)
        after = rule(counts[:s] + (counts[s] + 1,) + counts[s + 1 :])
        if r == s:
            assert after[s] < before[s]
        else:
            assert after[r] > before[r]

    def test_planted_rule_rejected(self):
        """Test that fewest-votes-wins is caught with a counterexample."""
        result = validate_monotonicity(reverse_plurality, 2, bound=3)
        assert not result
        assert result.counterexample == (0, 0)
        assert result.party == 0
        assert "lowers" in result.detail

    def test_exclusivity_violation(self):
        """Test that probabilities summing above 1 fail condition (a)."""
        result = validate_exclusivity(lambda counts: (Fraction(1),) * len(counts), 2, bound=1)
        assert not result
        assert result.counterexample == (0, 0)
