"""Tests for per-election win-probability functions and alignment checks."""

from fractions import Fraction

import pytest
from conftest import reverse_plurality

from sweeplab import WinRuleSpec, check_alignment, make_scenario, win_prob_function
from sweeplab.electorate import election_evaluators


@pytest.mark.unit
class TestWinProbFunction:
    """Test f_l^s on subsets of the electorate."""

    def test_micro_values(self, micro_scenario):
        """Test the lone voter's effect on party A's chances."""
        f = win_prob_function(micro_scenario, 0, 0)
        assert f(0) == Fraction(1, 2)
        assert f({0}) == 1
        assert f([]) == Fraction(1, 2)

    def test_eligibility_is_respected(self):
        """Test that ineligible turnout leaves the function unchanged."""
        scenario = make_scenario(
            ["A", "B"], [(0, 1), (1, 1)], [WinRuleSpec.fptp()], eligibility=[[0]]
        )
        f = win_prob_function(scenario, 0, 1)
        assert f({1}) == f(set()) == Fraction(1, 2)
        assert f({0, 1}) == 0

    def test_unknown_contender(self, micro_scenario):
        """Test that an out-of-range contender raises."""
        with pytest.raises(ValueError):
            win_prob_function(micro_scenario, 0, 2)

    def test_custom_rule(self, micro_scenario):
        """Test that a rule override replaces the built-in rule."""
        f = win_prob_function(micro_scenario, 0, 0, rule=reverse_plurality)
        assert f({0}) == 0

    def test_evaluators_cache_by_mask(self, three_election_scenario):
        """Test that repeated masks return the cached vector."""
        evaluate = election_evaluators(three_election_scenario)[0]
        assert evaluate(0b101) is evaluate(0b101)


@pytest.mark.unit
class TestCheckAlignment:
    """Test the alignment precondition of the monotonicity result."""

    def test_fptp_is_aligned(self, three_election_scenario):
        """Test that FPTP contenders are aligned."""
        for contender in range(2):
            assert check_alignment(three_election_scenario, contender)

    def test_planted_rule_breaks_alignment(self, micro_scenario):
        """Test that fewest-votes-wins in one election yields a witness."""
        result = check_alignment(micro_scenario, 0, rules={1: reverse_plurality})
        assert not result
        assert result.witness == (0, 1, ())

    def test_most_seats_three_parties_not_aligned(self):
        """Test that the three-party most-seats tie effect shows up as misalignment."""
        scenario = make_scenario(
            ["A", "B", "C"],
            [(1, 1), (1, 1), (2, 1), (2, 1), (0, Fraction(1, 2))],
            [WinRuleSpec.most_seats(3)],
        )
        result = check_alignment(scenario, 2)
        assert not result
        voter, election, subset = result.witness
        assert election == 0
        assert voter not in subset
        assert scenario.voters[voter].preferred_party != 2

    def test_voter_cap(self, three_election_scenario):
        """Test that large electorates are refused."""
        with pytest.raises(ValueError):
            check_alignment(three_election_scenario, 0, voter_cap=2)
