"""Tests for domain types, validation and canonical forms."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sweeplab import (
    Alliance,
    AllianceStructure,
    ElectionSpec,
    PartitionError,
    Scenario,
    ScenarioError,
    Schedule,
    Voter,
    WinRuleSpec,
    boost_turnout,
    canonicalize_partition,
    canonicalize_schedule,
    make_scenario,
    validate_scenario,
)
from sweeplab.model import Rounding, RuleVariant, ensure_valid, to_probability, with_types


@pytest.mark.unit
class TestProbabilities:
    """Test conversion of turnout probabilities to exact rationals."""

    def test_ratio_string_is_exact(self):
        """Test that '1/3' stays exactly one third."""
        assert to_probability("1/3") == Fraction(1, 3)

    def test_decimal_float_uses_decimal_digits(self):
        """Test that 0.1 becomes 1/10 rather than the nearest binary float."""
        assert to_probability(0.1) == Fraction(1, 10)

    def test_decimal_string(self):
        """Test that '0.25' becomes 1/4."""
        assert to_probability("0.25") == Fraction(1, 4)

    def test_bool_rejected(self):
        """Test that booleans are not accepted as probabilities."""
        with pytest.raises(TypeError):
            to_probability(True)

    def test_voter_coerces_probability(self):
        """Test that a Voter stores its turnout probability as a Fraction."""
        voter = Voter(0, 0, "2/5")
        assert voter.turnout_prob == Fraction(2, 5)


@pytest.mark.unit
class TestValidateScenario:
    """Test scenario validation."""

    def test_valid_scenario_has_no_violations(self, three_election_scenario):
        """Test that a well-formed scenario validates clean."""
        assert validate_scenario(three_election_scenario) == []

    def test_probability_out_of_range(self):
        """Test that turnout 1.3 yields one violation naming the voter and field."""
        scenario = make_scenario(["A", "B"], [(0, "1/2"), (1, "1.3")], [WinRuleSpec.fptp()])
        violations = validate_scenario(scenario)
        assert len(violations) == 1
        assert violations[0].entity == "voter"
        assert violations[0].ident == 1
        assert violations[0].field == "turnout_prob"

    def test_overlapping_blocks(self, three_election_scenario):
        """Test that overlapping blocks in a voter's partition are reported."""
        schedule = Schedule(
            {0: ((0, 1), (1, 2)), 1: ((0, 1, 2),), 2: ((0, 1, 2),)}
        )
        violations = validate_scenario(three_election_scenario, schedule)
        assert any("overlapping" in v.message for v in violations)
        assert all(v.entity == "schedule" for v in violations)

    def test_unknown_party(self):
        """Test that a voter preferring an unknown party is reported."""
        scenario = make_scenario(["A"], [(3, "1/2")], [WinRuleSpec.fptp()])
        (violation,) = validate_scenario(scenario)
        assert violation.field == "preferred_party"

    def test_empty_scenario(self):
        """Test that a scenario with no parties, voters or elections is reported."""
        violations = validate_scenario(Scenario((), (), ()))
        assert {v.field for v in violations} == {"parties", "voters", "elections"}

    def test_pr_rule_without_seats(self):
        """Test that a PR rule needs a seat count."""
        scenario = make_scenario(
            ["A", "B"], [(0, 1)], [WinRuleSpec.most_seats(0)]
        )
        assert [v.field for v in validate_scenario(scenario)] == ["rule.seats"]

    def test_violations_are_ordered(self):
        """Test that voter violations come before election violations."""
        scenario = Scenario(
            ("A",),
            (Voter(0, 0, Fraction(2)),),
            (ElectionSpec(0, WinRuleSpec.most_seats(0)),),
        )
        entities = [v.entity for v in validate_scenario(scenario)]
        assert entities == ["voter", "election"]

    def test_party_outside_every_alliance(self):
        """Test that a party missing from the alliances is reported against the party."""
        scenario = make_scenario(
            ["A", "B", "C"],
            [(0, "1/2"), (2, "1/3")],
            [WinRuleSpec.fptp()],
            alliances=AllianceStructure((Alliance((0, 1)),)),
        )
        (violation,) = validate_scenario(scenario)
        assert (violation.entity, violation.ident, violation.field) == ("party", 2, "alliance")
        assert "0 alliances" in violation.message

    @given(st.data())
    def test_malformed_scenarios_are_reported_not_raised(self, data):
        """Test that arbitrary broken scenarios come back as sorted violations."""
        parties = data.draw(st.lists(st.sampled_from("ABCD"), max_size=4))
        voters = data.draw(
            st.lists(
                st.builds(
                    Voter,
                    st.integers(min_value=-1, max_value=6),
                    st.integers(min_value=-2, max_value=5),
                    st.fractions(min_value=-1, max_value=2, max_denominator=10),
                ),
                max_size=5,
            )
        )
        rules = st.builds(
            WinRuleSpec,
            st.sampled_from(list(RuleVariant)),
            st.none() | st.integers(min_value=-2, max_value=5),
            st.none() | st.sampled_from(list(Rounding)),
        )
        elections = data.draw(
            st.lists(
                st.builds(
                    ElectionSpec,
                    st.integers(min_value=-1, max_value=4),
                    rules,
                    st.none() | st.frozensets(st.integers(min_value=-1, max_value=7), max_size=4),
                ),
                max_size=4,
            )
        )
        scenario = Scenario(tuple(parties), tuple(voters), tuple(elections))
        violations = validate_scenario(scenario)
        assert violations == sorted(violations)
        flagged = {v.ident for v in violations if v.field == "turnout_prob"}
        for voter in voters:
            if not 0 <= voter.turnout_prob <= 1:
                assert voter.id in flagged

    def test_ensure_valid_raises(self):
        """Test that ensure_valid raises with the violation list attached."""
        scenario = make_scenario(["A"], [(0, 2)], [WinRuleSpec.fptp()])
        with pytest.raises(ScenarioError) as info:
            ensure_valid(scenario)
        assert len(info.value.violations) == 1


@pytest.mark.unit
class TestCanonicalForms:
    """Test canonical partitions and schedules."""

    def test_sorts_members_and_blocks(self):
        """Test that {{2,1},{3}} becomes {{1,2},{3}}."""
        assert canonicalize_partition([[2, 1], [3]]) == ((1, 2), (3,))

    def test_blocks_ordered_by_smallest_member(self):
        """Test that blocks are ordered by their smallest member."""
        assert canonicalize_partition([[3, 2], [0, 4], [1]]) == ((0, 4), (1,), (2, 3))

    def test_schedule_keys_ascending(self):
        """Test that canonical schedules are keyed by ascending voter id."""
        schedule = Schedule({2: [[1], [0]], 0: [[0, 1]], 1: [[1, 0]]})
        canonical = canonicalize_schedule(schedule)
        assert list(canonical.partitions) == [0, 1, 2]
        assert canonical[2] == ((0,), (1,))

    def test_overlap_rejected(self):
        """Test that overlapping blocks raise PartitionError."""
        with pytest.raises(PartitionError):
            canonicalize_partition([[0, 1], [1, 2]])

    def test_missing_election_rejected(self):
        """Test that a partition not covering the ground set is rejected."""
        with pytest.raises(PartitionError):
            canonicalize_partition([[0], [2]], ground=range(3))

    def test_empty_block_rejected(self):
        """Test that empty blocks raise PartitionError."""
        with pytest.raises(PartitionError):
            canonicalize_partition([[0], []])

    def test_schedule_ground_sets_must_agree(self):
        """Test that voters covering different election sets are rejected."""
        with pytest.raises(PartitionError):
            canonicalize_schedule(Schedule({0: [[0, 1]], 1: [[0]]}))

    @given(st.lists(st.integers(min_value=0, max_value=4), min_size=1, max_size=7))
    def test_canonicalize_is_idempotent(self, labels):
        """Test canonicalize(canonicalize(p)) == canonicalize(p) on random partitions."""
        blocks = {}
        for element, label in enumerate(labels):
            blocks.setdefault(label, []).append(element)
        once = canonicalize_partition(reversed([list(reversed(b)) for b in blocks.values()]))
        assert canonicalize_partition(once) == once


@pytest.mark.unit
class TestScenarioHelpers:
    """Test scenario transformers."""

    def test_boost_turnout_clips_to_one(self):
        """Test that boosting supporters' turnout clips at 1 and spares others."""
        scenario = make_scenario(["A", "B"], [(0, "3/4"), (1, "1/2")], [WinRuleSpec.fptp()])
        boosted = boost_turnout(scenario, 0, "1/2")
        assert boosted.voters[0].turnout_prob == 1
        assert boosted.voters[1].turnout_prob == Fraction(1, 2)

    def test_with_types_overrides_by_voter(self):
        """Test that with_types changes party and turnout of chosen voters."""
        scenario = make_scenario(["A", "B"], [(0, "1/2"), (1, "1/2")], [WinRuleSpec.fptp()])
        changed = with_types(scenario, parties={0: 1}, turnout={1: "1/5"})
        assert changed.voters[0].preferred_party == 1
        assert changed.voters[1].turnout_prob == Fraction(1, 5)
        assert scenario.voters[0].preferred_party == 0

    def test_uniform_schedules(self, three_election_scenario):
        """Test the simultaneous and separate schedules of a scenario."""
        assert three_election_scenario.simultaneous()[0] == ((0, 1, 2),)
        assert three_election_scenario.separate()[2] == ((0,), (1,), (2,))
        assert three_election_scenario.separate().is_uniform()
