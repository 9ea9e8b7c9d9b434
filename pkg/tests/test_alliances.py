"""Tests for alliance structures and the contender view."""

from fractions import Fraction

import pytest

from sweeplab import (
    Alliance,
    AllianceError,
    AllianceKind,
    AllianceStructure,
    Rounding,
    WinRuleSpec,
    alliance_transform,
    check_alignment,
    contender_map,
    make_scenario,
)
from sweeplab.sweep import exact_sweep_probabilities

HALF = Fraction(1, 2)


def three_party_scenario(rule=None, alliances=None):
    return make_scenario(
        ["A", "B", "C"],
        [(0, 1), (1, 1), (2, 1), (2, 1)],
        [rule or WinRuleSpec.fptp()],
        alliances=alliances,
        name="three-party",
    )


@pytest.mark.unit
class TestContenderMap:
    """Test how parties map to ballot lists and contenders."""

    def test_no_alliances_is_identity(self):
        """Test that contenders are the parties when there are no alliances."""
        mapping = contender_map(three_party_scenario())
        assert mapping.ballot_of == (0, 1, 2)
        assert mapping.names == ("A", "B", "C")
        assert not mapping.pooled

    def test_pre_poll_shares_a_list(self):
        """Test that pre-poll partners field one ballot list."""
        structure = AllianceStructure(
            (Alliance((0, 1), AllianceKind.PRE_POLL), Alliance((2,), AllianceKind.POST_POLL))
        )
        mapping = contender_map(three_party_scenario(alliances=structure))
        assert mapping.ballot_of == (0, 0, 1)
        assert mapping.names == ("A+B", "C")
        assert not mapping.pooled

    def test_post_poll_pools_lists(self):
        """Test that post-poll partners keep separate lists under one contender."""
        structure = AllianceStructure((Alliance((0, 2), name="Front"), Alliance((1,))))
        mapping = contender_map(three_party_scenario(alliances=structure))
        assert mapping.num_lists == 3
        assert mapping.group_of == (0, 1, 0)
        assert mapping.names == ("Front", "B")
        assert mapping.contender_of_party(2) == 0
        assert mapping.pooled


@pytest.mark.unit
class TestAllianceSweeps:
    """Test sweep probabilities with alliances as contenders."""

    def test_trivial_structure_is_a_no_op(self):
        """Test that singleton alliances leave every probability unchanged."""
        scenario = make_scenario(
            ["A", "B", "C"],
            [(0, HALF), (1, "1/3"), (2, "2/3"), (0, "1/4")],
            [WinRuleSpec.fptp(), WinRuleSpec.most_seats(3)],
        )
        trivial = alliance_transform(scenario, AllianceStructure.trivial(3))
        for schedule in (scenario.simultaneous(), scenario.separate()):
            assert exact_sweep_probabilities(trivial, schedule) == exact_sweep_probabilities(
                scenario, schedule
            )

    def test_pre_poll_joint_list_ties(self):
        """Test that a pre-poll pair and a rival with two voters each split a tie."""
        structure = AllianceStructure(
            (Alliance((0, 1), AllianceKind.PRE_POLL), Alliance((2,), AllianceKind.POST_POLL))
        )
        scenario = three_party_scenario(alliances=structure)
        assert exact_sweep_probabilities(scenario, scenario.simultaneous()) == (HALF, HALF)

    def test_transform_matches_declared_alliances(self):
        """Test that the transformed scenario reproduces the alliance view."""
        structure = AllianceStructure(
            (Alliance((0, 1), AllianceKind.PRE_POLL), Alliance((2,), AllianceKind.POST_POLL))
        )
        base = three_party_scenario()
        transformed = alliance_transform(base, structure)
        assert transformed.parties == ("A+B", "C")
        assert [v.preferred_party for v in transformed.voters] == [0, 0, 1, 1]
        declared = three_party_scenario(alliances=structure)
        schedule = base.simultaneous()
        assert exact_sweep_probabilities(transformed, schedule) == exact_sweep_probabilities(
            declared, schedule
        )

    def test_post_poll_seat_pooling(self):
        """Test that post-poll partners win on pooled seats."""
        scenario = make_scenario(
            ["A", "B", "C"],
            [(0, 1), (1, 1), (2, 1)],
            [WinRuleSpec.strict_majority(2, Rounding.DHONDT)],
            alliances=AllianceStructure((Alliance((0, 1)), Alliance((2,)))),
        )
        # seats (1, 1, 0) pool to (2, 0)
        assert exact_sweep_probabilities(scenario, scenario.simultaneous()) == (1, 0)

    def test_alignment_for_alliances(self):
        """Test that alliance contenders are aligned under FPTP and strict majority."""
        structure = AllianceStructure(
            (Alliance((0, 1), AllianceKind.PRE_POLL), Alliance((2,), AllianceKind.POST_POLL))
        )
        scenario = make_scenario(
            ["A", "B", "C"],
            [(0, HALF), (1, "1/3"), (2, "2/3"), (2, "1/5")],
            [WinRuleSpec.fptp(), WinRuleSpec.strict_majority(3)],
            alliances=structure,
        )
        for contender in range(2):
            assert check_alignment(scenario, contender)


@pytest.mark.unit
class TestAllianceValidation:
    """Test rejection of malformed alliance structures."""

    def test_party_in_two_alliances(self):
        """Test that overlapping alliances raise."""
        structure = AllianceStructure((Alliance((0, 1)), Alliance((1, 2))))
        with pytest.raises(AllianceError):
            alliance_transform(three_party_scenario(), structure)

    def test_party_left_out(self):
        """Test that every party must belong to an alliance."""
        with pytest.raises(AllianceError):
            alliance_transform(three_party_scenario(), AllianceStructure((Alliance((0, 1)),)))

    def test_kind_varies_across_elections(self):
        """Test that an alliance must have one type in every election."""
        structure = AllianceStructure(
            (
                Alliance(
                    (0, 1), AllianceKind.PRE_POLL, kind_by_election={0: AllianceKind.POST_POLL}
                ),
                Alliance((2,)),
            )
        )
        with pytest.raises(AllianceError):
            alliance_transform(three_party_scenario(), structure)
