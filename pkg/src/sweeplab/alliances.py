"""Party alliances viewed as single contenders.

Pre-poll alliance members field one joint list, so their supporters' ballots
count for that list. Post-poll alliance members contest separately and pool
what they win afterwards: seats under PR, win probabilities under FPTP.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

from .errors import AllianceError
from .model import Alliance, AllianceKind, AllianceStructure, Scenario, Voter, validate_scenario

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ContenderMap:
    """
    How parties become ballot lists and ballot lists become contenders.

    Attributes:
        ballot_of: party id -> ballot list id.
        group_of: ballot list id -> contender id.
        names: contender names, indexed by contender id.
    """

    ballot_of: tuple[int, ...]
    group_of: tuple[int, ...]
    names: tuple[str, ...]

    @property
    def num_lists(self) -> int:
        return len(self.group_of)

    @property
    def num_contenders(self) -> int:
        return len(self.names)

    @property
    def pooled(self) -> bool:
        """True when some contender pools more than one ballot list."""
        return self.num_lists != self.num_contenders

    def contender_of_party(self, party: int) -> int:
        return self.group_of[self.ballot_of[party]]


def _alliance_name(alliance: Alliance, parties: tuple[str, ...]) -> str:
    return alliance.name or "+".join(parties[s] for s in alliance.members)


def _check_structure(scenario: Scenario, structure: AllianceStructure) -> None:
    candidate = replace(scenario, alliances=structure)
    problems = [v for v in validate_scenario(candidate) if "alliance" in (v.entity, v.field)]
    if problems:
        raise AllianceError(f"invalid alliance structure: {problems[0]}")


def contender_map(scenario: Scenario) -> ContenderMap:
    """The contender view of a scenario (identity when there are no alliances)."""
    structure = scenario.alliances
    if structure is None:
        ids = tuple(range(scenario.num_parties))
        return ContenderMap(ids, ids, scenario.parties)
    ballot_of = [0] * scenario.num_parties
    group_of: list[int] = []
    joint_list: dict[int, int] = {}
    for party in range(scenario.num_parties):
        index = structure.alliance_of(party)
        alliance = structure.alliances[index]
        if alliance.kind is AllianceKind.PRE_POLL:
            if index not in joint_list:
                joint_list[index] = len(group_of)
                group_of.append(index)
            ballot_of[party] = joint_list[index]
        else:
            ballot_of[party] = len(group_of)
            group_of.append(index)
    names = tuple(_alliance_name(a, scenario.parties) for a in structure.alliances)
    return ContenderMap(tuple(ballot_of), tuple(group_of), names)


def alliance_transform(scenario: Scenario, structure: AllianceStructure) -> Scenario:
    """
    Rewrite a scenario so that its contenders are the alliances.

    Pre-poll alliances become a single party that their members' supporters
    vote for. Post-poll members stay separate parties whose results are pooled
    by the returned scenario's alliance structure.

    Raises:
        AllianceError: the structure does not partition the parties, or an
            alliance's type differs between elections.
    """
    _check_structure(scenario, structure)
    mapping = contender_map(replace(scenario, alliances=structure))
    list_names = []
    for list_id, group in enumerate(mapping.group_of):
        alliance = structure.alliances[group]
        if alliance.kind is AllianceKind.PRE_POLL:
            list_names.append(_alliance_name(alliance, scenario.parties))
        else:
            party = mapping.ballot_of.index(list_id)
            list_names.append(scenario.parties[party])
    pooling = AllianceStructure(
        tuple(
            Alliance(
                tuple(i for i, g in enumerate(mapping.group_of) if g == group),
                AllianceKind.POST_POLL,
                name=mapping.names[group],
            )
            for group in range(mapping.num_contenders)
        )
    )
    voters = tuple(
        Voter(v.id, mapping.ballot_of[v.preferred_party], v.turnout_prob) for v in scenario.voters
    )
    logger.debug(
        "alliance transform: %d parties -> %d lists -> %d contenders",
        scenario.num_parties,
        mapping.num_lists,
        mapping.num_contenders,
    )
    return replace(scenario, parties=tuple(list_names), voters=voters, alliances=pooling)
