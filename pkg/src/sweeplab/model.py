"""Domain types shared by every engine: voters, elections, schedules, scenarios.

All values are immutable after construction. Ids are dense 0-based integers;
human-readable names live on the scenario (parties) and in scenario files.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import PartitionError, ScenarioError

logger = logging.getLogger(__name__)

Block = tuple[int, ...]
Partition = tuple[Block, ...]


def to_probability(value: Fraction | int | float | str) -> Fraction:
    """
    Convert a turnout probability to an exact rational.

    Ratios ("1/3") stay exact; decimals (0.1, "0.25") become decimal digits
    over a power of ten rather than the nearest binary float.
    """
    if isinstance(value, bool):
        raise TypeError("turnout probability cannot be a bool")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"unsupported probability value: {value!r}")


class RuleVariant(str, Enum):
    FPTP = "fptp"
    PR_MOST_SEATS = "pr_most_seats"
    PR_STRICT_MAJORITY = "pr_strict_majority"

    @property
    def is_pr(self) -> bool:
        return self is not RuleVariant.FPTP


class Rounding(str, Enum):
    DHONDT = "dhondt"
    SAINTE_LAGUE = "sainte_lague"
    HARE = "hare"
    DROOP = "droop"

    @property
    def is_divisor(self) -> bool:
        return self in (Rounding.DHONDT, Rounding.SAINTE_LAGUE)


@dataclass(frozen=True)
class WinRuleSpec:
    """How an election turns a tally into win probabilities."""

    variant: RuleVariant = RuleVariant.FPTP
    seats: int | None = None
    rounding: Rounding | None = None

    @staticmethod
    def fptp() -> "WinRuleSpec":
        return WinRuleSpec(RuleVariant.FPTP)

    @staticmethod
    def most_seats(seats: int, rounding: Rounding = Rounding.DHONDT) -> "WinRuleSpec":
        return WinRuleSpec(RuleVariant.PR_MOST_SEATS, seats, rounding)

    @staticmethod
    def strict_majority(seats: int, rounding: Rounding = Rounding.DHONDT) -> "WinRuleSpec":
        return WinRuleSpec(RuleVariant.PR_STRICT_MAJORITY, seats, rounding)


@dataclass(frozen=True)
class Voter:
    """A polarized voter: one preferred party and a fixed turnout probability."""

    id: int
    preferred_party: int
    turnout_prob: Fraction

    def __post_init__(self):
        if not isinstance(self.turnout_prob, Fraction):
            object.__setattr__(self, "turnout_prob", to_probability(self.turnout_prob))


@dataclass(frozen=True)
class ElectionSpec:
    """
    One election of the set L.

    Attributes:
        id: Election id.
        rule: The win rule applied to this election's tally.
        eligibility: Voter ids whose ballots count; None means every voter.
            Ineligible voters may still turn out, their ballots are discarded.
    """

    id: int
    rule: WinRuleSpec = field(default_factory=WinRuleSpec.fptp)
    eligibility: frozenset[int] | None = None

    def eligibility_mask(self, num_voters: int) -> int:
        if self.eligibility is None:
            return (1 << num_voters) - 1
        mask = 0
        for h in self.eligibility:
            mask |= 1 << h
        return mask


class AllianceKind(str, Enum):
    PRE_POLL = "pre_poll"
    POST_POLL = "post_poll"


@dataclass(frozen=True)
class Alliance:
    """
    A group of parties treated as one contender.

    ``kind_by_election`` records per-election declarations when a source
    supplied them; it must agree with ``kind`` everywhere or the structure is
    rejected.
    """

    members: tuple[int, ...]
    kind: AllianceKind = AllianceKind.POST_POLL
    name: str | None = None
    kind_by_election: Mapping[int, AllianceKind] | None = None


@dataclass(frozen=True)
class AllianceStructure:
    alliances: tuple[Alliance, ...]

    @staticmethod
    def trivial(num_parties: int, kind: AllianceKind = AllianceKind.POST_POLL):
        """Every party its own alliance."""
        return AllianceStructure(tuple(Alliance((s,), kind) for s in range(num_parties)))

    def alliance_of(self, party: int) -> int:
        for index, alliance in enumerate(self.alliances):
            if party in alliance.members:
                return index
        raise KeyError(party)


@dataclass(frozen=True)
class Schedule:
    """
    A staggered polling schedule: voter id -> partition of the election set.

    Uniform schedules give every voter the same partition.
    """

    partitions: Mapping[int, Partition]

    def __getitem__(self, voter: int) -> Partition:
        return self.partitions[voter]

    @property
    def voters(self) -> tuple[int, ...]:
        return tuple(sorted(self.partitions))

    def is_uniform(self) -> bool:
        return len({canonicalize_partition(p) for p in self.partitions.values()}) <= 1

    @staticmethod
    def uniform(partition: Iterable[Iterable[int]], voter_ids: Iterable[int]) -> "Schedule":
        canonical = canonicalize_partition(partition)
        return Schedule({h: canonical for h in sorted(voter_ids)})

    @staticmethod
    def simultaneous(num_elections: int, voter_ids: Iterable[int]) -> "Schedule":
        """All elections on one poll date."""
        return Schedule.uniform([tuple(range(num_elections))], voter_ids)

    @staticmethod
    def separate(num_elections: int, voter_ids: Iterable[int]) -> "Schedule":
        """Every election on its own poll date."""
        return Schedule.uniform([(l,) for l in range(num_elections)], voter_ids)


@dataclass(frozen=True)
class Scenario:
    """Parties, voters and elections, plus an optional alliance structure."""

    parties: tuple[str, ...]
    voters: tuple[Voter, ...]
    elections: tuple[ElectionSpec, ...]
    alliances: AllianceStructure | None = None
    name: str = "scenario"

    @property
    def num_parties(self) -> int:
        return len(self.parties)

    @property
    def num_voters(self) -> int:
        return len(self.voters)

    @property
    def num_elections(self) -> int:
        return len(self.elections)

    @property
    def voter_ids(self) -> tuple[int, ...]:
        return tuple(v.id for v in self.voters)

    @property
    def turnout_probs(self) -> tuple[Fraction, ...]:
        return tuple(v.turnout_prob for v in self.voters)

    def simultaneous(self) -> Schedule:
        return Schedule.simultaneous(self.num_elections, self.voter_ids)

    def separate(self) -> Schedule:
        return Schedule.separate(self.num_elections, self.voter_ids)


@dataclass(frozen=True, order=True)
class Violation:
    """One invariant violation found by :func:`validate_scenario`."""

    rank: int
    ident: int
    field: str
    entity: str = field(compare=False)
    message: str = field(compare=False)

    def __str__(self) -> str:
        return f"{self.entity} {self.ident} {self.field}: {self.message}"


_RANK = {"scenario": 0, "party": 1, "voter": 2, "election": 3, "schedule": 4, "alliance": 5}


def _violation(entity: str, ident: int, fld: str, message: str) -> Violation:
    return Violation(_RANK[entity], ident, fld, entity, message)


def canonicalize_partition(
    partition: Iterable[Iterable[int]], ground: Iterable[int] | None = None
) -> Partition:
    """
    Return the canonical form of a partition: members ascending, blocks
    ordered by their smallest member.

    Raises:
        PartitionError: empty or overlapping blocks, or blocks not covering
            ``ground`` when it is given.
    """
    raw_blocks = [tuple(block) for block in partition]
    blocks = [tuple(sorted(set(raw))) for raw in raw_blocks]
    seen: set[int] = set()
    for block, raw in zip(blocks, raw_blocks):
        if not block:
            raise PartitionError("partition contains an empty block")
        if len(block) != len(raw):
            raise PartitionError(f"block {list(raw)} repeats an election")
        overlap = seen.intersection(block)
        if overlap:
            raise PartitionError(f"elections {sorted(overlap)} appear in more than one block")
        seen.update(block)
    if ground is not None:
        expected = set(ground)
        if seen != expected:
            missing = sorted(expected - seen)
            extra = sorted(seen - expected)
            raise PartitionError(
                f"partition does not cover the election set (missing {missing}, unknown {extra})"
            )
    return tuple(sorted(blocks, key=lambda b: b[0]))


def canonicalize_schedule(schedule: Schedule, num_elections: int | None = None) -> Schedule:
    """
    Canonical-form equivalent of a schedule, keyed by ascending voter id.

    Every voter's partition must cover the same ground set (``range(num_elections)``
    when given).

    Raises:
        PartitionError: a partition is malformed or ground sets differ.
    """
    ground: set[int] | None = set(range(num_elections)) if num_elections is not None else None
    result: dict[int, Partition] = {}
    for h in sorted(schedule.partitions):
        try:
            canonical = canonicalize_partition(schedule.partitions[h], ground)
        except PartitionError as e:
            raise PartitionError(f"voter {h}: {e}") from e
        if ground is None:
            ground = {l for block in canonical for l in block}
        result[h] = canonical
    return Schedule(result)


def _partition_violations(h: int, partition: Sequence[Sequence[int]], n: int) -> list[Violation]:
    out = []
    seen: dict[int, int] = {}
    for index, block in enumerate(partition):
        if len(block) == 0:
            out.append(_violation("schedule", h, "blocks", f"block {index} is empty"))
        for l in block:
            if not 0 <= l < n:
                out.append(_violation("schedule", h, "blocks", f"unknown election {l}"))
            elif l in seen and seen[l] != index:
                out.append(
                    _violation(
                        "schedule",
                        h,
                        "blocks",
                        f"election {l} is in overlapping blocks {seen[l]} and {index}",
                    )
                )
            else:
                seen[l] = index
    missing = sorted(set(range(n)) - set(seen))
    if missing:
        out.append(_violation("schedule", h, "blocks", f"elections {missing} are not covered"))
    return out


def validate_schedule(schedule: Schedule, scenario: Scenario) -> list[Violation]:
    """Violations of the schedule invariants against a scenario."""
    out = []
    ids = set(scenario.voter_ids)
    for h in sorted(schedule.partitions):
        if h not in ids:
            out.append(_violation("schedule", h, "voter", "schedule names an unknown voter"))
            continue
        out.extend(_partition_violations(h, schedule.partitions[h], scenario.num_elections))
    for h in sorted(ids - set(schedule.partitions)):
        out.append(_violation("schedule", h, "voter", "voter has no partition"))
    return sorted(out)


def _rule_violations(election: ElectionSpec) -> list[Violation]:
    rule = election.rule
    out = []
    if rule.variant.is_pr:
        if rule.seats is None or rule.seats < 1:
            out.append(_violation("election", election.id, "rule.seats", "PR needs seats >= 1"))
        if rule.rounding is None:
            out.append(_violation("election", election.id, "rule.rounding", "PR needs a rounding"))
    return out


def _alliance_violations(structure: AllianceStructure, num_parties: int) -> list[Violation]:
    out = []
    counts = [0] * num_parties
    for index, alliance in enumerate(structure.alliances):
        if not alliance.members:
            out.append(_violation("alliance", index, "members", "alliance has no members"))
        for s in alliance.members:
            if 0 <= s < num_parties:
                counts[s] += 1
            else:
                out.append(_violation("alliance", index, "members", f"unknown party {s}"))
        if alliance.kind_by_election:
            kinds = set(alliance.kind_by_election.values()) | {alliance.kind}
            if len(kinds) > 1:
                out.append(
                    _violation("alliance", index, "kind", "alliance type varies across elections")
                )
    for s, count in enumerate(counts):
        if count != 1:
            out.append(
                _violation("party", s, "alliance", f"party {s} belongs to {count} alliances")
            )
    return out


def validate_scenario(scenario: Scenario, schedule: Schedule | None = None) -> list[Violation]:
    """
    Every invariant violation in a scenario (and optionally a schedule).

    Violations are data; an empty list means the scenario is valid. Ordering
    is deterministic: by entity type, then id, then field.
    """
    out: list[Violation] = []
    if not scenario.parties:
        out.append(_violation("scenario", 0, "parties", "at least one party is required"))
    if not scenario.voters:
        out.append(_violation("scenario", 0, "voters", "at least one voter is required"))
    if not scenario.elections:
        out.append(_violation("scenario", 0, "elections", "at least one election is required"))
    if len(set(scenario.parties)) != len(scenario.parties):
        out.append(_violation("scenario", 0, "parties", "party names are not unique"))

    for index, voter in enumerate(scenario.voters):
        if voter.id != index:
            out.append(_violation("voter", voter.id, "id", f"expected dense id {index}"))
        if not 0 <= voter.turnout_prob <= 1:
            out.append(
                _violation(
                    "voter", voter.id, "turnout_prob", f"{voter.turnout_prob} is outside [0, 1]"
                )
            )
        if not 0 <= voter.preferred_party < scenario.num_parties:
            out.append(
                _violation(
                    "voter", voter.id, "preferred_party", f"unknown party {voter.preferred_party}"
                )
            )

    for index, election in enumerate(scenario.elections):
        if election.id != index:
            out.append(_violation("election", election.id, "id", f"expected dense id {index}"))
        out.extend(_rule_violations(election))
        if election.eligibility is not None:
            unknown = sorted(h for h in election.eligibility if not 0 <= h < scenario.num_voters)
            if unknown:
                out.append(
                    _violation("election", election.id, "eligibility", f"unknown voters {unknown}")
                )

    if scenario.alliances is not None:
        out.extend(_alliance_violations(scenario.alliances, scenario.num_parties))
    if schedule is not None:
        out.extend(validate_schedule(schedule, scenario))
    return sorted(out)


def ensure_valid(scenario: Scenario, schedule: Schedule | None = None) -> None:
    """Raise :class:`ScenarioError` when :func:`validate_scenario` finds anything."""
    violations = validate_scenario(scenario, schedule)
    if violations:
        logger.debug("scenario %s has %d violations", scenario.name, len(violations))
        raise ScenarioError(f"scenario {scenario.name!r}: {violations[0]}", violations)


def boost_turnout(scenario: Scenario, party: int, delta: Fraction | int | str) -> Scenario:
    """
    Raise the turnout probability of every supporter of ``party`` by ``delta``
    (clipped to [0, 1]); the only coattail effect the turnout model admits.
    """
    step = to_probability(delta)
    voters = tuple(
        replace(v, turnout_prob=min(Fraction(1), max(Fraction(0), v.turnout_prob + step)))
        if v.preferred_party == party
        else v
        for v in scenario.voters
    )
    return replace(scenario, voters=voters)


def with_types(
    scenario: Scenario,
    parties: Mapping[int, int] | None = None,
    turnout: Mapping[int, Fraction | int | float | str] | None = None,
) -> Scenario:
    """Reassign voter types (preferred party and/or turnout probability) by voter id."""
    parties = parties or {}
    turnout = turnout or {}
    voters = tuple(
        replace(
            v,
            preferred_party=parties.get(v.id, v.preferred_party),
            turnout_prob=to_probability(turnout[v.id]) if v.id in turnout else v.turnout_prob,
        )
        for v in scenario.voters
    )
    return replace(scenario, voters=voters)


def make_scenario(
    parties: Sequence[str],
    voters: Sequence[tuple[int, Fraction | int | float | str]],
    rules: Sequence[WinRuleSpec],
    eligibility: Sequence[Iterable[int] | None] | None = None,
    alliances: AllianceStructure | None = None,
    name: str = "scenario",
) -> Scenario:
    """Assemble a scenario from ``(party, p)`` voter pairs and per-election rules."""
    eligibility = eligibility or [None] * len(rules)
    return Scenario(
        parties=tuple(parties),
        voters=tuple(Voter(h, s, to_probability(p)) for h, (s, p) in enumerate(voters)),
        elections=tuple(
            ElectionSpec(l, rule, frozenset(elig) if elig is not None else None)
            for l, (rule, elig) in enumerate(zip(rules, eligibility))
        ),
        alliances=alliances,
        name=name,
    )
