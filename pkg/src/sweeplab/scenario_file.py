"""YAML scenario files.

A file names parties, voter cohorts, elections, named schedules, optional
alliances and an analysis block. Elections, parties and cohorts are referred
to by name; cohorts expand to voters in file order. Unknown keys are errors.

Example::

    name: micro
    parties: [A, B]
    voters:
      - {party: A, p: 1/2}
    elections:
      - {name: first, rule: fptp}
      - {name: second, rule: fptp}
    schedules:
      simultaneous: [[first, second]]
      separate: [[first], [second]]
    analysis: {method: exact, compare: [simultaneous, separate]}
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

import yaml

from .alliances import contender_map
from .errors import PartitionError, ScenarioFileError
from .model import (
    Alliance,
    AllianceKind,
    AllianceStructure,
    ElectionSpec,
    Partition,
    Rounding,
    RuleVariant,
    Scenario,
    Schedule,
    Voter,
    WinRuleSpec,
    canonicalize_partition,
    ensure_valid,
    to_probability,
)
from .sweep import Method

logger = logging.getLogger(__name__)

PACKAGED_SCENARIOS = ("micro", "onoe", "regional")

_TOP_KEYS = {"name", "parties", "voters", "elections", "schedules", "alliances", "analysis"}
_VOTER_KEYS = {"party", "p", "count", "cohort"}
_ELECTION_KEYS = {"name", "rule", "seats", "rounding", "eligibility"}
_ALLIANCE_KEYS = {"name", "members", "type"}
_ANALYSIS_KEYS = {"method", "samples", "seed", "compare", "focus"}
_STAGGERED_KEYS = {"default", "by_cohort", "by_voter"}


@dataclass(frozen=True)
class Cohort:
    """``count`` voters of one type, ids ``start .. start + count - 1``."""

    name: str
    party: int
    p: Fraction
    count: int
    start: int

    @property
    def voter_ids(self) -> range:
        return range(self.start, self.start + self.count)


@dataclass(frozen=True)
class Analysis:
    method: Method = Method.EXACT
    samples: int = 100_000
    seed: int = 0
    compare: tuple[str, str] | None = None
    # contender id: an alliance when the scenario has alliances, else a party
    focus: int | None = None


@dataclass(frozen=True)
class ScenarioDocument:
    """A parsed scenario file."""

    scenario: Scenario
    cohorts: tuple[Cohort, ...]
    election_names: tuple[str, ...]
    schedules: Mapping[str, Schedule]
    analysis: Analysis = field(default_factory=Analysis)

    def schedule(self, name: str) -> Schedule:
        try:
            return self.schedules[name]
        except KeyError:
            known = ", ".join(self.schedules) or "none"
            raise ScenarioFileError(f"schedules.{name}", f"unknown schedule (known: {known})")


def _check_keys(node: Any, allowed: set[str], path: str) -> Mapping[str, Any]:
    if not isinstance(node, Mapping):
        raise ScenarioFileError(path, f"expected a mapping, got {type(node).__name__}")
    for key in node:
        if key not in allowed:
            raise ScenarioFileError(f"{path}.{key}" if path else str(key), "unknown key")
    return node


def _require(node: Mapping[str, Any], key: str, path: str) -> Any:
    if key not in node:
        raise ScenarioFileError(f"{path}.{key}", "missing required key")
    return node[key]


def _list(node: Any, path: str) -> list:
    if not isinstance(node, list):
        raise ScenarioFileError(path, f"expected a list, got {type(node).__name__}")
    return node


def _int(node: Any, path: str, minimum: int = 0) -> int:
    if isinstance(node, bool) or not isinstance(node, int) or node < minimum:
        raise ScenarioFileError(path, f"expected an integer >= {minimum}, got {node!r}")
    return node


def _lookup(names: Sequence[str], name: Any, path: str, what: str) -> int:
    try:
        return list(names).index(name)
    except ValueError:
        raise ScenarioFileError(path, f"unknown {what} {name!r}")


def _probability(node: Any, path: str) -> Fraction:
    try:
        return to_probability(node)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ScenarioFileError(path, f"not a probability: {node!r} ({e})")


def _parse_voters(node: Any, parties: Sequence[str]) -> tuple[Cohort, ...]:
    cohorts = []
    start = 0
    for index, entry in enumerate(_list(node, "voters")):
        path = f"voters[{index}]"
        entry = _check_keys(entry, _VOTER_KEYS, path)
        party = _lookup(parties, _require(entry, "party", path), f"{path}.party", "party")
        p = _probability(_require(entry, "p", path), f"{path}.p")
        count = _int(entry.get("count", 1), f"{path}.count", minimum=1)
        name = str(entry.get("cohort", f"cohort{index}"))
        if any(c.name == name for c in cohorts):
            raise ScenarioFileError(f"{path}.cohort", f"duplicate cohort name {name!r}")
        cohorts.append(Cohort(name, party, p, count, start))
        start += count
    return tuple(cohorts)


def _parse_rule(entry: Mapping[str, Any], path: str) -> WinRuleSpec:
    try:
        variant = RuleVariant(entry.get("rule", "fptp"))
    except ValueError:
        choices = ", ".join(v.value for v in RuleVariant)
        raise ScenarioFileError(f"{path}.rule", f"expected one of {choices}")
    if variant is RuleVariant.FPTP:
        for key in ("seats", "rounding"):
            if key in entry:
                raise ScenarioFileError(f"{path}.{key}", "only PR rules take this key")
        return WinRuleSpec.fptp()
    seats = _int(_require(entry, "seats", path), f"{path}.seats", minimum=1)
    try:
        rounding = Rounding(entry.get("rounding", "dhondt"))
    except ValueError:
        choices = ", ".join(r.value for r in Rounding)
        raise ScenarioFileError(f"{path}.rounding", f"expected one of {choices}")
    return WinRuleSpec(variant, seats, rounding)


def _parse_elections(
    node: Any, cohorts: Sequence[Cohort]
) -> tuple[tuple[ElectionSpec, ...], tuple[str, ...]]:
    cohort_names = [c.name for c in cohorts]
    elections, names = [], []
    for index, entry in enumerate(_list(node, "elections")):
        path = f"elections[{index}]"
        entry = _check_keys(entry, _ELECTION_KEYS, path)
        name = str(entry.get("name", f"election{index}"))
        if name in names:
            raise ScenarioFileError(f"{path}.name", f"duplicate election name {name!r}")
        eligibility = None
        if "eligibility" in entry:
            eligible: set[int] = set()
            for j, cohort in enumerate(_list(entry["eligibility"], f"{path}.eligibility")):
                where = _lookup(cohort_names, cohort, f"{path}.eligibility[{j}]", "cohort")
                eligible.update(cohorts[where].voter_ids)
            eligibility = frozenset(eligible)
        elections.append(ElectionSpec(index, _parse_rule(entry, path), eligibility))
        names.append(name)
    return tuple(elections), tuple(names)


def _parse_partition(node: Any, elections: Sequence[str], path: str) -> Partition:
    blocks = []
    for i, block in enumerate(_list(node, path)):
        blocks.append(
            tuple(
                _lookup(elections, name, f"{path}[{i}][{j}]", "election")
                for j, name in enumerate(_list(block, f"{path}[{i}]"))
            )
        )
    try:
        return canonicalize_partition(blocks, range(len(elections)))
    except PartitionError as e:
        raise ScenarioFileError(path, str(e))


def _parse_schedule(
    node: Any, path: str, elections: Sequence[str], cohorts: Sequence[Cohort]
) -> Schedule:
    num_voters = sum(c.count for c in cohorts)
    if isinstance(node, list):
        return Schedule.uniform(_parse_partition(node, elections, path), range(num_voters))
    node = _check_keys(node, _STAGGERED_KEYS, path)
    partitions: dict[int, Partition] = {}
    if "default" in node:
        default = _parse_partition(node["default"], elections, f"{path}.default")
        partitions.update({h: default for h in range(num_voters)})
    by_cohort = node.get("by_cohort") or {}
    if not isinstance(by_cohort, Mapping):
        raise ScenarioFileError(f"{path}.by_cohort", "expected a mapping of cohort -> partition")
    cohort_names = [c.name for c in cohorts]
    for name, partition in by_cohort.items():
        where = _lookup(cohort_names, name, f"{path}.by_cohort.{name}", "cohort")
        parsed = _parse_partition(partition, elections, f"{path}.by_cohort.{name}")
        partitions.update({h: parsed for h in cohorts[where].voter_ids})
    by_voter = node.get("by_voter") or {}
    if not isinstance(by_voter, Mapping):
        raise ScenarioFileError(f"{path}.by_voter", "expected a mapping of voter id -> partition")
    for h, partition in by_voter.items():
        h = _int(h, f"{path}.by_voter.{h}")
        if h >= num_voters:
            raise ScenarioFileError(f"{path}.by_voter.{h}", "unknown voter")
        partitions[h] = _parse_partition(partition, elections, f"{path}.by_voter.{h}")
    missing = [h for h in range(num_voters) if h not in partitions]
    if missing:
        raise ScenarioFileError(path, f"voters {missing} have no partition; add a default")
    return Schedule(dict(sorted(partitions.items())))


def _parse_kind(node: Any, path: str, elections: Sequence[str]):
    try:
        if isinstance(node, Mapping):
            by_election = {
                _lookup(elections, name, f"{path}.{name}", "election"): AllianceKind(kind)
                for name, kind in node.items()
            }
            kinds = sorted(set(by_election.values()), key=lambda k: k.value)
            return kinds[0] if kinds else AllianceKind.POST_POLL, by_election
        return AllianceKind(node), None
    except ValueError:
        raise ScenarioFileError(path, "expected pre_poll or post_poll")


def _parse_alliances(
    node: Any, parties: Sequence[str], elections: Sequence[str]
) -> AllianceStructure:
    alliances = []
    covered: set[int] = set()
    for index, entry in enumerate(_list(node, "alliances")):
        path = f"alliances[{index}]"
        entry = _check_keys(entry, _ALLIANCE_KEYS, path)
        members = tuple(
            _lookup(parties, name, f"{path}.members[{j}]", "party")
            for j, name in enumerate(_list(_require(entry, "members", path), f"{path}.members"))
        )
        kind, by_election = _parse_kind(entry.get("type", "post_poll"), f"{path}.type", elections)
        alliances.append(Alliance(members, kind, entry.get("name"), by_election))
        covered.update(members)
    # parties left out of every alliance stand alone
    for s in range(len(parties)):
        if s not in covered:
            alliances.append(Alliance((s,), AllianceKind.POST_POLL, parties[s]))
    return AllianceStructure(tuple(alliances))


def _parse_analysis(node: Any, contenders: Sequence[str], schedules: Mapping[str, Schedule]):
    node = _check_keys(node or {}, _ANALYSIS_KEYS, "analysis")
    try:
        method = Method(node.get("method", "exact"))
    except ValueError:
        raise ScenarioFileError("analysis.method", "expected exact or mc")
    compare = None
    if "compare" in node:
        pair = _list(node["compare"], "analysis.compare")
        if len(pair) != 2:
            raise ScenarioFileError("analysis.compare", "expected two schedule names")
        for j, name in enumerate(pair):
            if name not in schedules:
                raise ScenarioFileError(f"analysis.compare[{j}]", f"unknown schedule {name!r}")
        compare = (str(pair[0]), str(pair[1]))
    focus = node.get("focus", "all")
    return Analysis(
        method=method,
        samples=_int(node.get("samples", 100_000), "analysis.samples", minimum=1),
        seed=_int(node.get("seed", 0), "analysis.seed"),
        compare=compare,
        focus=None if focus == "all" else _lookup(contenders, focus, "analysis.focus", "contender"),
    )


def parse(data: Any, default_name: str = "scenario", validate: bool = True) -> ScenarioDocument:
    """
    Build a :class:`ScenarioDocument` from ``yaml.safe_load`` output.

    Raises:
        ScenarioFileError: unknown keys, bad references or malformed values;
            the error carries the key path.
        ScenarioError: the assembled scenario breaks a model invariant
            (only when ``validate`` is set).
    """
    data = _check_keys(data, _TOP_KEYS, "")
    parties = tuple(str(s) for s in _list(_require(data, "parties", ""), "parties"))
    cohorts = _parse_voters(_require(data, "voters", ""), parties)
    elections, election_names = _parse_elections(_require(data, "elections", ""), cohorts)
    alliances = None
    if data.get("alliances"):
        alliances = _parse_alliances(data["alliances"], parties, election_names)
    voters = tuple(Voter(h, c.party, c.p) for c in cohorts for h in c.voter_ids)
    scenario = Scenario(parties, voters, elections, alliances, str(data.get("name", default_name)))
    schedules_node = data.get("schedules") or {}
    if not isinstance(schedules_node, Mapping):
        raise ScenarioFileError("schedules", "expected a mapping of name -> schedule")
    schedules = {
        str(name): _parse_schedule(node, f"schedules.{name}", election_names, cohorts)
        for name, node in schedules_node.items()
    }
    analysis = _parse_analysis(data.get("analysis"), contender_map(scenario).names, schedules)
    if validate:
        ensure_valid(scenario)
    logger.debug(
        "parsed scenario %s: %d voters in %d cohorts, %d elections, %d schedules",
        scenario.name,
        scenario.num_voters,
        len(cohorts),
        scenario.num_elections,
        len(schedules),
    )
    return ScenarioDocument(scenario, cohorts, election_names, schedules, analysis)


def loads(text: str, default_name: str = "scenario", validate: bool = True) -> ScenarioDocument:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ScenarioFileError("", f"not valid YAML: {e}")
    return parse(data, default_name, validate)


def load(path: str | Path, validate: bool = True) -> ScenarioDocument:
    path = Path(path)
    return loads(path.read_text(encoding="utf-8"), path.stem, validate)


def load_packaged(name: str, validate: bool = True) -> ScenarioDocument:
    if name not in PACKAGED_SCENARIOS:
        known = ", ".join(PACKAGED_SCENARIOS)
        raise ScenarioFileError(name, f"no packaged scenario (known: {known})")
    text = resources.files("sweeplab.scenarios").joinpath(f"{name}.yaml").read_text("utf-8")
    return loads(text, name, validate)


def resolve(ref: str, validate: bool = True) -> ScenarioDocument:
    """Load ``ref`` as a file path, or as a packaged scenario name."""
    if Path(ref).is_file():
        return load(ref, validate)
    if ref in PACKAGED_SCENARIOS:
        return load_packaged(ref, validate)
    raise ScenarioFileError(ref, "no such file or packaged scenario")


def _partition_names(partition: Partition, names: Sequence[str]) -> list[list[str]]:
    return [[names[l] for l in block] for block in canonicalize_partition(partition)]


def _dump_schedule(schedule: Schedule, doc: ScenarioDocument):
    names = doc.election_names
    canonical = {h: canonicalize_partition(schedule[h]) for h in schedule.voters}
    if len(set(canonical.values())) == 1:
        return _partition_names(next(iter(canonical.values())), names)
    counts = Counter(canonical.values())
    # most common partition, earliest voter first on ties
    default = max(counts, key=counts.__getitem__)
    out: dict[str, Any] = {"default": _partition_names(default, names)}
    by_cohort, by_voter = {}, {}
    for cohort in doc.cohorts:
        shared = {canonical[h] for h in cohort.voter_ids}
        if len(shared) == 1:
            only = shared.pop()
            if only != default:
                by_cohort[cohort.name] = _partition_names(only, names)
        else:
            for h in cohort.voter_ids:
                if canonical[h] != default:
                    by_voter[h] = _partition_names(canonical[h], names)
    if by_cohort:
        out["by_cohort"] = by_cohort
    if by_voter:
        out["by_voter"] = by_voter
    return out


def _dump_election(election: ElectionSpec, name: str, doc: ScenarioDocument) -> dict[str, Any]:
    out: dict[str, Any] = {"name": name, "rule": election.rule.variant.value}
    if election.rule.variant.is_pr:
        out["seats"] = election.rule.seats
        out["rounding"] = election.rule.rounding.value
    if election.eligibility is not None:
        out["eligibility"] = [
            c.name for c in doc.cohorts if set(c.voter_ids) <= election.eligibility
        ]
    return out


def _dump_alliance(alliance: Alliance, doc: ScenarioDocument) -> dict[str, Any]:
    out: dict[str, Any] = {}
    if alliance.name is not None:
        out["name"] = alliance.name
    out["members"] = [doc.scenario.parties[s] for s in alliance.members]
    if alliance.kind_by_election:
        kinds = sorted(alliance.kind_by_election.items())
        out["type"] = {doc.election_names[l]: kind.value for l, kind in kinds}
    else:
        out["type"] = alliance.kind.value
    return out


def to_dict(doc: ScenarioDocument) -> dict[str, Any]:
    """The canonical mapping form of a document, ready for ``yaml.safe_dump``."""
    scenario = doc.scenario
    out: dict[str, Any] = {
        "name": scenario.name,
        "parties": list(scenario.parties),
        "voters": [
            {"cohort": c.name, "party": scenario.parties[c.party], "p": str(c.p), "count": c.count}
            for c in doc.cohorts
        ],
        "elections": [
            _dump_election(e, name, doc) for e, name in zip(scenario.elections, doc.election_names)
        ],
        "schedules": {name: _dump_schedule(s, doc) for name, s in doc.schedules.items()},
    }
    if scenario.alliances is not None:
        out["alliances"] = [_dump_alliance(a, doc) for a in scenario.alliances.alliances]
    analysis: dict[str, Any] = {
        "method": doc.analysis.method.value,
        "samples": doc.analysis.samples,
        "seed": doc.analysis.seed,
    }
    if doc.analysis.compare is not None:
        analysis["compare"] = list(doc.analysis.compare)
    analysis["focus"] = (
        "all" if doc.analysis.focus is None else contender_map(scenario).names[doc.analysis.focus]
    )
    out["analysis"] = analysis
    return out


def dumps(doc: ScenarioDocument) -> str:
    return yaml.safe_dump(to_dict(doc), sort_keys=False)
