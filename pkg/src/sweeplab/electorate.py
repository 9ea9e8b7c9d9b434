"""Per-election win-probability functions on subsets of the electorate.

``f_l^s(H')`` is the probability that contender ``s`` wins election ``l``
when ``H'`` is the set of voters who turned out. Subsets are voter bitmasks.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

import numpy as np

from .alliances import ContenderMap, contender_map
from .model import Scenario
from .rules import WinProbVector, WinRule, make_rule, tally

logger = logging.getLogger(__name__)


class ElectionEvaluator:
    """
    Win probabilities of every contender in one election, cached by turnout
    mask and by ballot-list tally.
    """

    def __init__(
        self,
        scenario: Scenario,
        election: int,
        contenders: ContenderMap | None = None,
        rule: WinRule | None = None,
    ):
        self.scenario = scenario
        self.election = scenario.elections[election]
        self.contenders = contenders or contender_map(scenario)
        self.custom_rule = rule
        self.rule = make_rule(self.election.rule)
        self._by_mask: dict[int, WinProbVector] = {}
        self._by_counts: dict[tuple[int, ...], WinProbVector] = {}
        self._floats: dict[tuple[int, ...], np.ndarray] = {}

    def from_counts(self, counts: tuple[int, ...]) -> WinProbVector:
        """Contender win probabilities for a tally over ballot lists."""
        cached = self._by_counts.get(counts)
        if cached is None:
            if self.custom_rule is not None:
                if self.contenders.pooled:
                    raise ValueError("custom rules cannot be pooled across alliances")
                cached = tuple(self.custom_rule(counts))
            elif self.contenders.pooled:
                cached = tuple(
                    self.rule.pooled(
                        counts, self.contenders.group_of, self.contenders.num_contenders
                    )
                )
            else:
                cached = tuple(self.rule(counts))
            self._by_counts[counts] = cached
        return cached

    def float_probs(self, counts: tuple[int, ...]) -> np.ndarray:
        cached = self._floats.get(counts)
        if cached is None:
            cached = np.array([float(q) for q in self.from_counts(counts)], dtype=np.float64)
            self._floats[counts] = cached
        return cached

    def __call__(self, voted: int) -> WinProbVector:
        cached = self._by_mask.get(voted)
        if cached is None:
            counts = tally(
                voted,
                self.election,
                self.scenario.voters,
                self.contenders.num_lists,
                self.contenders.ballot_of,
            )
            cached = self.from_counts(counts)
            self._by_mask[voted] = cached
        return cached


def election_evaluators(
    scenario: Scenario, rules: Mapping[int, WinRule] | None = None
) -> tuple[ElectionEvaluator, ...]:
    """One evaluator per election; ``rules`` overrides the built-in rule of selected elections."""
    contenders = contender_map(scenario)
    rules = rules or {}
    return tuple(
        ElectionEvaluator(scenario, l, contenders, rules.get(l))
        for l in range(scenario.num_elections)
    )


def _as_mask(voters: int | Iterable[int]) -> int:
    if isinstance(voters, int):
        return voters
    mask = 0
    for h in voters:
        mask |= 1 << h
    return mask


def win_prob_function(
    scenario: Scenario, election: int, contender: int, rule: WinRule | None = None
) -> Callable[[int | Iterable[int]], Fraction]:
    """
    The function ``H' -> P(contender wins election | H' voted)``.

    The returned callable accepts a voter bitmask or an iterable of voter ids.
    """
    evaluator = ElectionEvaluator(scenario, election, rule=rule)
    if not 0 <= contender < evaluator.contenders.num_contenders:
        raise ValueError(f"unknown contender {contender}")

    def f(voters: int | Iterable[int]) -> Fraction:
        return evaluator(_as_mask(voters))[contender]

    return f


@dataclass(frozen=True)
class AlignmentResult:
    """
    Outcome of :func:`check_alignment`.

    ``witness`` is ``(voter, election, subset)`` where the subset S (sorted
    voter ids, not containing the voter) shows the wrong-direction step.
    """

    passed: bool
    witness: tuple[int, int, tuple[int, ...]] | None = None

    def __bool__(self) -> bool:
        return self.passed


def check_alignment(
    scenario: Scenario,
    contender: int,
    voter_cap: int = 12,
    rules: Mapping[int, WinRule] | None = None,
) -> AlignmentResult:
    """
    Check that every ``f_l`` for ``contender`` is increasing at the
    contender's own supporters and decreasing at everyone else.

    Raises:
        ValueError: the electorate is larger than ``voter_cap``.
    """
    m = scenario.num_voters
    if m > voter_cap:
        raise ValueError(f"alignment check enumerates 2^{m} subsets; cap is {voter_cap} voters")
    evaluators = election_evaluators(scenario, rules)
    mapping = evaluators[0].contenders if evaluators else contender_map(scenario)
    for voter in scenario.voters:
        h = voter.id
        increasing = mapping.contender_of_party(voter.preferred_party) == contender
        bit = 1 << h
        for l, evaluate in enumerate(evaluators):
            for subset in range(1 << m):
                if subset & bit:
                    continue
                step = evaluate(subset | bit)[contender] - evaluate(subset)[contender]
                if (increasing and step < 0) or (not increasing and step > 0):
                    witness = tuple(i for i in range(m) if subset >> i & 1)
                    logger.debug("alignment fails for %d at voter %d, election %d", contender, h, l)
                    return AlignmentResult(False, (h, l, witness))
    return AlignmentResult(True)
