"""Electoral rules: from a per-party tally to per-party win probabilities.

Win probabilities are exact rationals. Ties between parties are settled by a
fair coin (uniform over the tied parties). Ties inside seat allocation go to
the lower party id; that keeps seat vectors deterministic so exact
enumeration stays exact.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import floor
from typing import Callable, Iterable, Sequence

from .model import ElectionSpec, Rounding, RuleVariant, Voter, WinRuleSpec

logger = logging.getLogger(__name__)

Tally = tuple[int, ...]
WinProbVector = tuple[Fraction, ...]
WinRule = Callable[[Tally], Sequence[Fraction]]


def tally(
    voted: int | Iterable[int],
    election: ElectionSpec,
    voters: Sequence[Voter],
    num_contenders: int,
    ballot_of: Sequence[int] | None = None,
) -> Tally:
    """
    Votes per party among the eligible voters who voted in ``election``.

    Args:
        voted: The voters who turned out, as a bitmask or an iterable of ids.
        ballot_of: Optional party -> ballot list map (pre-poll alliances share
            a list); defaults to the identity.
    """
    if not isinstance(voted, int):
        mask = 0
        for h in voted:
            mask |= 1 << h
        voted = mask
    counted = voted & election.eligibility_mask(len(voters))
    counts = [0] * num_contenders
    for voter in voters:
        if counted >> voter.id & 1:
            party = voter.preferred_party
            counts[ballot_of[party] if ballot_of is not None else party] += 1
    return tuple(counts)


def fptp_win_probs(counts: Sequence[int]) -> WinProbVector:
    """Plurality winner takes probability 1; a k-way tie for the top gives each 1/k."""
    top = max(counts)
    tied = [s for s, v in enumerate(counts) if v == top]
    share = Fraction(1, len(tied))
    return tuple(share if v == top else Fraction(0) for v in counts)


def _divisor(rounding: Rounding) -> Callable[[int], int]:
    if rounding is Rounding.DHONDT:
        return lambda k: k + 1
    return lambda k: 2 * k + 1


def _round_robin(seats: int, parties: int, order: Sequence[int] | None = None) -> list[int]:
    order = list(order) if order is not None else list(range(parties))
    out = [0] * parties
    for index in range(seats):
        out[order[index % len(order)]] += 1
    return out


def _highest_averages(counts: Sequence[int], seats: int, rounding: Rounding) -> list[int]:
    divisor = _divisor(rounding)
    won = [0] * len(counts)
    for _ in range(seats):
        # max quotient, lower id on ties
        best = max(
            range(len(counts)), key=lambda s: (Fraction(counts[s], divisor(won[s])), -s)
        )
        won[best] += 1
    return won


def _quota(total: int, seats: int, rounding: Rounding) -> Fraction:
    if rounding is Rounding.HARE:
        return Fraction(total, seats)
    return Fraction(total // (seats + 1) + 1)


def _largest_remainder(counts: Sequence[int], seats: int, rounding: Rounding) -> list[int]:
    quota = _quota(sum(counts), seats, rounding)
    shares = [Fraction(v) / quota for v in counts]
    won = [floor(share) for share in shares]
    order = sorted(range(len(counts)), key=lambda s: (-(shares[s] - won[s]), s))
    remaining = seats - sum(won)
    for index in range(remaining):
        won[order[index % len(order)]] += 1
    return won


def allocate_seats(counts: Sequence[int], spec: WinRuleSpec) -> tuple[int, ...]:
    """
    Party-list seat allocation.

    Divisor methods (D'Hondt, Sainte-Lague) award seats to the largest
    quotients; quota methods (Hare, Droop) give floors first, then the
    remaining seats by descending remainder. Equal quotients or remainders go
    to the lower party id. An all-zero tally is a full tie: seats go round
    robin in party id order.
    """
    if not spec.variant.is_pr or spec.seats is None or spec.rounding is None:
        raise ValueError(f"allocate_seats needs a PR rule, got {spec}")
    if not any(counts):
        return tuple(_round_robin(spec.seats, len(counts)))
    if spec.rounding.is_divisor:
        return tuple(_highest_averages(counts, spec.seats, spec.rounding))
    return tuple(_largest_remainder(counts, spec.seats, spec.rounding))


def pr_win_probs(seats: Sequence[int], variant: RuleVariant) -> WinProbVector:
    """
    Most seats wins (ties by coin), or a strict majority of seats wins and
    anything short of one is a non-win for every party.
    """
    if variant is RuleVariant.PR_MOST_SEATS:
        return fptp_win_probs(seats)
    if variant is RuleVariant.PR_STRICT_MAJORITY:
        total = sum(seats)
        return tuple(Fraction(1) if 2 * v > total else Fraction(0) for v in seats)
    raise ValueError(f"{variant} is not a PR variant")


def _pool(values: Sequence, groups: Sequence[int], num_groups: int, zero):
    pooled = [zero] * num_groups
    for index, value in enumerate(values):
        pooled[groups[index]] += value
    return tuple(pooled)


@dataclass(frozen=True)
class BuiltinRule:
    """
    A built-in rule bound to its spec. Calling it maps a tally to a win
    probability vector; :meth:`pooled` evaluates it for post-poll alliances.
    """

    spec: WinRuleSpec

    def __call__(self, counts: Sequence[int]) -> WinProbVector:
        return _evaluate(self.spec, tuple(counts))

    def pooled(self, counts: Sequence[int], groups: Sequence[int], num_groups: int):
        """
        Win probabilities per alliance: FPTP sums member win probabilities,
        PR pools member seats before the win rule is applied.
        """
        counts = tuple(counts)
        if self.spec.variant is RuleVariant.FPTP:
            return _pool(fptp_win_probs(counts), groups, num_groups, Fraction(0))
        seats = _pool(allocate_seats(counts, self.spec), groups, num_groups, 0)
        return pr_win_probs(seats, self.spec.variant)


@lru_cache(maxsize=1 << 16)
def _evaluate(spec: WinRuleSpec, counts: Tally) -> WinProbVector:
    if spec.variant is RuleVariant.FPTP:
        return fptp_win_probs(counts)
    return pr_win_probs(allocate_seats(counts, spec), spec.variant)


def make_rule(spec: WinRuleSpec) -> BuiltinRule:
    return BuiltinRule(spec)


@dataclass(frozen=True)
class ValidationResult:
    """
    Outcome of an exhaustive rule check.

    Attributes:
        passed: True when no counterexample exists within the scanned bound.
        counterexample: The first violating tally, if any.
        party: For monotonicity failures, the party receiving the extra vote.
        rival: For monotonicity failures, the party whose probability moved
            the wrong way (equal to ``party`` when the gainer itself lost).
        detail: Human-readable description of the failure.
    """

    passed: bool
    counterexample: Tally | None = None
    party: int | None = None
    rival: int | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed


def _tallies(num_parties: int, bound: int) -> Iterable[Tally]:
    return itertools.product(range(bound + 1), repeat=num_parties)


def validate_exclusivity(rule: WinRule, num_parties: int, bound: int = 12) -> ValidationResult:
    """
    Check condition (a) on every tally with entries in ``0..bound``: each
    entry lies in [0, 1] and the entries sum to at most 1.
    """
    for counts in _tallies(num_parties, bound):
        probs = rule(counts)
        if any(not 0 <= q <= 1 for q in probs) or sum(probs) > 1:
            return ValidationResult(
                False, counts, detail=f"win probabilities {list(map(str, probs))} at {counts}"
            )
    return ValidationResult(True)


def validate_monotonicity(rule: WinRule, num_parties: int, bound: int = 12) -> ValidationResult:
    """
    Check condition (b) on every tally with entries in ``0..bound``: an extra
    vote for a party never lowers its win probability and never raises a
    rival's.
    """
    cache: dict[Tally, Sequence[Fraction]] = {}

    def probs(counts: Tally) -> Sequence[Fraction]:
        if counts not in cache:
            cache[counts] = rule(counts)
        return cache[counts]

    for counts in _tallies(num_parties, bound):
        before = probs(counts)
        for s in range(num_parties):
            after = probs(counts[:s] + (counts[s] + 1,) + counts[s + 1 :])
            if after[s] < before[s]:
                return ValidationResult(
                    False,
                    counts,
                    s,
                    s,
                    f"extra vote for {s} at {counts} lowers its win probability",
                )
            for r in range(num_parties):
                if r != s and after[r] > before[r]:
                    return ValidationResult(
                        False,
                        counts,
                        s,
                        r,
                        f"extra vote for {s} at {counts} raises rival {r} "
                        f"from {before[r]} to {after[r]}",
                    )
    return ValidationResult(True)
