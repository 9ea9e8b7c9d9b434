"""The turnout measure: which voters vote in which elections.

For each voter and each block of that voter's partition one coin with the
voter's turnout probability is tossed; on heads the voter votes in every
election of the block. Turnouts are stored as one voter bitmask per
election; the per-voter view is derived on demand.

RNG contract: master seed ``s`` derives a 128-bit Philox key; sample ``i``
reads its uniforms from the Philox counter-based substream that starts at
counter ``i * stride // 4``, where ``stride`` is the layout's block count
rounded up to a multiple of 4 (Philox emits four words per counter step).
Within a sample one uniform is consumed per block, in ascending voter id and
then canonical block order; a block is heads when its uniform is below the
voter's turnout probability. A chunk of consecutive samples is therefore one
contiguous draw.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import EnumerationCapError
from .model import Schedule, Voter, canonicalize_partition

logger = logging.getLogger(__name__)

DEFAULT_CAP = 2**24
WORDS_PER_STEP = 4


@dataclass(frozen=True)
class Turnout:
    """
    A subset of voters x elections.

    Attributes:
        num_voters: Size of the electorate H.
        by_election: For each election, a bitmask of the voters who voted.
    """

    num_voters: int
    by_election: tuple[int, ...]

    @property
    def num_elections(self) -> int:
        return len(self.by_election)

    def pairs(self) -> frozenset[tuple[int, int]]:
        """The turnout as a set of ``(voter, election)`` pairs."""
        return frozenset(
            (h, l)
            for l, mask in enumerate(self.by_election)
            for h in range(self.num_voters)
            if mask >> h & 1
        )

    def voted(self, voter: int, election: int) -> bool:
        return bool(self.by_election[election] >> voter & 1)

    @staticmethod
    def from_pairs(
        pairs: Iterable[tuple[int, int]], num_voters: int, num_elections: int
    ) -> "Turnout":
        masks = [0] * num_elections
        for h, l in pairs:
            if not (0 <= h < num_voters and 0 <= l < num_elections):
                raise ValueError(f"pair {(h, l)} references an unknown voter or election")
            masks[l] |= 1 << h
        return Turnout(num_voters, tuple(masks))

    @staticmethod
    def from_voter_sets(voter_sets: Sequence[Iterable[int]], num_elections: int) -> "Turnout":
        """Build from per-voter election sets (L_1..L_m)."""
        return Turnout.from_pairs(
            ((h, l) for h, elections in enumerate(voter_sets) for l in elections),
            len(voter_sets),
            num_elections,
        )

    @staticmethod
    def from_election_sets(election_sets: Sequence[Iterable[int]], num_voters: int) -> "Turnout":
        """Build from per-election voter sets (H_1..H_n)."""
        return Turnout.from_pairs(
            ((h, l) for l, voters in enumerate(election_sets) for h in voters),
            num_voters,
            len(election_sets),
        )

    @staticmethod
    def empty(num_voters: int, num_elections: int) -> "Turnout":
        return Turnout(num_voters, (0,) * num_elections)

    @staticmethod
    def full(num_voters: int, num_elections: int) -> "Turnout":
        return Turnout(num_voters, ((1 << num_voters) - 1,) * num_elections)


@dataclass(frozen=True)
class WeightedTurnout:
    turnout: Turnout
    probability: Fraction


def votes_by_election(turnout: Turnout) -> tuple[frozenset[int], ...]:
    """Per-election voter sets H_1..H_n."""
    return tuple(
        frozenset(h for h in range(turnout.num_voters) if mask >> h & 1)
        for mask in turnout.by_election
    )


def votes_by_voter(turnout: Turnout) -> tuple[frozenset[int], ...]:
    """Per-voter election sets L_1..L_m."""
    return tuple(
        frozenset(l for l, mask in enumerate(turnout.by_election) if mask >> h & 1)
        for h in range(turnout.num_voters)
    )


def _ordered_partitions(schedule: Schedule, num_voters: int):
    return [canonicalize_partition(schedule[h]) for h in range(num_voters)]


def support_size(schedule: Schedule, probs: Sequence[Fraction]) -> int:
    """Number of turnouts with positive probability."""
    size = 1
    for h, p in enumerate(probs):
        if 0 < p < 1:
            size *= 2 ** len(schedule[h])
    return size


def _voter_outcomes(
    h: int, partition, p: Fraction, n: int
) -> list[tuple[Fraction, tuple[int, ...]]]:
    outcomes = []
    bit = 1 << h
    for chosen in range(1 << len(partition)):
        prob = Fraction(1)
        masks = [0] * n
        for index, block in enumerate(partition):
            if chosen >> index & 1:
                prob *= p
                for l in block:
                    masks[l] |= bit
            else:
                prob *= 1 - p
        if prob:
            outcomes.append((prob, tuple(masks)))
    return outcomes


def enumerate_weighted(
    schedule: Schedule, probs: Sequence[Fraction], num_elections: int, cap: int = DEFAULT_CAP
) -> Iterator[tuple[tuple[int, ...], Fraction]]:
    """
    Stream ``(per-election masks, exact probability)`` for every turnout of
    positive probability under the product measure.

    Raises:
        EnumerationCapError: the support is larger than ``cap``.
    """
    size = support_size(schedule, probs)
    if size > cap:
        raise EnumerationCapError(size, cap)
    logger.debug("enumerating %d weighted turnouts", size)
    partitions = _ordered_partitions(schedule, len(probs))
    per_voter = [
        _voter_outcomes(h, partition, Fraction(p), num_elections)
        for h, (partition, p) in enumerate(zip(partitions, probs))
    ]
    yield from _walk(per_voter, 0, Fraction(1), (0,) * num_elections)


def _walk(per_voter, index: int, prob: Fraction, masks: tuple[int, ...]):
    if index == len(per_voter):
        yield masks, prob
        return
    for q, contribution in per_voter[index]:
        yield from _walk(
            per_voter,
            index + 1,
            prob * q,
            tuple(a | b for a, b in zip(masks, contribution)),
        )


def enumerate_turnouts(
    schedule: Schedule, voters: Sequence[Voter], cap: int = DEFAULT_CAP
) -> Iterator[WeightedTurnout]:
    """Every turnout of positive probability, once, with its exact probability."""
    n = _num_elections(schedule)
    m = len(voters)
    for masks, prob in enumerate_weighted(schedule, [v.turnout_prob for v in voters], n, cap):
        yield WeightedTurnout(Turnout(m, masks), prob)


def _num_elections(schedule: Schedule) -> int:
    first = schedule[schedule.voters[0]]
    return sum(len(block) for block in first)


def turnout_probability(turnout: Turnout, schedule: Schedule, voters: Sequence[Voter]) -> Fraction:
    """
    Exact probability of a turnout; zero when it splits a block for some voter.
    """
    prob = Fraction(1)
    for voter in voters:
        h, p = voter.id, voter.turnout_prob
        for block in canonicalize_partition(schedule[h]):
            attended = [turnout.voted(h, l) for l in block]
            if all(attended):
                prob *= p
            elif not any(attended):
                prob *= 1 - p
            else:
                return Fraction(0)
    return prob


def sample_rng(master_seed: int, index: int) -> np.random.Generator:
    """An independent generator for trial ``index`` under ``master_seed``."""
    return np.random.default_rng(np.random.SeedSequence([master_seed, index]))


def stream_key(master_seed: int) -> np.ndarray:
    """The Philox key for ``master_seed``."""
    return np.random.SeedSequence(master_seed).generate_state(2, dtype=np.uint64)


def substream(key: np.ndarray, index: int, stride: int) -> np.random.Generator:
    """
    Generator positioned at sample ``index`` when every sample spans
    ``stride`` words; reading past the sample continues into ``index + 1``.
    """
    if stride % WORDS_PER_STEP:
        raise ValueError(f"stride must be a multiple of {WORDS_PER_STEP}, got {stride}")
    counter = index * (stride // WORDS_PER_STEP)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


class BlockLayout:
    """
    Flattened view of a schedule for vectorised sampling.

    Blocks are laid out in ascending voter id, then canonical block order,
    which is the order the RNG stream is consumed in.
    """

    def __init__(self, schedule: Schedule, probs: Sequence[Fraction], num_elections: int):
        self.num_voters = len(probs)
        self.num_elections = num_elections
        block_prob = []
        cell_block = np.zeros((self.num_voters, num_elections), dtype=np.int64)
        for h in range(self.num_voters):
            for block in canonicalize_partition(schedule[h]):
                for l in block:
                    cell_block[h, l] = len(block_prob)
                block_prob.append(float(probs[h]))
        self.block_prob = np.asarray(block_prob, dtype=np.float64)
        self.cell_block = cell_block
        # words per sample in the substream, padded to whole Philox steps
        self.stride = WORDS_PER_STEP * max(1, -(-self.num_blocks // WORDS_PER_STEP))

    @property
    def num_blocks(self) -> int:
        return len(self.block_prob)

    def draw_heads(self, rng: np.random.Generator, rows: int) -> np.ndarray:
        """
        Block outcomes for ``rows`` consecutive samples of a substream, shape
        ``(rows, blocks)``; each row consumes ``stride`` uniforms.
        """
        uniforms = rng.random((rows, self.stride))
        return uniforms[:, : self.num_blocks] < self.block_prob

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """A boolean ``(voters, elections)`` matrix of who voted where."""
        heads = rng.random(self.num_blocks) < self.block_prob
        return heads[self.cell_block]


def matrix_to_turnout(voted: np.ndarray) -> Turnout:
    num_voters, num_elections = voted.shape
    masks = []
    for l in range(num_elections):
        mask = 0
        for h in np.flatnonzero(voted[:, l]):
            mask |= 1 << int(h)
        masks.append(mask)
    return Turnout(num_voters, tuple(masks))


def sample_turnout(
    schedule: Schedule, voters: Sequence[Voter], rng: np.random.Generator
) -> Turnout:
    """Draw one turnout from the measure, consuming ``rng`` per the RNG contract."""
    layout = BlockLayout(schedule, [v.turnout_prob for v in voters], _num_elections(schedule))
    return matrix_to_turnout(layout.sample(rng))
