"""Coarsening order on partitions and staggered schedules.

A partition ``p`` is coarser than ``q`` when every block of ``q`` sits inside
a block of ``p``; a staggered schedule is coarser when that holds voter by
voter. Partitions are canonical tuples of ascending tuples (see
:func:`sweeplab.model.canonicalize_partition`).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from math import comb
from typing import Iterator, Sequence

from .errors import NotCoarserError, PartitionError
from .model import Partition, Schedule, canonicalize_partition

logger = logging.getLogger(__name__)


class Relation(str, Enum):
    """How schedule A relates to schedule B in the coarsening order."""

    EQUAL = "equal"
    COARSER = "coarser"
    FINER = "finer"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class MergeStep:
    """Merge blocks ``i`` and ``j`` (indices in the pre-merge canonical partition) for a voter."""

    voter: int
    i: int
    j: int


def _ground(partition: Partition) -> frozenset[int]:
    return frozenset(l for block in partition for l in block)


def _block_index(partition: Partition) -> dict[int, int]:
    return {l: index for index, block in enumerate(partition) for l in block}


def _split_witness(p_coarse: Partition, p_fine: Partition) -> tuple[int, int] | None:
    where = _block_index(p_coarse)
    for block in p_fine:
        for l in block[1:]:
            if where[l] != where[block[0]]:
                return (block[0], l)
    return None


def is_coarser(p_coarse: Sequence[Sequence[int]], p_fine: Sequence[Sequence[int]]) -> bool:
    """
    True iff every block of ``p_fine`` is contained in a block of ``p_coarse``.

    Raises:
        PartitionError: the partitions cover different election sets.
    """
    coarse = canonicalize_partition(p_coarse)
    fine = canonicalize_partition(p_fine)
    if _ground(coarse) != _ground(fine):
        raise PartitionError("partitions are over different election sets")
    return _split_witness(coarse, fine) is None


def is_coarser_staggered(s_coarse: Schedule, s_fine: Schedule) -> bool:
    """
    True iff ``s_coarse`` is coarser than ``s_fine`` for every voter.

    Raises:
        PartitionError: the schedules cover different voter sets.
    """
    if set(s_coarse.partitions) != set(s_fine.partitions):
        raise PartitionError("schedules are over different voter sets")
    return all(is_coarser(s_coarse[h], s_fine[h]) for h in s_coarse.voters)


def relation(s_a: Schedule, s_b: Schedule) -> Relation:
    a_coarser = is_coarser_staggered(s_a, s_b)
    b_coarser = is_coarser_staggered(s_b, s_a)
    if a_coarser and b_coarser:
        return Relation.EQUAL
    if a_coarser:
        return Relation.COARSER
    if b_coarser:
        return Relation.FINER
    return Relation.INCOMPARABLE


def merge_blocks(partition: Sequence[Sequence[int]], i: int, j: int) -> Partition:
    """
    Replace blocks ``i`` and ``j`` of the canonical partition by their union.

    Raises:
        PartitionError: ``i == j`` or either index is out of range.
    """
    canonical = canonicalize_partition(partition)
    if i == j or not (0 <= i < len(canonical) and 0 <= j < len(canonical)):
        raise PartitionError(
            f"cannot merge blocks {i} and {j} of a partition with {len(canonical)} blocks"
        )
    merged = canonical[i] + canonical[j]
    rest = [block for index, block in enumerate(canonical) if index not in (i, j)]
    return canonicalize_partition(rest + [merged])


def _voter_chain(h: int, fine: Partition, coarse: Partition) -> list[MergeStep]:
    steps = []
    where = _block_index(coarse)
    current = fine
    while len(current) > len(coarse):
        # lowest-indexed pair of blocks that share a coarse block
        i, j = next(
            (i, j)
            for i in range(len(current))
            for j in range(i + 1, len(current))
            if where[current[i][0]] == where[current[j][0]]
        )
        steps.append(MergeStep(h, i, j))
        current = merge_blocks(current, i, j)
    return steps


def coarsening_chain(s_fine: Schedule, s_coarse: Schedule) -> list[MergeStep]:
    """
    A sequence of elementary merges turning ``s_fine`` into ``s_coarse``.

    Voters are processed in ascending id; within a voter the two
    lowest-indexed mergeable blocks are merged first.

    Raises:
        NotCoarserError: ``s_coarse`` is not coarser than ``s_fine``; names a
            witness voter and election pair.
    """
    if set(s_coarse.partitions) != set(s_fine.partitions):
        raise PartitionError("schedules are over different voter sets")
    steps: list[MergeStep] = []
    for h in s_fine.voters:
        fine = canonicalize_partition(s_fine[h])
        coarse = canonicalize_partition(s_coarse[h])
        if _ground(fine) != _ground(coarse):
            raise PartitionError(f"voter {h}: partitions are over different election sets")
        witness = _split_witness(coarse, fine)
        if witness is not None:
            raise NotCoarserError(h, witness)
        steps.extend(_voter_chain(h, fine, coarse))
    logger.debug("coarsening chain of %d merges", len(steps))
    return steps


def apply_chain(schedule: Schedule, steps: Sequence[MergeStep]) -> Schedule:
    """Replay merge steps on a schedule."""
    partitions = {h: canonicalize_partition(p) for h, p in schedule.partitions.items()}
    for step in steps:
        partitions[step.voter] = merge_blocks(partitions[step.voter], step.i, step.j)
    return Schedule(dict(sorted(partitions.items())))


def bell_number(n: int) -> int:
    """Number of set partitions of an n-element set."""
    if n < 0:
        raise ValueError("n must be >= 0")
    bells = [1]
    for k in range(1, n + 1):
        bells.append(sum(comb(k - 1, i) * bells[i] for i in range(k)))
    return bells[n]


def _set_partitions(elements: list[int]) -> Iterator[list[list[int]]]:
    if not elements:
        yield []
        return
    rest, last = elements[:-1], elements[-1]
    for smaller in _set_partitions(rest):
        for i, block in enumerate(smaller):
            yield smaller[:i] + [block + [last]] + smaller[i + 1 :]
        yield smaller + [[last]]


@lru_cache(maxsize=None)
def _all_partitions(n: int) -> tuple[Partition, ...]:
    return tuple(canonicalize_partition(p) for p in _set_partitions(list(range(n))))


def enumerate_partitions(n: int, cap: int = 8) -> tuple[Partition, ...]:
    """
    All Bell(n) canonical partitions of ``{0..n-1}`` in a fixed order.

    Raises:
        ValueError: ``n`` is negative or above ``cap``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > cap:
        raise ValueError(f"refusing to enumerate partitions of {n} elections (cap {cap})")
    return _all_partitions(n)
