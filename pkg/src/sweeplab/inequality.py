"""Correlation inequalities on the subset lattice of the electorate.

Functions on subsets of H are explicit power-set tables indexed by voter
bitmask, so monotonicity and alignment are decided by scanning every subset.
All arithmetic is exact.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .config import DEFAULT_CONFIG, LabConfig
from .errors import AlignmentError
from .lattice import apply_chain, coarsening_chain, enumerate_partitions, is_coarser
from .model import Partition, Schedule, to_probability
from .turnout import enumerate_weighted, sample_rng

logger = logging.getLogger(__name__)

MAX_TABLE_VOTERS = 12
MAX_RANDOM_VOTERS = 10


class Direction(str, Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"


def _subset(mask: int, num_voters: int) -> tuple[int, ...]:
    return tuple(h for h in range(num_voters) if mask >> h & 1)


@dataclass(frozen=True)
class LatticeFunction:
    """
    A rational-valued function on the subsets of ``{0..num_voters-1}``.

    ``values[S]`` is the value at the subset with bitmask ``S``.
    """

    num_voters: int
    values: tuple[Fraction, ...]

    def __post_init__(self):
        if not 0 <= self.num_voters <= MAX_TABLE_VOTERS:
            raise ValueError(f"lattice functions are limited to {MAX_TABLE_VOTERS} voters")
        if len(self.values) != 1 << self.num_voters:
            raise ValueError(
                f"table has {len(self.values)} entries, expected {1 << self.num_voters}"
            )
        object.__setattr__(
            self,
            "values",
            tuple(to_probability(int(v) if isinstance(v, bool) else v) for v in self.values),
        )

    def __call__(self, subset: int | Iterable[int]) -> Fraction:
        if isinstance(subset, int):
            return self.values[subset]
        mask = 0
        for h in subset:
            mask |= 1 << h
        return self.values[mask]

    @staticmethod
    def from_callable(num_voters: int, f: Callable[[frozenset[int]], object]) -> "LatticeFunction":
        return LatticeFunction(
            num_voters,
            tuple(f(frozenset(_subset(mask, num_voters))) for mask in range(1 << num_voters)),
        )

    @staticmethod
    def constant(num_voters: int, value: Fraction | int | str = 1) -> "LatticeFunction":
        return LatticeFunction(num_voters, (to_probability(value),) * (1 << num_voters))

    @staticmethod
    def indicator(num_voters: int, voter: int) -> "LatticeFunction":
        """1 on subsets containing ``voter``, else 0."""
        return LatticeFunction(
            num_voters, tuple(Fraction(mask >> voter & 1) for mask in range(1 << num_voters))
        )

    def shifted(self, constant: Fraction | int | str) -> "LatticeFunction":
        c = to_probability(constant)
        return LatticeFunction(self.num_voters, tuple(v + c for v in self.values))

    def minimum(self) -> Fraction:
        return min(self.values)

    def direction_witness(self, voter: int, direction: Direction) -> tuple[int, ...] | None:
        """A subset S without ``voter`` at which ``f(S + voter) - f(S)`` has the wrong sign."""
        bit = 1 << voter
        for mask in range(1 << self.num_voters):
            if mask & bit:
                continue
            step = self.values[mask | bit] - self.values[mask]
            if (direction is Direction.INCREASING and step < 0) or (
                direction is Direction.DECREASING and step > 0
            ):
                return _subset(mask, self.num_voters)
        return None

    def is_increasing(self) -> bool:
        return all(
            self.direction_witness(h, Direction.INCREASING) is None for h in range(self.num_voters)
        )


@dataclass(frozen=True)
class AlignedTuple:
    """
    Functions ``f_1..f_n`` with a declared direction per voter: at every
    voter all functions increase, or all decrease.
    """

    functions: tuple[LatticeFunction, ...]
    directions: tuple[Direction, ...]

    @property
    def num_voters(self) -> int:
        return len(self.directions)

    @property
    def num_functions(self) -> int:
        return len(self.functions)

    def validate(self) -> None:
        """
        Raises:
            AlignmentError: a function is negative somewhere, lives on the
                wrong number of voters, or moves against the declared
                direction at some voter; the error carries the witness.
        """
        for index, f in enumerate(self.functions):
            if f.num_voters != self.num_voters:
                raise AlignmentError(
                    f"function {index} is defined on {f.num_voters} voters, "
                    f"expected {self.num_voters}",
                    None,
                    index,
                    (),
                )
            for mask, value in enumerate(f.values):
                if value < 0:
                    subset = _subset(mask, self.num_voters)
                    raise AlignmentError(
                        f"function {index} is negative ({value}) at {list(subset)}",
                        None,
                        index,
                        subset,
                    )
        for h, direction in enumerate(self.directions):
            for index, f in enumerate(self.functions):
                witness = f.direction_witness(h, direction)
                if witness is not None:
                    raise AlignmentError(
                        f"function {index} is not {direction.value} at voter {h} "
                        f"(subset {list(witness)})",
                        h,
                        index,
                        witness,
                    )

    @staticmethod
    def of(
        functions: Sequence[LatticeFunction], directions: Sequence[Direction | str]
    ) -> "AlignedTuple":
        return AlignedTuple(tuple(functions), tuple(Direction(d) for d in directions))


def _as_functions(F) -> tuple[LatticeFunction, ...]:
    if isinstance(F, AlignedTuple):
        return F.functions
    if isinstance(F, LatticeFunction):
        return (F,)
    return tuple(F)


def expectation(
    F: AlignedTuple | LatticeFunction | Sequence[LatticeFunction],
    schedule: Schedule,
    p: Sequence[Fraction | int | float | str],
    config: LabConfig = DEFAULT_CONFIG,
) -> Fraction:
    """
    Exact expectation of ``f_1(H_1) * ... * f_n(H_n)`` under the turnout
    measure of ``schedule`` with per-voter probabilities ``p``.

    Raises:
        ValueError: dimensions of functions, schedule and ``p`` disagree.
        EnumerationCapError: the turnout support exceeds the cap.
    """
    functions = _as_functions(F)
    m, n = len(p), len(functions)
    if tuple(schedule.voters) != tuple(range(m)):
        raise ValueError(f"schedule covers voters {list(schedule.voters)}, expected 0..{m - 1}")
    for h in range(m):
        if sorted(l for block in schedule[h] for l in block) != list(range(n)):
            raise ValueError(f"voter {h}: partition does not cover {n} functions")
    for index, f in enumerate(functions):
        if f.num_voters != m:
            raise ValueError(f"function {index} is defined on {f.num_voters} voters, expected {m}")
    probs = [to_probability(q) for q in p]
    total = Fraction(0)
    for masks, prob in enumerate_weighted(schedule, probs, n, config.enumeration_cap):
        value = prob
        for f, mask in zip(functions, masks):
            value *= f.values[mask]
            if not value:
                break
        total += value
    return total


@dataclass(frozen=True)
class TheoremDResult:
    """
    ``margin`` is E(coarse) - E(fine). ``step_margins`` holds the margin of
    each elementary merge when a stepwise check was requested.
    """

    margin: Fraction
    holds: bool
    step_margins: tuple[Fraction, ...] = field(default=())

    def __bool__(self) -> bool:
        return self.holds


def verify_theorem_d(
    F: AlignedTuple,
    fine: Schedule,
    coarse: Schedule,
    p: Sequence[Fraction | int | float | str],
    config: LabConfig = DEFAULT_CONFIG,
    stepwise: bool = False,
) -> TheoremDResult:
    """
    Check that merging poll dates can only raise the expectation of an
    aligned nonnegative tuple.

    Raises:
        NotCoarserError: ``coarse`` is not coarser than ``fine``.
        AlignmentError: ``F`` is not aligned or not nonnegative.
    """
    chain = coarsening_chain(fine, coarse)
    F.validate()
    low = expectation(F, fine, p, config)
    high = expectation(F, coarse, p, config)
    steps: list[Fraction] = []
    if stepwise:
        previous, current = low, fine
        for step in chain:
            current = apply_chain(current, [step])
            value = expectation(F, current, p, config)
            steps.append(value - previous)
            previous = value
    margin = high - low
    holds = margin >= 0 and all(s >= 0 for s in steps)
    if not holds:
        logger.error("merge lowered the expectation: margin %s, steps %s", margin, steps)
    return TheoremDResult(margin, holds, tuple(steps))


def _subset_weights(p: Sequence[Fraction]) -> list[Fraction]:
    m = len(p)
    weights = []
    for mask in range(1 << m):
        w = Fraction(1)
        for h in range(m):
            w *= p[h] if mask >> h & 1 else 1 - p[h]
        weights.append(w)
    return weights


def _require_increasing(f: LatticeFunction, index: int) -> None:
    for h in range(f.num_voters):
        witness = f.direction_witness(h, Direction.INCREASING)
        if witness is not None:
            raise AlignmentError(
                f"function {index} is not increasing at voter {h} (subset {list(witness)})",
                h,
                index,
                witness,
            )


def harris_covariance(
    f1: LatticeFunction, f2: LatticeFunction, p: Sequence[Fraction | int | float | str]
) -> Fraction:
    """
    Exact covariance of two increasing functions under the product measure
    where voter ``h`` is in the random subset with probability ``p[h]``.

    Raises:
        AlignmentError: either function is not increasing.
        ValueError: the functions and ``p`` disagree on the number of voters.
    """
    if not f1.num_voters == f2.num_voters == len(p):
        raise ValueError("functions and probabilities disagree on the number of voters")
    _require_increasing(f1, 1)
    _require_increasing(f2, 2)
    weights = _subset_weights([to_probability(q) for q in p])
    e1 = sum((w * v for w, v in zip(weights, f1.values)), Fraction(0))
    e2 = sum((w * v for w, v in zip(weights, f2.values)), Fraction(0))
    e12 = sum((w * a * b for w, a, b in zip(weights, f1.values, f2.values)), Fraction(0))
    return e12 - e1 * e2


def harris_via_theorem_d(
    f1: LatticeFunction,
    f2: LatticeFunction,
    p: Sequence[Fraction | int | float | str],
    config: LabConfig = DEFAULT_CONFIG,
) -> Fraction:
    """
    The covariance of two increasing functions computed as a merge margin:
    every voter votes on one date for both functions versus on two separate
    dates. Negative functions are shifted up first, which leaves the
    covariance unchanged.
    """
    m = len(p)
    shifted = []
    for f in (f1, f2):
        low = f.minimum()
        shifted.append(f.shifted(-low) if low < 0 else f)
    F = AlignedTuple(tuple(shifted), (Direction.INCREASING,) * m)
    fine = Schedule.separate(2, range(m))
    coarse = Schedule.simultaneous(2, range(m))
    return verify_theorem_d(F, fine, coarse, p, config).margin


def identity_sides(
    a1: Fraction, a2: Fraction, b1: Fraction, b2: Fraction, c: Fraction, p: Fraction
) -> tuple[Fraction, Fraction]:
    """
    ``(A, B)``: one shared coin for both functions versus two independent
    coins, for a single voter whose other voters are held fixed.
    """
    q = 1 - p
    a = (p * a1 * a2 + q * b1 * b2) * c
    b = (p * p * a1 * a2 + p * q * (a1 * b2 + b1 * a2) + q * q * b1 * b2) * c
    return a, b


def proof_identity_check(a1, a2, b1, b2, c, p) -> bool:
    """True iff ``A - B == p(1-p)(a1-b1)(a2-b2)c`` exactly."""
    a1, a2, b1, b2, c, p = (to_probability(x) for x in (a1, a2, b1, b2, c, p))
    a, b = identity_sides(a1, a2, b1, b2, c, p)
    return a - b == p * (1 - p) * (a1 - b1) * (a2 - b2) * c


def random_rational(rng: np.random.Generator, max_denominator: int = 12) -> Fraction:
    """A rational in [0, 1] with a random small denominator."""
    d = int(rng.integers(1, max_denominator + 1))
    return Fraction(int(rng.integers(0, d + 1)), d)


def _zeta(increments: list[Fraction], m: int) -> list[Fraction]:
    values = list(increments)
    for h in range(m):
        bit = 1 << h
        for mask in range(1 << m):
            if mask & bit:
                values[mask] += values[mask ^ bit]
    return values


def random_aligned_tuple(
    m: int,
    n: int,
    directions: Sequence[Direction | str],
    rng: np.random.Generator,
    max_increment: int = 9,
) -> AlignedTuple:
    """
    Random nonnegative functions that move in the declared direction at every
    voter.

    Each function sums nonnegative random increments over the subsets below
    each set, which makes it increasing everywhere; voters declared
    decreasing are then flipped (``f(S)`` becomes ``f(S xor D)``).
    """
    if not 0 <= m <= MAX_RANDOM_VOTERS:
        raise ValueError(f"random tuples are limited to {MAX_RANDOM_VOTERS} voters")
    if len(directions) != m:
        raise ValueError(f"expected {m} directions, got {len(directions)}")
    dirs = tuple(Direction(d) for d in directions)
    flip = 0
    for h, d in enumerate(dirs):
        if d is Direction.DECREASING:
            flip |= 1 << h
    functions = []
    for _ in range(n):
        increments = [
            Fraction(
                int(rng.integers(0, max_increment + 1)), int(rng.integers(1, max_increment + 1))
            )
            for _ in range(1 << m)
        ]
        values = _zeta(increments, m)
        functions.append(LatticeFunction(m, tuple(values[mask ^ flip] for mask in range(1 << m))))
    return AlignedTuple(tuple(functions), dirs)


def random_directions(m: int, rng: np.random.Generator) -> tuple[Direction, ...]:
    return tuple(
        Direction.DECREASING if rng.random() < 0.5 else Direction.INCREASING for _ in range(m)
    )


def random_increasing_pair(
    m: int, rng: np.random.Generator
) -> tuple[LatticeFunction, LatticeFunction]:
    pair = random_aligned_tuple(m, 2, (Direction.INCREASING,) * m, rng)
    return pair.functions[0], pair.functions[1]


def _coarsenings(partition: Partition) -> list[Partition]:
    n = sum(len(block) for block in partition)
    return [p for p in enumerate_partitions(n) if is_coarser(p, partition)]


def random_staggered_pair(
    m: int, n: int, rng: np.random.Generator
) -> tuple[Schedule, Schedule]:
    """A random per-voter schedule and a random coarsening of it."""
    partitions = enumerate_partitions(n)
    fine, coarse = {}, {}
    for h in range(m):
        fine[h] = partitions[int(rng.integers(0, len(partitions)))]
        above = _coarsenings(fine[h])
        coarse[h] = above[int(rng.integers(0, len(above)))]
    return Schedule(fine), Schedule(coarse)


@dataclass(frozen=True)
class TrialSummary:
    """
    Aggregate outcome of a batch of randomized checks.

    Attributes:
        kind: ``theorem-d``, ``harris`` or ``identity``.
        trials: Generated inputs.
        checks: Individual comparisons made (several per input for
            ``theorem-d``).
        failures: Human-readable description of each failed check.
        min_margin: Smallest margin observed (None for ``identity``).
    """

    kind: str
    trials: int
    seed: int
    checks: int
    failures: tuple[str, ...]
    min_margin: Fraction | None = None

    @property
    def passed(self) -> bool:
        return not self.failures


def _track_min(current: Fraction | None, value: Fraction) -> Fraction:
    return value if current is None or value < current else current


def run_theorem_d_trials(
    trials: int,
    seed: int,
    max_voters: int = 3,
    max_elections: int = 3,
    config: LabConfig = DEFAULT_CONFIG,
) -> TrialSummary:
    """
    Random aligned nonnegative tuples checked against every comparable pair
    of uniform partitions plus one random staggered pair per tuple.
    """
    failures: list[str] = []
    checks = 0
    smallest: Fraction | None = None
    for trial in range(trials):
        rng = sample_rng(seed, trial)
        m = int(rng.integers(1, max_voters + 1))
        n = int(rng.integers(1, max_elections + 1))
        F = random_aligned_tuple(m, n, random_directions(m, rng), rng)
        p = [random_rational(rng) for _ in range(m)]
        F.validate()
        partitions = enumerate_partitions(n)
        values = [
            expectation(F, Schedule.uniform(part, range(m)), p, config) for part in partitions
        ]
        for i, coarse in enumerate(partitions):
            for j, fine in enumerate(partitions):
                if i != j and is_coarser(coarse, fine):
                    checks += 1
                    margin = values[i] - values[j]
                    smallest = _track_min(smallest, margin)
                    if margin < 0:
                        failures.append(f"trial {trial}: {coarse} over {fine} margin {margin}")
        fine_s, coarse_s = random_staggered_pair(m, n, rng)
        result = verify_theorem_d(F, fine_s, coarse_s, p, config)
        checks += 1
        smallest = _track_min(smallest, result.margin)
        if not result.holds:
            failures.append(f"trial {trial}: staggered margin {result.margin}")
    for failure in failures:
        logger.error("theorem-d %s", failure)
    logger.info("theorem-d: %d trials, %d checks, %d failures", trials, checks, len(failures))
    return TrialSummary("theorem-d", trials, seed, checks, tuple(failures), smallest)


def run_harris_trials(
    trials: int, seed: int, max_voters: int = 4, config: LabConfig = DEFAULT_CONFIG
) -> TrialSummary:
    """
    Random increasing pairs: the covariance must be nonnegative, unchanged
    by adding constants and equal to the merge margin.
    """
    failures: list[str] = []
    smallest: Fraction | None = None
    for trial in range(trials):
        rng = sample_rng(seed, trial)
        m = int(rng.integers(1, max_voters + 1))
        f1, f2 = random_increasing_pair(m, rng)
        f1 = f1.shifted(-random_rational(rng) * 4)
        p = [random_rational(rng) for _ in range(m)]
        cov = harris_covariance(f1, f2, p)
        smallest = _track_min(smallest, cov)
        if cov < 0:
            failures.append(f"trial {trial}: covariance {cov}")
        shift = random_rational(rng) * 10 - 5
        if harris_covariance(f1.shifted(shift), f2.shifted(-shift), p) != cov:
            failures.append(f"trial {trial}: covariance changed under constant shift {shift}")
        via_merge = harris_via_theorem_d(f1, f2, p, config)
        if via_merge != cov:
            failures.append(f"trial {trial}: merge margin {via_merge} != covariance {cov}")
    for failure in failures:
        logger.error("harris %s", failure)
    logger.info("harris: %d trials, %d failures", trials, len(failures))
    return TrialSummary("harris", trials, seed, 3 * trials, tuple(failures), smallest)


def _signed_rational(rng: np.random.Generator) -> Fraction:
    return Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, 21)))


def run_identity_trials(trials: int, seed: int) -> TrialSummary:
    """Random rational inputs for the shared-coin versus two-coin identity."""
    failures: list[str] = []
    for trial in range(trials):
        rng = sample_rng(seed, trial)
        a1, a2, b1, b2, c = (_signed_rational(rng) for _ in range(5))
        p = random_rational(rng, 20)
        if not proof_identity_check(a1, a2, b1, b2, c, p):
            failures.append(f"trial {trial}: {(a1, a2, b1, b2, c, p)}")
    for failure in failures:
        logger.error("identity %s", failure)
    logger.info("identity: %d trials, %d failures", trials, len(failures))
    return TrialSummary("identity", trials, seed, trials, tuple(failures))
