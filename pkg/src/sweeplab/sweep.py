"""Sweep probabilities: exact enumeration, Monte Carlo, comparisons, mixtures.

The probability that contender ``s`` sweeps is the expectation over turnouts
of ``f_1^s(H_1) * ... * f_n^s(H_n)``. Taking the product treats the tie
coins of different elections as independent; that is a modelling choice,
not a consequence of the turnout model.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from multiprocessing import Pool
from typing import Mapping, Sequence

import numpy as np

from .alliances import contender_map
from .config import DEFAULT_CONFIG, LabConfig
from .electorate import ElectionEvaluator, election_evaluators
from .errors import MixtureError, MonotonicityViolation
from .lattice import Relation, enumerate_partitions, is_coarser, relation
from .model import Partition, Scenario, Schedule, ensure_valid, to_probability, with_types
from .rules import WinRule
from .turnout import BlockLayout, Turnout, enumerate_weighted, stream_key, substream

logger = logging.getLogger(__name__)

Z_95 = 1.959963984540054


class Method(str, Enum):
    EXACT = "exact"
    MONTE_CARLO = "mc"


@dataclass(frozen=True)
class SweepReport:
    """
    Per-contender sweep probabilities for one scenario and schedule.

    Exact reports hold :class:`~fractions.Fraction` values and no interval;
    Monte Carlo reports hold floats, the sample count, 95% half-widths and
    the master seed.
    """

    contenders: tuple[str, ...]
    per_party: tuple[Fraction | float, ...]
    any_party: Fraction | float
    method: Method
    scenario: str = "scenario"
    schedule: str = "schedule"
    samples: int | None = None
    half_widths: tuple[float, ...] | None = None
    any_half_width: float | None = None
    seed: int | None = None
    focus: int | None = None

    def probability(self, party: int) -> Fraction | float:
        return self.per_party[party]

    def half_width(self, party: int) -> float | None:
        return None if self.half_widths is None else self.half_widths[party]

    @property
    def parties(self) -> tuple[int, ...]:
        """Contenders the report is about (the focus, or all of them)."""
        if self.focus is not None:
            return (self.focus,)
        return tuple(range(len(self.contenders)))


@dataclass(frozen=True)
class Defect:
    """A contender whose sweep probability fell toward the coarser schedule."""

    party: int
    coarse: Fraction | float
    fine: Fraction | float

    def __str__(self) -> str:
        return f"party {self.party}: coarse {self.coarse} < fine {self.fine}"


@dataclass(frozen=True)
class ScheduleComparison:
    """
    Two sweep reports on the same scenario plus how the schedules relate.

    ``deltas[s]`` is report A minus report B. ``defects`` lists contenders
    whose probability strictly decreased toward the coarser schedule (for
    Monte Carlo, only beyond the confidence intervals).
    """

    report_a: SweepReport
    report_b: SweepReport
    relation: Relation
    deltas: tuple[Fraction | float, ...]
    defects: tuple[Defect, ...] = field(default=())

    def raise_for_defects(self) -> None:
        if self.defects:
            raise MonotonicityViolation(self.defects)


def sweep_prob_given_turnout(
    scenario: Scenario,
    turnout: Turnout,
    party: int,
    evaluators: Sequence[ElectionEvaluator] | None = None,
) -> Fraction:
    """Product over elections of the contender's win probability given who voted."""
    evaluators = evaluators or election_evaluators(scenario, None)
    value = Fraction(1)
    for evaluate, voted in zip(evaluators, turnout.by_election):
        value *= evaluate(voted)[party]
        if not value:
            break
    return value


def exact_sweep_probabilities(
    scenario: Scenario,
    schedule: Schedule,
    config: LabConfig = DEFAULT_CONFIG,
    rules: Mapping[int, WinRule] | None = None,
) -> tuple[Fraction, ...]:
    """
    Exact sweep probability of every contender.

    Raises:
        EnumerationCapError: the turnout support exceeds ``config.enumeration_cap``.
    """
    ensure_valid(scenario, schedule)
    evaluators = election_evaluators(scenario, rules)
    k = evaluators[0].contenders.num_contenders
    totals = [Fraction(0)] * k
    stream = enumerate_weighted(
        schedule, scenario.turnout_probs, scenario.num_elections, config.enumeration_cap
    )
    for masks, prob in stream:
        vectors = [evaluate(voted) for evaluate, voted in zip(evaluators, masks)]
        for s in range(k):
            value = prob
            for vector in vectors:
                value *= vector[s]
                if not value:
                    break
            totals[s] += value
    return tuple(totals)


def exact_sweep_probability(
    scenario: Scenario, schedule: Schedule, party: int, config: LabConfig = DEFAULT_CONFIG
) -> Fraction:
    """Exact probability that ``party`` wins every election."""
    return exact_sweep_probabilities(scenario, schedule, config)[party]


def exact_sweep_report(
    scenario: Scenario,
    schedule: Schedule,
    config: LabConfig = DEFAULT_CONFIG,
    schedule_name: str = "schedule",
    party: int | None = None,
    rules: Mapping[int, WinRule] | None = None,
) -> SweepReport:
    values = exact_sweep_probabilities(scenario, schedule, config, rules)
    names = contender_names(scenario)
    report = SweepReport(
        contenders=names,
        per_party=values,
        any_party=sum(values, Fraction(0)),
        method=Method.EXACT,
        scenario=scenario.name,
        schedule=schedule_name,
        focus=party,
    )
    logger.info("exact sweep %s/%s: %s", scenario.name, schedule_name, values)
    return report


class MonteCarloKernel:
    """
    Evaluates the per-sample sweep values for a range of sample indices.

    Sample ``i`` reads its block uniforms from the Philox substream at
    ``i * layout.stride`` words, so any split of the index range into
    chunks reproduces the same values.
    """

    def __init__(self, scenario: Scenario, schedule: Schedule, batch_words: int = 1 << 20):
        self.evaluators = election_evaluators(scenario, None)
        contenders = self.evaluators[0].contenders
        self.num_lists = contenders.num_lists
        self.num_contenders = contenders.num_contenders
        self.layout = BlockLayout(schedule, scenario.turnout_probs, scenario.num_elections)
        self.batch_rows = max(1, batch_words // self.layout.stride)
        # one-hot ballots per election; ineligible voters get a zero row
        self.weights = np.zeros(
            (scenario.num_elections, scenario.num_voters, self.num_lists), dtype=np.float64
        )
        for h, voter in enumerate(scenario.voters):
            self.weights[:, h, contenders.ballot_of[voter.preferred_party]] = 1.0
        for l, election in enumerate(scenario.elections):
            if election.eligibility is not None:
                outside = sorted(set(range(scenario.num_voters)) - set(election.eligibility))
                self.weights[l, outside, :] = 0.0

    def evaluate(self, heads: np.ndarray) -> np.ndarray:
        """Sweep values for a ``(rows, blocks)`` array of block outcomes."""
        product = np.ones((len(heads), self.num_contenders), dtype=np.float64)
        for l, evaluator in enumerate(self.evaluators):
            voted = heads[:, self.layout.cell_block[:, l]].astype(np.float64)
            counts = np.rint(voted @ self.weights[l]).astype(np.int64)
            distinct, inverse = np.unique(counts, axis=0, return_inverse=True)
            probs = np.stack(
                [evaluator.float_probs(tuple(int(c) for c in row)) for row in distinct]
            )
            product *= probs[inverse.reshape(-1)]
        return product

    def run(self, start: int, stop: int, seed: int) -> np.ndarray:
        rng = substream(stream_key(seed), start, self.layout.stride)
        batches = []
        for first in range(start, stop, self.batch_rows):
            rows = min(self.batch_rows, stop - first)
            batches.append(self.evaluate(self.layout.draw_heads(rng, rows)))
        if not batches:
            return np.empty((0, self.num_contenders), dtype=np.float64)
        return np.concatenate(batches, axis=0)


_worker_kernel: MonteCarloKernel | None = None


def _init_worker(scenario: Scenario, schedule: Schedule) -> None:
    global _worker_kernel
    _worker_kernel = MonteCarloKernel(scenario, schedule)


def _run_chunk(task: tuple[int, int, int]) -> np.ndarray:
    assert _worker_kernel is not None
    return _worker_kernel.run(*task)


def _half_width(values: np.ndarray, threshold: float) -> tuple[float, float]:
    n = len(values)
    mean = float(np.mean(values))
    if n * mean < threshold or n * (1 - mean) < threshold:
        # Wilson score interval for estimates near 0 or 1
        z2 = Z_95 * Z_95
        spread = math.sqrt(max(mean * (1 - mean), 0.0) / n + z2 / (4 * n * n))
        return mean, Z_95 * spread / (1 + z2 / n)
    variance = float(np.var(values, ddof=1)) if n > 1 else 0.0
    return mean, Z_95 * math.sqrt(variance / n)


def mc_sample_values(
    scenario: Scenario, schedule: Schedule, samples: int, seed: int, config: LabConfig
) -> np.ndarray:
    """
    Per-sample sweep values, shape ``(samples, contenders)``.

    Samples are cut into index ranges of ``config.chunk_size``; the result
    is the same array for any worker count.
    """
    tasks = [
        (start, min(start + config.chunk_size, samples), seed)
        for start in range(0, samples, config.chunk_size)
    ]
    logger.debug(
        "monte carlo: %d samples in %d chunks, %d workers", samples, len(tasks), config.workers
    )
    if config.workers == 1 or len(tasks) == 1:
        kernel = MonteCarloKernel(scenario, schedule)
        chunks = [kernel.run(*task) for task in tasks]
    else:
        with Pool(
            processes=config.workers, initializer=_init_worker, initargs=(scenario, schedule)
        ) as pool:
            chunks = pool.map(_run_chunk, tasks)
    return np.concatenate(chunks, axis=0)


def mc_sweep_probability(
    scenario: Scenario,
    schedule: Schedule,
    samples: int,
    seed: int,
    party: int | None = None,
    config: LabConfig = DEFAULT_CONFIG,
    schedule_name: str = "schedule",
) -> SweepReport:
    """
    Monte Carlo estimate of every contender's sweep probability.

    Bit-identical for fixed ``(scenario, schedule, samples, seed)`` regardless
    of ``config.workers``.

    Raises:
        ValueError: ``samples`` is less than 1.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    ensure_valid(scenario, schedule)
    values = mc_sample_values(scenario, schedule, samples, seed, config)
    per_party, widths = [], []
    for s in range(values.shape[1]):
        mean, width = _half_width(values[:, s], config.wilson_threshold)
        per_party.append(mean)
        widths.append(width)
    any_mean, any_width = _half_width(values.sum(axis=1), config.wilson_threshold)
    names = contender_names(scenario)
    logger.info("mc sweep %s/%s (%d samples): %s", scenario.name, schedule_name, samples, per_party)
    return SweepReport(
        contenders=names,
        per_party=tuple(per_party),
        any_party=any_mean,
        method=Method.MONTE_CARLO,
        scenario=scenario.name,
        schedule=schedule_name,
        samples=samples,
        half_widths=tuple(widths),
        any_half_width=any_width,
        seed=seed,
        focus=party,
    )


def contender_names(scenario: Scenario) -> tuple[str, ...]:
    return contender_map(scenario).names


def sweep_report(
    scenario: Scenario,
    schedule: Schedule,
    method: Method,
    samples: int = 100_000,
    seed: int = 0,
    config: LabConfig = DEFAULT_CONFIG,
    schedule_name: str = "schedule",
    party: int | None = None,
    rules: Mapping[int, WinRule] | None = None,
) -> SweepReport:
    """
    Exact or Monte Carlo report. ``rules`` overrides built-in election rules
    and is only supported by the exact method.
    """
    if Method(method) is Method.EXACT:
        return exact_sweep_report(scenario, schedule, config, schedule_name, party, rules)
    if rules:
        raise ValueError("custom rules are only supported by the exact method")
    return mc_sweep_probability(scenario, schedule, samples, seed, party, config, schedule_name)


def _defects(coarse: SweepReport, fine: SweepReport) -> list[Defect]:
    out = []
    for s in range(len(coarse.per_party)):
        c, f = coarse.per_party[s], fine.per_party[s]
        if coarse.method is Method.EXACT:
            below = c < f
        else:
            below = c + (coarse.half_width(s) or 0.0) < f - (fine.half_width(s) or 0.0)
        if below:
            out.append(Defect(s, c, f))
    return out


def compare_schedules(
    scenario: Scenario,
    schedule_a: Schedule,
    schedule_b: Schedule,
    method: Method = Method.EXACT,
    samples: int = 100_000,
    seed: int = 0,
    config: LabConfig = DEFAULT_CONFIG,
    names: tuple[str, str] = ("a", "b"),
    rules: Mapping[int, WinRule] | None = None,
) -> ScheduleComparison:
    """
    Evaluate two schedules with the same method (and seed) and check that the
    coarser one never has a smaller sweep probability.

    Defects are returned, and logged at ERROR, never dropped; exact defects
    mean the rule set is not aligned or the engine is wrong.
    """
    rel = relation(schedule_a, schedule_b)
    report_a = sweep_report(
        scenario, schedule_a, method, samples, seed, config, names[0], rules=rules
    )
    report_b = sweep_report(
        scenario, schedule_b, method, samples, seed, config, names[1], rules=rules
    )
    deltas = tuple(a - b for a, b in zip(report_a.per_party, report_b.per_party))
    defects: list[Defect] = []
    if rel is Relation.COARSER:
        defects = _defects(report_a, report_b)
    elif rel is Relation.FINER:
        defects = _defects(report_b, report_a)
    for defect in defects:
        logger.error("schedule %s vs %s: %s", names[0], names[1], defect)
    return ScheduleComparison(report_a, report_b, rel, deltas, tuple(defects))


def _check_shapes(scenarios: Sequence[Scenario]) -> None:
    first = scenarios[0]
    for other in scenarios[1:]:
        if (
            other.num_voters != first.num_voters
            or other.num_elections != first.num_elections
            or contender_names(other) != contender_names(first)
        ):
            raise MixtureError(
                f"scenario {other.name!r} does not share voters, elections and contenders "
                f"with {first.name!r}"
            )


def mixture_sweep_probability(
    weighted: Sequence[tuple[Fraction | float | int | str, Scenario]],
    schedule: Schedule,
    party: int,
    method: Method = Method.EXACT,
    samples: int = 100_000,
    seed: int = 0,
    config: LabConfig = DEFAULT_CONFIG,
) -> Fraction | float:
    """
    Sweep probability when nature picks the voter types ex ante: the
    weighted average of the per-scenario sweep probabilities.

    Raises:
        MixtureError: negative weights, weights not summing to 1, or
            scenarios of different shapes.
    """
    if not weighted:
        raise MixtureError("mixture needs at least one scenario")
    weights = [to_probability(w) for w, _ in weighted]
    if any(w < 0 for w in weights):
        raise MixtureError("mixture weights must be nonnegative")
    total = sum(weights, Fraction(0))
    if total != 1:
        raise MixtureError(f"mixture weights sum to {total}, not 1")
    scenarios = [scenario for _, scenario in weighted]
    _check_shapes(scenarios)
    if Method(method) is Method.EXACT:
        values = [exact_sweep_probability(s, schedule, party, config) for s in scenarios]
        return sum((w * v for w, v in zip(weights, values)), Fraction(0))
    estimates = [
        float(mc_sweep_probability(s, schedule, samples, seed, party, config).per_party[party])
        for s in scenarios
    ]
    return float(sum(float(w) * v for w, v in zip(weights, estimates)))


TypeOverrides = Mapping[int, Fraction | float | int | str]


def nature_mixture(
    scenario: Scenario,
    outcomes: Sequence[tuple[Fraction | float | int | str, Mapping[int, int], TypeOverrides]],
) -> list[tuple[Fraction, Scenario]]:
    """
    Weighted scenarios for ex-ante moves of nature. Each outcome is
    ``(weight, preferred-party overrides, turnout overrides)`` keyed by voter id.
    """
    return [
        (to_probability(weight), with_types(scenario, parties, turnout))
        for weight, parties, turnout in outcomes
    ]


@dataclass(frozen=True)
class LatticeScan:
    """
    Exact sweep probabilities for every uniform partition and every
    comparable pair that violates monotonicity.

    ``violations`` holds ``(coarse index, fine index, party)`` triples into
    ``partitions``.
    """

    partitions: tuple[Partition, ...]
    values: tuple[tuple[Fraction, ...], ...]
    comparable_pairs: int
    violations: tuple[tuple[int, int, int], ...]


def lattice_scan(
    scenario: Scenario,
    config: LabConfig = DEFAULT_CONFIG,
    rules: Mapping[int, WinRule] | None = None,
    max_elections: int = 6,
) -> LatticeScan:
    """Audit the coarsening order over all uniform partitions of the election set."""
    n = scenario.num_elections
    if n > max_elections:
        raise ValueError(f"lattice scan is limited to {max_elections} elections, got {n}")
    partitions = enumerate_partitions(n, config.partition_cap)
    values = tuple(
        exact_sweep_probabilities(scenario, Schedule.uniform(p, scenario.voter_ids), config, rules)
        for p in partitions
    )
    pairs = 0
    violations = []
    for i, coarse in enumerate(partitions):
        for j, fine in enumerate(partitions):
            if i == j or not is_coarser(coarse, fine):
                continue
            pairs += 1
            for s, (c, f) in enumerate(zip(values[i], values[j])):
                if c < f:
                    logger.error(
                        "lattice scan: %s coarser than %s lowers party %d", coarse, fine, s
                    )
                    violations.append((i, j, s))
    logger.info("lattice scan: %d partitions, %d comparable pairs", len(partitions), pairs)
    return LatticeScan(partitions, values, pairs, tuple(violations))
