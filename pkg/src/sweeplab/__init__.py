"""
sweep-lab - single-party sweep probabilities under polling schedules.

Computes the probability that one party wins every election in a set when
voters turn out per poll date, exactly or by Monte Carlo, and checks the
correlation inequalities that make coarser schedules favour sweeps.

Example:
    >>> from sweeplab import Schedules, demos, exact_sweep_probability
    >>> scenario = demos.micro_scenario()
    >>> exact_sweep_probability(scenario, Schedules.simultaneous(scenario), 0)
    Fraction(5, 8)
"""

__version__ = "0.1.0"
__author__ = "sweep-lab developers"
__license__ = "MIT"

from . import demos
from .alliances import ContenderMap, alliance_transform, contender_map
from .config import DEFAULT_CONFIG, LabConfig
from .electorate import AlignmentResult, check_alignment, win_prob_function
from .errors import (
    AlignmentError,
    AllianceError,
    EnumerationCapError,
    MixtureError,
    MonotonicityViolation,
    NotCoarserError,
    PartitionError,
    ScenarioError,
    ScenarioFileError,
    SweepLabError,
)
from .inequality import (
    AlignedTuple,
    Direction,
    LatticeFunction,
    TrialSummary,
    expectation,
    harris_covariance,
    harris_via_theorem_d,
    proof_identity_check,
    random_aligned_tuple,
    random_increasing_pair,
    run_harris_trials,
    run_identity_trials,
    run_theorem_d_trials,
    verify_theorem_d,
)
from .lattice import (
    MergeStep,
    Relation,
    bell_number,
    coarsening_chain,
    enumerate_partitions,
    is_coarser,
    is_coarser_staggered,
    merge_blocks,
    relation,
)
from .model import (
    Alliance,
    AllianceKind,
    AllianceStructure,
    ElectionSpec,
    Rounding,
    RuleVariant,
    Scenario,
    Schedule,
    Violation,
    Voter,
    WinRuleSpec,
    boost_turnout,
    canonicalize_partition,
    canonicalize_schedule,
    make_scenario,
    validate_scenario,
)
from .rules import (
    ValidationResult,
    allocate_seats,
    make_rule,
    tally,
    validate_exclusivity,
    validate_monotonicity,
)
from .sweep import (
    Method,
    ScheduleComparison,
    SweepReport,
    compare_schedules,
    exact_sweep_probability,
    lattice_scan,
    mc_sweep_probability,
    mixture_sweep_probability,
    nature_mixture,
    sweep_prob_given_turnout,
)
from .turnout import Turnout, enumerate_turnouts, sample_turnout


class Schedules:
    """
    Convenience constructors for the common uniform schedules.

    Each method takes a :class:`Scenario` and returns a :class:`Schedule`
    covering all of its voters.
    """

    @staticmethod
    def simultaneous(scenario: Scenario) -> Schedule:
        """
        Every election on one poll date.

        Returns:
            Schedule: the coarsest schedule.
        """
        return scenario.simultaneous()

    @staticmethod
    def separate(scenario: Scenario) -> Schedule:
        """
        Every election on its own poll date.

        Returns:
            Schedule: the finest schedule.
        """
        return scenario.separate()

    @staticmethod
    def uniform(scenario: Scenario, partition) -> Schedule:
        """
        The same partition of the elections for every voter.

        Args:
            partition: Blocks of election ids, e.g. ``[[0, 1], [2]]``.
        """
        return Schedule.uniform(partition, scenario.voter_ids)
