"""Exception hierarchy for sweep-lab.

Validation helpers report problems as data; everything else raises one of
the exceptions below. Each exception carries the offending entity so the
CLI can name it.
"""

from __future__ import annotations

from typing import Any, Sequence


class SweepLabError(Exception):
    """Base class for all sweep-lab errors."""


class ScenarioError(SweepLabError):
    """A scenario or schedule failed structural validation."""

    def __init__(self, message: str, violations: Sequence[Any] = ()):
        super().__init__(message)
        self.violations = list(violations)


class PartitionError(SweepLabError):
    """A partition is malformed or two partitions live on different ground sets."""


class NotCoarserError(SweepLabError):
    """A schedule was expected to be coarser than another but is not.

    Attributes:
        voter: The voter whose partitions fail the comparison.
        elections: Two elections simultaneous in the finer schedule but not
            in the supposedly coarser one.
    """

    def __init__(self, voter: int, elections: tuple[int, int]):
        super().__init__(
            f"not coarser: elections {elections[0]} and {elections[1]} share a block "
            f"for voter {voter} in the finer schedule but not in the coarser one"
        )
        self.voter = voter
        self.elections = elections


class EnumerationCapError(SweepLabError):
    """Exact enumeration would exceed the configured support cap."""

    def __init__(self, support_size: int, cap: int):
        super().__init__(
            f"turnout support of {support_size} outcomes exceeds the enumeration cap "
            f"of {cap}; use the Monte Carlo method (--method mc) or raise --cap"
        )
        self.support_size = support_size
        self.cap = cap


class AlignmentError(SweepLabError):
    """A function tuple is not aligned, not monotone as declared, or negative.

    Attributes:
        voter: The voter at which the declared direction fails (None for
            negativity).
        index: Index of the offending function (or election).
        subset: The subset S witnessing the failure, as a sorted tuple.
    """

    def __init__(self, message: str, voter: int | None, index: int, subset: tuple[int, ...]):
        super().__init__(message)
        self.voter = voter
        self.index = index
        self.subset = subset


class AllianceError(SweepLabError):
    """An alliance structure is invalid or varies across elections."""


class MixtureError(SweepLabError):
    """Mixture weights or scenario shapes are inconsistent."""


class MonotonicityViolation(SweepLabError):
    """A coarser schedule produced a strictly smaller exact sweep probability."""

    def __init__(self, defects: Sequence[Any]):
        names = ", ".join(str(d) for d in defects)
        super().__init__(f"sweep probability decreased toward the coarser schedule: {names}")
        self.defects = list(defects)


class ScenarioFileError(SweepLabError):
    """A scenario file could not be parsed.

    Attributes:
        path: Dotted key path of the offending entry, e.g. ``voters[2].p``.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
