"""Runtime configuration for the engines."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class LabConfig:
    """
    Limits and parallelism settings shared by the engines.

    Attributes:
        enumeration_cap: Largest turnout support the exact path will enumerate.
        tally_bound: Largest per-party vote count scanned by the rule validators.
        alignment_voter_cap: Largest electorate for exhaustive alignment checks.
        partition_cap: Largest election count for partition enumeration.
        workers: Monte Carlo worker processes (1 runs in-process).
        chunk_size: Samples handed to a worker per task.
        wilson_threshold: Expected successes (or failures) below which the
            Wilson interval replaces the normal one.
    """

    enumeration_cap: int = 2**24
    tally_bound: int = 12
    alignment_voter_cap: int = 12
    partition_cap: int = 8
    workers: int = 1
    chunk_size: int = 4096
    wilson_threshold: float = 5.0

    def __post_init__(self):
        if self.enumeration_cap < 1:
            raise ValueError("enumeration_cap must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be positive")

    def with_overrides(self, **changes) -> "LabConfig":
        """Return a copy with the given fields replaced; ``None`` values are ignored."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


DEFAULT_CONFIG = LabConfig()
