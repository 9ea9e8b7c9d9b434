"""Report rows and the CSV / JSON-records writers.

Every row type is a flat frozen dataclass; its field order is the column
order. Probabilities are decimal strings with 12 significant digits, exact
values are ``num/den`` strings.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, fields
from decimal import Decimal, localcontext
from enum import Enum
from fractions import Fraction
from typing import IO, Iterable, Sequence

from .inequality import TrialSummary
from .model import Partition
from .rules import ValidationResult
from .sweep import LatticeScan, ScheduleComparison, SweepReport

SIGNIFICANT_DIGITS = 12


class Format(str, Enum):
    CSV = "csv"
    RECORDS = "records"


def decimal_string(value: Fraction | float | None) -> str:
    """``value`` rounded to 12 significant digits, in fixed-point notation."""
    if value is None:
        return ""
    with localcontext() as ctx:
        ctx.prec = SIGNIFICANT_DIGITS
        if isinstance(value, Fraction):
            rounded = Decimal(value.numerator) / Decimal(value.denominator)
        else:
            # unary plus rounds to the context precision
            rounded = +Decimal(repr(float(value)))
    return format(rounded.normalize(), "f") if rounded else "0"


def fraction_string(value: Fraction | float | None) -> str:
    if not isinstance(value, Fraction):
        return ""
    return f"{value.numerator}/{value.denominator}"


def _optional(value) -> str:
    return "" if value is None else str(value)


@dataclass(frozen=True)
class ReportRow:
    scenario: str
    schedule: str
    party: str
    probability: str
    exact: str
    method: str
    samples: str
    ci_half_width: str
    seed: str


@dataclass(frozen=True)
class ComparisonRow:
    scenario: str
    schedule_a: str
    schedule_b: str
    relation: str
    party: str
    probability_a: str
    probability_b: str
    delta: str
    exact_delta: str
    defect: str
    method: str
    samples: str
    seed: str


@dataclass(frozen=True)
class LatticeRow:
    scenario: str
    partition: str
    party: str
    probability: str
    exact: str


@dataclass(frozen=True)
class ValidationRow:
    scenario: str
    election: str
    check: str
    subject: str
    passed: str
    detail: str


@dataclass(frozen=True)
class TrialRow:
    kind: str
    trials: str
    seed: str
    checks: str
    failures: str
    min_margin: str


def _width(value: float | None) -> str:
    return "" if value is None else decimal_string(value)


def report_rows(report: SweepReport) -> list[ReportRow]:
    """One row per reported contender, then an ``any`` row when all are reported."""
    rows = []

    def row(party: str, value, width) -> ReportRow:
        return ReportRow(
            scenario=report.scenario,
            schedule=report.schedule,
            party=party,
            probability=decimal_string(value),
            exact=fraction_string(value),
            method=report.method.value,
            samples=_optional(report.samples),
            ci_half_width=_width(width),
            seed=_optional(report.seed),
        )

    for s in report.parties:
        rows.append(row(report.contenders[s], report.per_party[s], report.half_width(s)))
    if report.focus is None:
        rows.append(row("any", report.any_party, report.any_half_width))
    return rows


def comparison_rows(comparison: ScheduleComparison, parties: Sequence[int] | None = None):
    a, b = comparison.report_a, comparison.report_b
    defective = {d.party for d in comparison.defects}
    chosen = parties if parties is not None else range(len(a.contenders))
    return [
        ComparisonRow(
            scenario=a.scenario,
            schedule_a=a.schedule,
            schedule_b=b.schedule,
            relation=comparison.relation.value,
            party=a.contenders[s],
            probability_a=decimal_string(a.per_party[s]),
            probability_b=decimal_string(b.per_party[s]),
            delta=decimal_string(comparison.deltas[s]),
            exact_delta=fraction_string(comparison.deltas[s]),
            defect="yes" if s in defective else "no",
            method=a.method.value,
            samples=_optional(a.samples),
            seed=_optional(a.seed),
        )
        for s in chosen
    ]


def partition_label(partition: Partition, names: Sequence[str]) -> str:
    """``{first,second}|{third}``."""
    return "|".join("{" + ",".join(names[l] for l in block) + "}" for block in partition)


def lattice_rows(
    scan: LatticeScan, scenario: str, contenders: Sequence[str], elections: Sequence[str]
) -> list[LatticeRow]:
    return [
        LatticeRow(
            scenario=scenario,
            partition=partition_label(partition, elections),
            party=contenders[s],
            probability=decimal_string(value),
            exact=fraction_string(value),
        )
        for partition, values in zip(scan.partitions, scan.values)
        for s, value in enumerate(values)
    ]


def validation_row(
    scenario: str,
    election: str,
    check: str,
    subject: str,
    result: ValidationResult | bool,
    detail: str = "",
) -> ValidationRow:
    passed = bool(result)
    if isinstance(result, ValidationResult) and not detail:
        detail = result.detail
    return ValidationRow(scenario, election, check, subject, "yes" if passed else "no", detail)


def trial_row(summary: TrialSummary) -> TrialRow:
    return TrialRow(
        kind=summary.kind,
        trials=str(summary.trials),
        seed=str(summary.seed),
        checks=str(summary.checks),
        failures=str(len(summary.failures)),
        min_margin=fraction_string(summary.min_margin),
    )


def write_rows(rows: Iterable, fmt: Format | str, stream: IO[str], header: bool = True) -> None:
    """
    Write dataclass rows as CSV (header row of field names) or as one JSON
    object per line with the same keys in the same order.
    """
    rows = list(rows)
    if not rows:
        return
    names = [f.name for f in fields(rows[0])]
    if Format(fmt) is Format.CSV:
        writer = csv.DictWriter(stream, fieldnames=names, lineterminator="\n")
        if header:
            writer.writeheader()
        for row in rows:
            writer.writerow(asdict(row))
    else:
        for row in rows:
            stream.write(json.dumps(asdict(row)) + "\n")
