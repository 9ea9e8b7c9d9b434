"""Tests for report rows and the CSV / records writers."""

import io
import json
from fractions import Fraction

import pytest

from sweeplab import compare_schedules
from sweeplab.inequality import TrialSummary
from sweeplab.report import (
    Format,
    comparison_rows,
    decimal_string,
    fraction_string,
    partition_label,
    report_rows,
    trial_row,
    validation_row,
    write_rows,
)
from sweeplab.rules import ValidationResult
from sweeplab.sweep import exact_sweep_report, mc_sweep_probability


@pytest.mark.unit
class TestFormatting:
    """Test number formatting."""

    @pytest.mark.parametrize(
        "value,expected",
        [
            (Fraction(5, 8), "0.625"),
            (Fraction(1, 3), "0.333333333333"),
            (Fraction(0), "0"),
            (Fraction(1), "1"),
            (Fraction(100), "100"),
            (0.5, "0.5"),
            (1e-05, "0.00001"),
            (2.5e-07, "0.00000025"),
            (0.1 + 0.2, "0.3"),
            (0.0, "0"),
            (1.0, "1"),
            (None, ""),
        ],
    )
    def test_decimal_string(self, value, expected):
        """Test rounding to 12 significant digits without exponent notation."""
        assert decimal_string(value) == expected

    def test_fraction_string(self):
        """Test that only exact values get a fraction."""
        assert fraction_string(Fraction(9, 16)) == "9/16"
        assert fraction_string(Fraction(2)) == "2/1"
        assert fraction_string(0.5) == ""

    def test_partition_label(self):
        """Test the block notation for partitions."""
        assert partition_label(((0, 1), (2,)), ["a", "b", "c"]) == "{a,b}|{c}"


@pytest.mark.unit
class TestRows:
    """Test row builders."""

    def test_exact_report_rows(self, micro_scenario):
        """Test per-party rows plus the any-party row."""
        report = exact_sweep_report(
            micro_scenario, micro_scenario.simultaneous(), schedule_name="s"
        )
        rows = report_rows(report)
        assert [r.party for r in rows] == ["A", "B", "any"]
        assert [r.exact for r in rows] == ["5/8", "1/8", "3/4"]
        assert rows[0].method == "exact"
        assert rows[0].samples == ""
        assert rows[0].ci_half_width == ""

    def test_focus_drops_other_rows(self, micro_scenario):
        """Test that a focused report has a single row."""
        report = exact_sweep_report(micro_scenario, micro_scenario.separate(), party=1)
        (row,) = report_rows(report)
        assert row.party == "B"
        assert row.exact == "1/16"

    def test_monte_carlo_rows(self, micro_scenario):
        """Test that Monte Carlo rows carry samples, seed and a half-width."""
        report = mc_sweep_probability(micro_scenario, micro_scenario.separate(), 500, 8)
        row = report_rows(report)[0]
        assert row.exact == ""
        assert row.samples == "500"
        assert row.seed == "8"
        assert float(row.ci_half_width) > 0

    def test_comparison_rows(self, micro_scenario):
        """Test comparison rows for both parties."""
        comparison = compare_schedules(
            micro_scenario,
            micro_scenario.simultaneous(),
            micro_scenario.separate(),
            names=("together", "apart"),
        )
        rows = comparison_rows(comparison)
        assert [r.exact_delta for r in rows] == ["1/16", "1/16"]
        assert rows[0].relation == "coarser"
        assert rows[0].schedule_b == "apart"
        assert {r.defect for r in rows} == {"no"}

    def test_validation_row_takes_detail(self):
        """Test that a failed validator supplies the detail text."""
        row = validation_row("s", "e", "monotonicity", "-", ValidationResult(False, detail="bad"))
        assert row.passed == "no"
        assert row.detail == "bad"

    def test_trial_row(self):
        """Test the trial summary row."""
        row = trial_row(TrialSummary("harris", 3, 1, 9, (), Fraction(1, 4)))
        assert (row.kind, row.checks, row.failures, row.min_margin) == ("harris", "9", "0", "1/4")


@pytest.mark.unit
class TestWriters:
    """Test the CSV and records writers."""

    def test_csv(self, micro_scenario):
        """Test the header row and one line per row."""
        stream = io.StringIO()
        report = exact_sweep_report(micro_scenario, micro_scenario.separate())
        write_rows(report_rows(report), "csv", stream)
        lines = stream.getvalue().splitlines()
        assert lines[0] == (
            "scenario,schedule,party,probability,exact,method,samples,ci_half_width,seed"
        )
        assert lines[1] == "micro,schedule,A,0.5625,9/16,exact,,,"
        assert len(lines) == 4

    def test_records(self, micro_scenario):
        """Test one JSON object per line with the CSV keys in order."""
        stream = io.StringIO()
        rows = report_rows(exact_sweep_report(micro_scenario, micro_scenario.separate()))
        write_rows(rows, Format.RECORDS, stream)
        records = [json.loads(line) for line in stream.getvalue().splitlines()]
        assert len(records) == 3
        assert list(records[0]) == [
            "scenario",
            "schedule",
            "party",
            "probability",
            "exact",
            "method",
            "samples",
            "ci_half_width",
            "seed",
        ]
        assert records[1]["exact"] == "1/16"

    def test_no_rows_writes_nothing(self):
        """Test that an empty row list writes nothing, not even a header."""
        stream = io.StringIO()
        write_rows([], "csv", stream)
        assert stream.getvalue() == ""
