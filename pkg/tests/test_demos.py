"""Tests for the packaged demonstrations."""

from fractions import Fraction

import pytest

from sweeplab import Method, demos


@pytest.mark.unit
class TestDemos:
    """Test the micro and ONOE demonstrations."""

    def test_micro(self):
        """Test the exact micro values for both schedules."""
        result = demos.demo_micro()
        assert result.simultaneous.per_party == (Fraction(5, 8), Fraction(1, 8))
        assert result.separate.per_party == (Fraction(9, 16), Fraction(1, 16))
        assert result.simultaneous.schedule == "simultaneous"

    def test_small_onoe_exact(self):
        """Test two supporters per side by enumeration."""
        result = demos.demo_onoe(per_side=2, method=Method.EXACT)
        assert result.simultaneous.per_party == (Fraction(13, 32), Fraction(13, 32))
        assert result.simultaneous.any_party == Fraction(13, 16)
        assert result.separate.per_party == (Fraction(1, 4), Fraction(1, 4))
        assert result.separate.any_party == Fraction(1, 2)

    def test_small_onoe_monte_carlo(self):
        """Test that a Monte Carlo run reports samples and seed."""
        result = demos.demo_onoe(per_side=3, samples=300, seed=5)
        for report in result.reports:
            assert report.samples == 300
            assert report.seed == 5
            assert len(report.half_widths) == 2

    @pytest.mark.parametrize("kwargs", [{"per_side": 0}, {"samples": 0}])
    def test_bad_arguments(self, kwargs):
        """Test that empty electorates and zero samples are rejected."""
        with pytest.raises(ValueError):
            demos.demo_onoe(**kwargs)
