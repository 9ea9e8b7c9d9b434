#!/usr/bin/env python3
"""
Example usage of sweep-lab.

Walks through the basic operations: building a scenario, exact and Monte
Carlo sweep probabilities, comparing schedules and checking the
correlation inequality on random inputs.
"""

from fractions import Fraction

from sweeplab import (
    Schedules,
    WinRuleSpec,
    check_alignment,
    compare_schedules,
    exact_sweep_probability,
    make_scenario,
    mc_sweep_probability,
    run_theorem_d_trials,
)


def main():
    print("sweep-lab Example")
    print("=" * 50)

    # Two parties, four voters, a national PR chamber and two local seats
    print("\n1. Building scenario...")
    scenario = make_scenario(
        ["Left", "Right"],
        [(0, "3/5"), (1, "1/2"), (0, "2/5"), (1, "7/10")],
        [WinRuleSpec.strict_majority(5), WinRuleSpec.fptp(), WinRuleSpec.fptp()],
        eligibility=[None, [0, 1], [2, 3]],
        name="regional",
    )
    print(f"   ✓ {scenario.num_voters} voters, {scenario.num_elections} elections")

    # Exact enumeration over every turnout
    print("\n2. Exact sweep probabilities...")
    together = Schedules.simultaneous(scenario)
    apart = Schedules.separate(scenario)
    for party, name in enumerate(scenario.parties):
        p_together = exact_sweep_probability(scenario, together, party)
        p_apart = exact_sweep_probability(scenario, apart, party)
        print(f"   ✓ {name}: one date {p_together}, separate dates {p_apart}")

    # Monte Carlo estimate with a confidence interval
    print("\n3. Monte Carlo estimate...")
    report = mc_sweep_probability(scenario, together, samples=20_000, seed=7)
    for party, name in enumerate(report.contenders):
        width = report.half_width(party)
        print(f"   ✓ {name}: {report.per_party[party]:.4f} ± {width:.4f}")

    # The coarser schedule never lowers a sweep when the rules are aligned
    print("\n4. Comparing schedules...")
    for party, name in enumerate(scenario.parties):
        print(f"   ✓ {name} aligned: {bool(check_alignment(scenario, party))}")
    comparison = compare_schedules(scenario, together, apart, names=("together", "apart"))
    print(f"   ✓ Relation: {comparison.relation.value}")
    print(f"   ✓ Gains: {[str(Fraction(d)) for d in comparison.deltas]}")
    print(f"   ✓ Defects: {len(comparison.defects)}")

    # Random aligned tuples against every comparable pair of partitions
    print("\n5. Inequality trials...")
    summary = run_theorem_d_trials(50, seed=0)
    print(f"   ✓ {summary.checks} checks, {len(summary.failures)} failures")
    print(f"   ✓ Smallest margin: {summary.min_margin}")

    print("\n" + "=" * 50)
    print("Example completed successfully!")


if __name__ == "__main__":
    main()
