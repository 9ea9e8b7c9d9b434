"""Command-line entry point.

Exit codes: 0 success, 1 usage or parse error, 2 validation failure,
3 monotonicity or inequality violation detected. Reports go to stdout,
logs to stderr.
"""

from __future__ import annotations

import functools
import io
import logging
import sys
from typing import Callable, Sequence

import click

from .alliances import contender_map
from .config import DEFAULT_CONFIG, LabConfig
from .demos import demo_micro, demo_onoe
from .electorate import check_alignment
from .errors import (
    AlignmentError,
    AllianceError,
    MonotonicityViolation,
    ScenarioError,
    SweepLabError,
)
from .inequality import run_harris_trials, run_identity_trials, run_theorem_d_trials
from .model import validate_scenario
from .report import (
    Format,
    comparison_rows,
    lattice_rows,
    report_rows,
    trial_row,
    validation_row,
    write_rows,
)
from .rules import make_rule, validate_exclusivity, validate_monotonicity
from .scenario_file import ScenarioDocument, resolve
from .sweep import Method, compare_schedules, lattice_scan, sweep_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_VIOLATION = 3


class LabError(click.ClickException):
    def __init__(self, message: str, exit_code: int = EXIT_USAGE):
        super().__init__(message)
        self.exit_code = exit_code


def _exit_code(error: SweepLabError) -> int:
    if isinstance(error, MonotonicityViolation):
        return EXIT_VIOLATION
    if isinstance(error, (ScenarioError, AllianceError, AlignmentError)):
        return EXIT_INVALID
    return EXIT_USAGE


def handle_errors(f: Callable) -> Callable:
    """Turn library errors into click errors carrying the lab's exit codes."""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except SweepLabError as e:
            raise LabError(str(e), _exit_code(e)) from e
        except ValueError as e:
            raise LabError(str(e)) from e

    return wrapper


class LabGroup(click.Group):
    """A click group whose usage errors exit with 1 instead of click's 2."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.UsageError as e:
            e.show()
            sys.exit(EXIT_USAGE)
        except click.ClickException as e:
            e.show()
            sys.exit(e.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_USAGE)
        sys.exit(rv if isinstance(rv, int) else EXIT_OK)


def _emit(rows: Sequence, fmt: str) -> None:
    buffer = io.StringIO()
    write_rows(rows, fmt, buffer)
    click.echo(buffer.getvalue(), nl=False)


def _config(cap: int | None = None, workers: int | None = None) -> LabConfig:
    try:
        return DEFAULT_CONFIG.with_overrides(enumeration_cap=cap, workers=workers)
    except ValueError as e:
        raise LabError(str(e))


def _focus(doc: ScenarioDocument, party: str | None) -> int | None:
    if party is None:
        return doc.analysis.focus
    if party == "all":
        return None
    names = contender_map(doc.scenario).names
    if party not in names:
        raise LabError(f"unknown party {party!r} (known: {', '.join(names)})")
    return names.index(party)


def _schedule_names(doc: ScenarioDocument, requested: Sequence[str]) -> list[str]:
    names = list(requested) or list(doc.schedules)
    if not names:
        raise LabError(f"scenario {doc.scenario.name!r} defines no schedules")
    return names


format_option = click.option(
    "--format",
    "fmt",
    type=click.Choice([f.value for f in Format]),
    default=Format.CSV.value,
    show_default=True,
    help="Report format: CSV rows or one JSON record per line.",
)
seed_option = click.option("--seed", type=click.IntRange(min=0), default=None, help="Master seed.")
samples_option = click.option(
    "--samples", type=click.IntRange(min=1), default=None, help="Monte Carlo sample count."
)
cap_option = click.option(
    "--cap", type=click.IntRange(min=1), default=None, help="Exact enumeration cap override."
)
workers_option = click.option(
    "--workers",
    type=click.IntRange(min=1),
    default=1,
    show_default=True,
    help="Monte Carlo worker processes.",
)
party_option = click.option("--party", default=None, help="Report one party (or 'all').")
method_option = click.option(
    "--method",
    type=click.Choice([m.value for m in Method]),
    default=None,
    help="exact enumeration or Monte Carlo (mc).",
)


@click.group(cls=LabGroup)
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for debug logs.")
def main(verbose: int):
    """Sweep probabilities under simultaneous and staggered polling schedules."""
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True
    )


def _sweep_command(doc, schedules, method, samples, seed, config, party, fmt) -> None:
    focus = _focus(doc, party)
    rows = []
    for name in _schedule_names(doc, schedules):
        report = sweep_report(
            doc.scenario,
            doc.schedule(name),
            method,
            samples if samples is not None else doc.analysis.samples,
            seed if seed is not None else doc.analysis.seed,
            config,
            name,
            focus,
        )
        rows.extend(report_rows(report))
    _emit(rows, fmt)


@main.command()
@click.argument("scenario")
@click.option("--schedule", "schedules", multiple=True, help="Schedule name (repeatable).")
@samples_option
@seed_option
@workers_option
@party_option
@format_option
@handle_errors
def simulate(scenario, schedules, samples, seed, workers, party, fmt):
    """Monte Carlo sweep report for a scenario file or packaged scenario."""
    doc = resolve(scenario)
    _sweep_command(
        doc, schedules, Method.MONTE_CARLO, samples, seed, _config(workers=workers), party, fmt
    )


@main.command("enumerate")
@click.argument("scenario")
@click.option("--schedule", "schedules", multiple=True, help="Schedule name (repeatable).")
@cap_option
@party_option
@format_option
@handle_errors
def enumerate_command(scenario, schedules, cap, party, fmt):
    """Exact sweep report by enumerating every turnout."""
    doc = resolve(scenario)
    _sweep_command(doc, schedules, Method.EXACT, None, None, _config(cap=cap), party, fmt)


@main.command()
@click.argument("scenario")
@click.option("--a", "schedule_a", default=None, help="First schedule (default from the file).")
@click.option("--b", "schedule_b", default=None, help="Second schedule (default from the file).")
@method_option
@samples_option
@seed_option
@cap_option
@workers_option
@party_option
@format_option
@handle_errors
@click.pass_context
def compare(ctx, scenario, schedule_a, schedule_b, method, samples, seed, cap, workers, party, fmt):
    """Compare two named schedules and check that the coarser one sweeps at least as often."""
    doc = resolve(scenario)
    default_a, default_b = doc.analysis.compare or (None, None)
    a, b = schedule_a or default_a, schedule_b or default_b
    if a is None or b is None:
        raise LabError("name two schedules with --a/--b or analysis.compare")
    comparison = compare_schedules(
        doc.scenario,
        doc.schedule(a),
        doc.schedule(b),
        Method(method or doc.analysis.method),
        samples if samples is not None else doc.analysis.samples,
        seed if seed is not None else doc.analysis.seed,
        _config(cap=cap, workers=workers),
        (a, b),
    )
    focus = _focus(doc, party)
    _emit(comparison_rows(comparison, None if focus is None else [focus]), fmt)
    if comparison.defects:
        ctx.exit(EXIT_VIOLATION)


@main.command("lattice-scan")
@click.argument("scenario")
@cap_option
@format_option
@handle_errors
@click.pass_context
def lattice_scan_command(ctx, scenario, cap, fmt):
    """Exact audit of every uniform schedule pair along the coarsening order."""
    doc = resolve(scenario)
    scan = lattice_scan(doc.scenario, _config(cap=cap))
    names = contender_map(doc.scenario).names
    _emit(lattice_rows(scan, doc.scenario.name, names, doc.election_names), fmt)
    if scan.violations:
        ctx.exit(EXIT_VIOLATION)


@main.command()
@click.argument("scenario")
@click.option(
    "--bound",
    type=click.IntRange(min=1),
    default=None,
    help="Largest per-party vote count scanned by the rule validators.",
)
@format_option
@handle_errors
@click.pass_context
def validate(ctx, scenario, bound, fmt):
    """Check scenario invariants, win-rule conditions and alignment per contender."""
    doc = resolve(scenario, validate=False)
    config = DEFAULT_CONFIG.with_overrides(tally_bound=bound)
    name = doc.scenario.name
    rows = [
        validation_row(name, "-", "scenario", violation.entity, False, str(violation))
        for violation in validate_scenario(doc.scenario)
    ]
    if rows:
        _emit(rows, fmt)
        ctx.exit(EXIT_INVALID)
    contenders = contender_map(doc.scenario)
    for election, label in zip(doc.scenario.elections, doc.election_names):
        rule = make_rule(election.rule)
        exclusive = validate_exclusivity(rule, contenders.num_lists, config.tally_bound)
        monotone = validate_monotonicity(rule, contenders.num_lists, config.tally_bound)
        rows.append(validation_row(name, label, "exclusivity", "-", exclusive))
        rows.append(validation_row(name, label, "monotonicity", "-", monotone))
    if doc.scenario.num_voters <= config.alignment_voter_cap:
        for s, contender in enumerate(contenders.names):
            result = check_alignment(doc.scenario, s, config.alignment_voter_cap)
            detail = "" if result else f"witness (voter, election, subset) = {result.witness}"
            rows.append(validation_row(name, "-", "alignment", contender, result, detail))
    else:
        logger.warning(
            "alignment check skipped: %d voters exceed the cap of %d",
            doc.scenario.num_voters,
            config.alignment_voter_cap,
        )
    _emit(rows, fmt)
    if any(row.passed == "no" for row in rows):
        ctx.exit(EXIT_INVALID)


@main.command()
@click.option(
    "--kind",
    type=click.Choice(["theorem-d", "harris", "identity", "all"]),
    default="all",
    show_default=True,
)
@click.option("--trials", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@format_option
@handle_errors
@click.pass_context
def ineq(ctx, kind, trials, seed, fmt):
    """Randomized exact checks of the correlation inequalities."""
    runners = {
        "theorem-d": lambda: run_theorem_d_trials(trials, seed),
        "harris": lambda: run_harris_trials(trials, seed),
        "identity": lambda: run_identity_trials(trials, seed),
    }
    chosen = list(runners) if kind == "all" else [kind]
    summaries = [runners[k]() for k in chosen]
    _emit([trial_row(summary) for summary in summaries], fmt)
    if not all(summary.passed for summary in summaries):
        ctx.exit(EXIT_VIOLATION)


@main.group()
def demo():
    """Packaged demonstrations."""


@demo.command()
@click.option("--per-side", type=click.IntRange(min=1), default=5000, show_default=True)
@click.option("--samples", type=click.IntRange(min=1), default=100_000, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option(
    "--method",
    type=click.Choice([m.value for m in Method]),
    default=Method.MONTE_CARLO.value,
    show_default=True,
)
@cap_option
@workers_option
@format_option
@handle_errors
def onoe(per_side, samples, seed, method, cap, workers, fmt):
    """Two evenly matched parties, two elections: one poll date against two."""
    result = demo_onoe(per_side, samples, seed, _config(cap=cap, workers=workers), Method(method))
    _emit([row for report in result.reports for row in report_rows(report)], fmt)


@demo.command()
@format_option
@handle_errors
def micro(fmt):
    """One voter, two FPTP elections, exact values for both schedules."""
    result = demo_micro()
    _emit([row for report in result.reports for row in report_rows(report)], fmt)


if __name__ == "__main__":
    main()
