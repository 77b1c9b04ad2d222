"""Command line interface for ignorance-toolkit."""

from __future__ import annotations

import json
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any, NoReturn

import click

from . import (
    Config,
    LogLevel,
    PartialConfigDict,
    get_logger,
)
from .config import MAX_SEED, ConfigKey, is_config_key
from .errors import (
    BudgetExceededError,
    FixtureError,
    FormulaSyntaxError,
    ModelFileError,
    ProofScriptError,
)
from .formula import Formula, Fragment, atoms, modal_depth, parse, render, size
from .model import NeighborhoodFrame, NeighborhoodModel, Property, supplementation
from .modelfile import dump, dumps, load, load_frame, load_model, to_document
from .proofs import (
    SYSTEMS,
    AxiomSystem,
    axiom_soundness_suite,
    check_derivation,
    load_fixture_proof,
    load_script,
)
from .replication import SuiteOptions, export_fixture, run_claim_suite
from .search import check_bullet_morphism, distinguishable
from .semantics import class_valid, frame_counterexample, model_valid, satisfies

logger = get_logger(__name__)

EXISTING_FILE = click.Path(exists=True, dir_okay=False, path_type=Path)
FRAGMENTS = list(Fragment.NAMED)


class BudgetError(click.ClickException):
    """A search guard was exceeded; reported with the usage-error exit status."""

    exit_code = 2


@contextmanager
def _library_errors() -> Iterator[None]:
    try:
        yield
    except BudgetExceededError as exc:
        raise BudgetError(str(exc)) from exc
    except (ModelFileError, FixtureError, ProofScriptError) as exc:
        raise click.UsageError(str(exc)) from exc


def _fail() -> NoReturn:
    click.get_current_context().exit(1)


@click.group()
@click.option(
    "--log-level",
    type=click.Choice([lvl.value for lvl in LogLevel], case_sensitive=False),
    help="Set logging verbosity (logs go to stderr)",
)
@click.option("--debug/--no-debug", default=None, help="Enable verbose debug logging")
@click.pass_context
def main(ctx: click.Context, log_level: str | None, debug: bool | None) -> None:
    """Model checking, bounded search and proof checking for ignorance logics."""
    cfg = Config(None)
    updates = _collect_config_updates(log_level=log_level, debug=debug)
    if updates:
        cfg.update(updates)
    ctx.obj = {"config": cfg}


def _collect_config_updates(**options: Any) -> PartialConfigDict:
    updates: PartialConfigDict = {}
    for key, value in options.items():
        if value is None:
            continue

        if key == "log_level":
            updates["log_level"] = LogLevel(value.upper())
        elif is_config_key(key):
            cfg_key: ConfigKey = key
            updates[cfg_key] = value
    return updates


def _apply(ctx: click.Context, **options: Any) -> Config:
    cfg: Config = ctx.obj["config"]
    updates = _collect_config_updates(**options)
    if updates:
        cfg.update(updates)
    return cfg


def _read_text(file: Path, hint: str) -> str:
    try:
        return file.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise click.BadParameter(
            f"{file} is not valid UTF-8 (byte {exc.start})", param_hint=hint
        ) from exc


def _read_formula(text: str | None, file: Path | None) -> Formula:
    if text is not None and file is None:
        source, hint = text, "'--formula'"
    elif file is not None and text is None:
        hint = "'--formula-file'"
        source = _read_text(file, hint)
    else:
        raise click.UsageError("Give exactly one of --formula and --formula-file")
    try:
        return parse(source)
    except FormulaSyntaxError as exc:
        raise click.BadParameter(str(exc), param_hint=hint) from exc


def _read_model(path: Path) -> NeighborhoodModel:
    try:
        return load_model(path)
    except ModelFileError as exc:
        raise click.BadParameter(str(exc), param_hint="'--model'") from exc


def _read_frame(path: Path, hint: str) -> NeighborhoodFrame:
    try:
        return load_frame(path)
    except ModelFileError as exc:
        raise click.BadParameter(str(exc), param_hint=hint) from exc


def _parse_class(text: str) -> frozenset[Property]:
    try:
        return Property.parse_class(text)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="'--class'") from exc


def _echo_json(data: Any) -> None:
    click.echo(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False))


formula_option = click.option("--formula", "formula_text", help="Formula text")
formula_file_option = click.option(
    "--formula-file", type=EXISTING_FILE, help="File containing the formula"
)
jobs_option = click.option(
    "--jobs", type=click.IntRange(1, 256), help="Worker processes for frame searches"
)
seed_option = click.option(
    "--seed", type=click.IntRange(0, MAX_SEED), help="Seed for sampled frame sizes"
)


@main.command()
@click.option("--model", "model_path", type=EXISTING_FILE, required=True, help="Model file")
@click.option("--state", required=True, help="State label")
@formula_option
@formula_file_option
def check(
    model_path: Path, state: str, formula_text: str | None, formula_file: Path | None
) -> None:
    """Print whether a formula is true at a state of a model."""
    model = _read_model(model_path)
    formula = _read_formula(formula_text, formula_file)
    try:
        value = satisfies(model, state, formula)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="'--state'") from exc
    click.echo("true" if value else "false")
    if not value:
        _fail()


@main.command()
@click.option("--model", "model_path", type=EXISTING_FILE, required=True, help="Model or frame")
@click.option(
    "--property",
    "properties",
    multiple=True,
    type=click.Choice([p.value for p in Property], case_sensitive=False),
    help="Only check these properties (repeatable)",
)
def props(model_path: Path, properties: tuple[str, ...]) -> None:
    """Print the neighborhood properties of a frame."""
    frame = _read_frame(model_path, "'--model'")
    selected = [Property(p.lower()) for p in properties] or list(Property)
    holds_all = True
    for prop in selected:
        holds = frame.has_property(prop)
        holds_all &= holds
        click.echo(f"{prop.label}: {'yes' if holds else 'no'}")
    if properties and not holds_all:
        _fail()


@main.command()
@formula_option
@formula_file_option
@click.option("--class", "class_text", default="all", show_default=True, help="e.g. c,t or filter")
@click.option("--max-states", type=click.IntRange(1, 4), default=2, show_default=True)
@click.option("--model", "model_path", type=EXISTING_FILE, help="Check validity on one model")
@click.option("--frame", "frame_path", type=EXISTING_FILE, help="Check validity on one frame")
@click.option("--sample-size", type=click.IntRange(min=1), help="Frames drawn per sampled size")
@click.option("--frame-budget", type=click.IntRange(min=1), help="Ceiling on candidate frames")
@seed_option
@jobs_option
@click.option("--json", "as_json", is_flag=True, help="Print a JSON verdict")
@click.pass_context
def valid(  # noqa: PLR0913
    ctx: click.Context,
    formula_text: str | None,
    formula_file: Path | None,
    class_text: str,
    max_states: int,
    model_path: Path | None,
    frame_path: Path | None,
    sample_size: int | None,
    frame_budget: int | None,
    seed: int | None,
    jobs: int | None,
    as_json: bool,
) -> None:
    """Check validity on a model, on a frame, or over a frame class up to a size bound."""
    _apply(ctx, sample_size=sample_size, frame_budget=frame_budget, seed=seed, jobs=jobs)
    formula = _read_formula(formula_text, formula_file)

    if model_path is not None and frame_path is not None:
        raise click.UsageError("Give at most one of --model and --frame")
    if model_path is not None:
        holds = model_valid(_read_model(model_path), formula)
        click.echo("valid" if holds else "not valid")
        if not holds:
            _fail()
        return
    if frame_path is not None:
        frame = _read_frame(frame_path, "'--frame'")
        with _library_errors():
            found = frame_counterexample(frame, formula)
        if found is None:
            click.echo("valid")
            return
        model, state = found
        if as_json:
            _echo_json({"status": "countermodel", "model": to_document(model), "state": state})
        else:
            click.echo(f"countermodel at state {state}: {model.describe()}")
        _fail()

    props_ = _parse_class(class_text)
    with _library_errors():
        verdict = class_valid(formula, props_, max_states)
    if as_json:
        _echo_json(verdict.to_dict())
    else:
        click.echo(verdict.summary())
    if not verdict.is_valid:
        _fail()


@main.command()
@click.option(
    "--model",
    "model_paths",
    type=EXISTING_FILE,
    multiple=True,
    required=True,
    help="Model file (give twice)",
)
@click.option("--state", "states", multiple=True, required=True, help="State label (give twice)")
@click.option(
    "--fragment",
    type=click.Choice(FRAGMENTS, case_sensitive=False),
    default="nabla-bullet",
    show_default=True,
)
@click.option("--vocab", multiple=True, help="Atoms to build formulas from (repeatable)")
@click.option(
    "--expect",
    type=click.Choice(["distinguishable", "indistinguishable"]),
    default="distinguishable",
    show_default=True,
    help="Outcome that yields exit status 0",
)
@click.option("--json", "as_json", is_flag=True)
def distinguish(  # noqa: PLR0913
    model_paths: tuple[Path, ...],
    states: tuple[str, ...],
    fragment: str,
    vocab: tuple[str, ...],
    expect: str,
    as_json: bool,
) -> None:
    """Search for a formula of a fragment separating two pointed models."""
    if len(model_paths) != 2 or len(states) != 2:  # noqa: PLR2004
        raise click.UsageError("Give --model and --state exactly twice")
    m, m2 = (_read_model(p) for p in model_paths)
    frag = Fragment.from_name(fragment)
    names = [a.strip() for v in vocab for a in v.split(",") if a.strip()] or None
    try:
        witness = distinguishable(m, states[0], m2, states[1], frag, names)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="'--state'") from exc

    if as_json:
        _echo_json(
            {
                "fragment": frag.name,
                "distinguishable": witness is not None,
                "witness": None if witness is None else render(witness.formula),
            }
        )
    elif witness is None:
        click.echo(f"indistinguishable in {frag}")
    else:
        click.echo(f"distinguishable in {frag} by {witness}")
    if (witness is not None) != (expect == "distinguishable"):
        _fail()


def _parse_mapping(items: tuple[str, ...]) -> dict[str, str]:
    mapping: dict[str, str] = {}
    for item in items:
        source, sep, target = item.partition("=")
        if not sep or not source.strip() or not target.strip():
            raise click.BadParameter(f"expected SOURCE=TARGET, got {item!r}", param_hint="'--map'")
        mapping[source.strip()] = target.strip()
    return mapping


@main.command()
@click.option(
    "--model",
    "model_paths",
    type=EXISTING_FILE,
    multiple=True,
    required=True,
    help="Source then target model",
)
@click.option("--map", "pairs", multiple=True, required=True, help="State mapping, e.g. s=s'")
def morphism(model_paths: tuple[Path, ...], pairs: tuple[str, ...]) -> None:
    """Check whether a state map is a bullet-morphism between two models."""
    if len(model_paths) != 2:  # noqa: PLR2004
        raise click.UsageError("Give --model exactly twice")
    m, m2 = (_read_model(p) for p in model_paths)
    try:
        holds = check_bullet_morphism(m, m2, _parse_mapping(pairs))
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="'--map'") from exc
    click.echo("morphism" if holds else "not a morphism")
    if not holds:
        _fail()


@main.command()
@click.option(
    "--system",
    "system_name",
    type=click.Choice(list(SYSTEMS), case_sensitive=False),
    help="Axiom system (defaults to the script's '# system:' line)",
)
@click.option("--script", "script_path", type=EXISTING_FILE, help="Proof script file")
@click.option("--fixture", help="Name of a shipped proof script")
def prove(system_name: str | None, script_path: Path | None, fixture: str | None) -> None:
    """Check a derivation against an axiom system."""
    with _library_errors():
        if script_path is not None and fixture is None:
            derivation = load_script(script_path)
        elif fixture is not None and script_path is None:
            derivation = load_fixture_proof(fixture)
        else:
            raise click.UsageError("Give exactly one of --script and --fixture")
    name = system_name or derivation.system
    if name is None:
        raise click.UsageError("No --system given and the script names none")
    try:
        system = AxiomSystem.from_name(name)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    with _library_errors():
        result = check_derivation(system, derivation)
    click.echo(f"{system.name}: {result}")
    if not result.accepted:
        _fail()


@main.command()
@click.option("--model", "model_path", type=EXISTING_FILE, required=True, help="Model or frame")
@click.option("--output", type=click.Path(dir_okay=False, path_type=Path), help="Write here")
def supplement(model_path: Path, output: Path | None) -> None:
    """Print the supplementation (superset closure) of a model or frame."""
    try:
        loaded = load(model_path)
    except ModelFileError as exc:
        raise click.BadParameter(str(exc), param_hint="'--model'") from exc
    if isinstance(loaded, NeighborhoodModel):
        result: NeighborhoodModel | NeighborhoodFrame = NeighborhoodModel(
            supplementation(loaded.frame), loaded.valuation
        )
    else:
        result = supplementation(loaded)
    if output is not None:
        dump(result, output)
        logger.info("Wrote %s", output)
    else:
        click.echo(dumps(result), nl=False)


@main.command()
@click.option("--json", "as_json", is_flag=True, help="Print the JSON report")
@jobs_option
@seed_option
@click.option("--timings", is_flag=True, help="Include elapsed milliseconds in JSON")
@click.option(
    "--exhaustive", is_flag=True, help="Check definability on every 3-state frame"
)
@click.option(
    "--definability-samples",
    type=click.IntRange(1, None),
    help="Sampled 3-state frames for the definability claim",
)
@click.option("--only", multiple=True, help="Restrict to a group or claim id (repeatable)")
@click.pass_context
def replicate(  # noqa: PLR0913
    ctx: click.Context,
    as_json: bool,
    jobs: int | None,
    seed: int | None,
    timings: bool,
    exhaustive: bool,
    definability_samples: int | None,
    only: tuple[str, ...],
) -> None:
    """Run every fixture claim and print the report."""
    cfg = _apply(ctx, jobs=jobs, seed=seed, definability_samples=definability_samples)
    options = SuiteOptions(jobs=cfg.jobs, seed=cfg.seed, exhaustive=exhaustive, progress=True)
    with _library_errors():
        report = run_claim_suite(options, only=only)
    if not report.outcomes:
        raise click.BadParameter(f"no claims match {', '.join(only)}", param_hint="'--only'")
    if as_json:
        click.echo(report.to_json(timings=timings), nl=False)
    else:
        click.echo(report.to_text(), nl=False)
    if not report.ok:
        _fail()


@main.command(name="export-fixture")
@click.argument("fixture_id")
@click.option("--output", type=click.Path(dir_okay=False, path_type=Path), help="Write here")
def export_fixture_command(fixture_id: str, output: Path | None) -> None:
    """Print a shipped fixture in the model file format."""
    try:
        text = export_fixture(fixture_id, output)
    except FixtureError as exc:
        raise click.BadParameter(str(exc), param_hint="'FIXTURE_ID'") from exc
    if output is None:
        click.echo(text, nl=False)


@main.command()
@click.option(
    "--system",
    "system_name",
    type=click.Choice(list(SYSTEMS), case_sensitive=False),
    required=True,
)
@click.option("--class", "class_text", help="Override the system's frame class")
@click.option("--max-states", type=click.IntRange(1, 4), default=2, show_default=True)
@jobs_option
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def soundness(  # noqa: PLR0913
    ctx: click.Context,
    system_name: str,
    class_text: str | None,
    max_states: int,
    jobs: int | None,
    as_json: bool,
) -> None:
    """Check every axiom of a system over its frame class up to a size bound."""
    _apply(ctx, jobs=jobs)
    system = AxiomSystem.from_name(system_name)
    override = None if class_text is None else _parse_class(class_text)
    with _library_errors():
        report = axiom_soundness_suite(system, props=override, max_states=max_states)
    if as_json:
        _echo_json(report.to_dict())
    else:
        for entry in report.entries:
            click.echo(f"{entry.schema.name}: {entry.verdict.summary()}")
    if not report.all_valid:
        _fail()


@main.command(name="parse")
@click.argument("formula_text", required=False)
@formula_file_option
@click.option("--keep-sugar", is_flag=True, help="Keep delta, circ and diamond")
def parse_command(formula_text: str | None, formula_file: Path | None, keep_sugar: bool) -> None:
    """Print the normalized form of a formula with its atoms and modal depth."""
    if formula_text is not None and formula_file is None:
        source = formula_text
    elif formula_file is not None and formula_text is None:
        source = _read_text(formula_file, "'--formula-file'")
    else:
        raise click.UsageError("Give a FORMULA argument or --formula-file")
    try:
        formula = parse(source, keep_sugar=keep_sugar)
    except FormulaSyntaxError as exc:
        raise click.BadParameter(str(exc), param_hint="'FORMULA'") from exc
    click.echo(render(formula))
    click.echo(f"atoms: {', '.join(sorted(atoms(formula))) or '-'}")
    click.echo(f"modal depth: {modal_depth(formula)}")
    click.echo(f"size: {size(formula)}")
