"""Hilbert systems for ignorance logics and a checker for transcribed derivations.

Proof scripts hold one line per step::

    # system: E
    1. nabla ?phi -> bullet ?phi | bullet ~?phi ; AX E3
    2. bullet ~?phi -> ~?phi ; AX E2
    3. nabla ?phi -> bullet ?phi | ~?phi ; CONSEQ 1,2

Justifications are ``AX <name>``, ``TAUT``, ``MP k1 k2`` (line ``k2`` must be
``k1 -> k``), ``RE-NABLA k1``, ``RE-BULLET k1``, ``DEF k1`` and
``CONSEQ k1,...`` (tautological consequence of the cited lines).
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from importlib.resources import files
from os import PathLike
from pathlib import Path
from typing import Any, Final

from .config import setting
from .errors import BudgetExceededError, FixtureError, FormulaSyntaxError, ProofScriptError
from .formula import (
    And,
    Atom,
    Binary,
    Bot,
    Box,
    Bullet,
    Formula,
    Iff,
    Imp,
    MetaVar,
    Nabla,
    Not,
    Or,
    Top,
    Unary,
    conjunction,
    expand_defined,
    parse,
    render,
    substitute,
)
from .logger import get_logger
from .model import Property
from .semantics import Verdict, class_valid

logger = get_logger(__name__)

__all__ = [
    "SYSTEMS",
    "AxiomSchema",
    "AxiomSystem",
    "CheckResult",
    "Derivation",
    "ProofLine",
    "SoundnessReport",
    "axiom_soundness_suite",
    "check_derivation",
    "fixture_proofs",
    "is_tautology_instance",
    "load_fixture_proof",
    "load_script",
    "match_schema",
    "parse_script",
]

DEFAULT_INSTANCE: Final[dict[str, Formula]] = {
    "phi": Atom("p"),
    "psi": Atom("q"),
    "chi": Atom("r"),
}


# --------------------------------------------------------------------------
# Axioms and systems
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class AxiomSchema:
    name: str
    pattern: Formula

    @classmethod
    def define(cls, name: str, text: str) -> AxiomSchema:
        return cls(name, parse(text, keep_sugar=True))

    def instantiate(self, mapping: Mapping[str, Formula] | None = None) -> Formula:
        """Substitute for the metavariables, by default ``?phi, ?psi, ?chi := p, q, r``."""
        return substitute(self.pattern, DEFAULT_INSTANCE if mapping is None else mapping)

    def __str__(self) -> str:
        return f"{self.name}: {render(self.pattern)}"


E1 = AxiomSchema.define("E1", "nabla ?phi <-> nabla ~?phi")
E2 = AxiomSchema.define("E2", "bullet ?phi -> ?phi")
E3 = AxiomSchema.define("E3", "nabla ?phi -> bullet ?phi | bullet ~?phi")
E4 = AxiomSchema.define("E4", "bullet ?phi -> nabla ?phi")
N = AxiomSchema.define("N", "circ true")
M1 = AxiomSchema.define("M1", "nabla (?phi | ?psi) & nabla (~?phi | ?chi) -> nabla ?phi")
M2 = AxiomSchema.define("M2", "bullet (?phi | ?psi) & bullet (~?phi | ?chi) -> nabla ?phi")
M3 = AxiomSchema.define("M3", "bullet (?phi | ?psi) & nabla (~?phi | ?chi) -> nabla ?phi")
M4 = AxiomSchema.define("M4", "circ ?phi & ?phi -> delta (?phi | ?psi) & circ (?phi | ?psi)")
R1 = AxiomSchema.define("R1", "delta ?phi & delta ?psi -> delta (?phi & ?psi)")
R2 = AxiomSchema.define("R2", "circ ?phi & circ ?psi -> circ (?phi & ?psi)")


class Rule(StrEnum):
    AX = "AX"
    TAUT = "TAUT"
    MP = "MP"
    RE_NABLA = "RE-NABLA"
    RE_BULLET = "RE-BULLET"
    DEF = "DEF"
    CONSEQ = "CONSEQ"


@dataclass(frozen=True, slots=True)
class AxiomSystem:
    """A named set of schemas, the inference rules and the frame class it is sound for."""

    name: str
    schemas: tuple[AxiomSchema, ...]
    frame_class: frozenset[Property] = frozenset()
    rules: frozenset[Rule] = frozenset(Rule)

    def schema(self, name: str) -> AxiomSchema | None:
        for schema in self.schemas:
            if schema.name == name:
                return schema
        return None

    @property
    def schema_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.schemas)

    def extends(self, other: AxiomSystem) -> bool:
        """True iff every schema of ``other`` is a schema of this system."""
        return set(other.schemas) <= set(self.schemas)

    @classmethod
    def from_name(cls, name: str) -> AxiomSystem:
        """Look up a system by name, ignoring case.

        Raises:
            ValueError: for unknown names
        """
        for key, system in SYSTEMS.items():
            if key.lower() == name.strip().lower():
                return system
        raise ValueError(f"Unknown system {name!r}; expected one of: {', '.join(SYSTEMS)}")


_E = (E1, E2, E3)
_M = (*_E, M1, M2, M3, M4)
_R = (*_M, R1, R2)

SYSTEMS: Final[dict[str, AxiomSystem]] = {
    "E": AxiomSystem("E", _E),
    "Ec": AxiomSystem("Ec", (*_E, E4), frozenset({Property.C})),
    "EN": AxiomSystem("EN", (*_E, N), frozenset({Property.N})),
    "M": AxiomSystem("M", _M, frozenset({Property.S_SUP})),
    "R": AxiomSystem("R", _R, frozenset({Property.QUASI_FILTER})),
    "K": AxiomSystem("K", (*_R, N), frozenset({Property.FILTER})),
}


# --------------------------------------------------------------------------
# Matching and tautologies
# --------------------------------------------------------------------------


def _match(pattern: Formula, f: Formula, binding: dict[str, Formula]) -> bool:
    if isinstance(pattern, MetaVar):
        bound = binding.get(pattern.name)
        if bound is None:
            binding[pattern.name] = f
            return True
        return bound == f
    if type(pattern) is not type(f):
        return False
    if isinstance(pattern, Unary):
        assert isinstance(f, Unary)
        return _match(pattern.operand, f.operand, binding)
    if isinstance(pattern, Binary):
        assert isinstance(f, Binary)
        return _match(pattern.left, f.left, binding) and _match(pattern.right, f.right, binding)
    return pattern == f


def match_schema(schema: AxiomSchema, f: Formula) -> dict[str, Formula] | None:
    """Substitution turning the schema into ``f``, compared after unfolding abbreviations."""
    binding: dict[str, Formula] = {}
    if _match(expand_defined(schema.pattern), expand_defined(f), binding):
        return binding
    return None


def _column(index: int, rows: int) -> int:
    """Truth-table column of variable ``index``: bit ``r`` is bit ``index`` of ``r``."""
    half = 1 << index
    column = ((1 << half) - 1) << half
    length = half << 1
    while length < rows:
        column |= column << length
        length <<= 1
    return column & ((1 << rows) - 1)


def _skeleton_vars(f: Formula, found: dict[Formula, int]) -> None:
    match f:
        case Atom() | MetaVar() | Nabla() | Bullet() | Box():
            found.setdefault(f, len(found))
        case Unary(x):
            _skeleton_vars(x, found)
        case Binary(left, right):
            _skeleton_vars(left, found)
            _skeleton_vars(right, found)
        case _:
            pass


def _skeleton_eval(f: Formula, columns: Mapping[Formula, int], full: int) -> int:
    match f:
        case Top():
            return full
        case Bot():
            return 0
        case Not(x):
            return full ^ _skeleton_eval(x, columns, full)
        case And(left, right):
            return _skeleton_eval(left, columns, full) & _skeleton_eval(right, columns, full)
        case Or(left, right):
            return _skeleton_eval(left, columns, full) | _skeleton_eval(right, columns, full)
        case Imp(left, right):
            return (full ^ _skeleton_eval(left, columns, full)) | _skeleton_eval(
                right, columns, full
            )
        case Iff(left, right):
            return full ^ (
                _skeleton_eval(left, columns, full) ^ _skeleton_eval(right, columns, full)
            )
        case _:
            return columns[f]


def is_tautology_instance(f: Formula, *, taut_atoms: int | None = None) -> bool:
    """Truth-table check of the propositional skeleton of ``f``.

    Maximal modal subformulas, atoms and metavariables become skeleton variables.

    Raises:
        BudgetExceededError: when the skeleton has more than ``taut_atoms`` variables
    """
    g = expand_defined(f)
    found: dict[Formula, int] = {}
    _skeleton_vars(g, found)
    limit: int = setting("taut_atoms", taut_atoms)
    if len(found) > limit:
        raise BudgetExceededError(
            f"Propositional skeleton has {len(found)} variables; the limit is {limit}"
        )
    rows = 1 << len(found)
    full = (1 << rows) - 1
    columns = {h: _column(i, rows) for h, i in found.items()}
    return _skeleton_eval(g, columns, full) == full


def definitionally_equal(f: Formula, g: Formula) -> bool:
    """Equal once delta, circ and diamond are unfolded; nothing else is rewritten."""
    return expand_defined(f) == expand_defined(g)


# --------------------------------------------------------------------------
# Derivations
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Justification:
    rule: Rule
    premises: tuple[int, ...] = ()
    axiom: str | None = None

    def __str__(self) -> str:
        match self.rule:
            case Rule.AX:
                return f"AX {self.axiom}"
            case Rule.CONSEQ:
                return f"CONSEQ {','.join(map(str, self.premises))}"
            case _:
                return " ".join([self.rule.value, *map(str, self.premises)])


@dataclass(frozen=True, slots=True)
class ProofLine:
    number: int
    formula: Formula
    justification: Justification
    source_line: int = 0


@dataclass(frozen=True, slots=True)
class Derivation:
    """Numbered proof lines; the last line is the theorem."""

    lines: tuple[ProofLine, ...]
    system: str | None = None
    name: str | None = None

    @property
    def theorem(self) -> Formula | None:
        return self.lines[-1].formula if self.lines else None


@dataclass(frozen=True, slots=True)
class CheckResult:
    accepted: bool
    failed_line: int | None = None
    reason: str | None = None
    checked: int = 0

    def __str__(self) -> str:
        if self.accepted:
            return f"accepted ({self.checked} lines)"
        if self.failed_line is None:
            return f"rejected: {self.reason}"
        return f"rejected at line {self.failed_line}: {self.reason}"


_LINE: Final = re.compile(r"^\s*(\d+)\s*\.\s*(.*?)\s*;\s*(.*?)\s*$")
_DIRECTIVE: Final = re.compile(r"^#\s*(system|name)\s*:\s*(\S+)\s*$", re.IGNORECASE)
_ARITY: Final[dict[Rule, int]] = {
    Rule.TAUT: 0,
    Rule.MP: 2,
    Rule.RE_NABLA: 1,
    Rule.RE_BULLET: 1,
    Rule.DEF: 1,
}


def _parse_justification(text: str, line_number: int) -> Justification:
    words = text.replace(",", " ").split()
    if not words:
        raise ProofScriptError("Missing justification", line_number=line_number)
    keyword = words[0].upper()
    try:
        rule = Rule(keyword)
    except ValueError:
        known = ", ".join(r.value for r in Rule)
        raise ProofScriptError(
            f"Unknown justification {words[0]!r}; expected one of: {known}",
            line_number=line_number,
        ) from None
    args = words[1:]
    if rule is Rule.AX:
        if len(args) != 1:
            raise ProofScriptError("AX takes one axiom name", line_number=line_number)
        return Justification(rule, axiom=args[0])
    if not all(arg.isdigit() for arg in args):
        raise ProofScriptError(
            f"{rule.value} takes line numbers, got {' '.join(args)!r}", line_number=line_number
        )
    premises = tuple(int(arg) for arg in args)
    expected = _ARITY.get(rule)
    if expected is not None and len(premises) != expected:
        raise ProofScriptError(
            f"{rule.value} takes {expected} line number(s), got {len(premises)}",
            line_number=line_number,
        )
    if rule is Rule.CONSEQ and not premises:
        raise ProofScriptError("CONSEQ needs at least one cited line", line_number=line_number)
    return Justification(rule, premises)


def parse_script(text: str) -> Derivation:
    """Read a proof script.

    ``# system: <name>`` and ``# name: <id>`` comment lines are recorded; every
    other comment and blank line is skipped.

    Raises:
        ProofScriptError: for unreadable lines, bad formulas or unknown justifications
    """
    lines: list[ProofLine] = []
    meta: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            if directive := _DIRECTIVE.match(stripped):
                meta[directive.group(1).lower()] = directive.group(2)
            continue
        match = _LINE.match(stripped)
        if match is None:
            raise ProofScriptError(
                "Expected '<k>. <formula> ; <justification>'", line_number=number
            )
        label, formula_text, justification_text = match.groups()
        try:
            formula = parse(formula_text, keep_sugar=True)
        except FormulaSyntaxError as exc:
            raise ProofScriptError(str(exc), line_number=number) from exc
        lines.append(
            ProofLine(
                int(label), formula, _parse_justification(justification_text, number), number
            )
        )
    return Derivation(tuple(lines), meta.get("system"), meta.get("name"))


def load_script(path: PathLike[str] | str) -> Derivation:
    """Read a proof script file.

    Raises:
        ProofScriptError: if the file is unreadable or malformed
    """
    file = Path(path)
    try:
        text = file.read_text(encoding="utf-8")
    except OSError as exc:
        raise ProofScriptError(f"Cannot read {file}: {exc.strerror or exc}", line_number=0) from exc
    except UnicodeDecodeError as exc:
        raise ProofScriptError(
            f"{file} is not valid UTF-8 (byte {exc.start})", line_number=0
        ) from exc
    derivation = parse_script(text)
    return derivation if derivation.name else _renamed(derivation, file.stem)


def _renamed(d: Derivation, name: str) -> Derivation:
    return Derivation(d.lines, d.system, name)


class _Rejected(Exception):
    pass


def _premise(formulas: Mapping[int, Formula], k: int, current: int) -> Formula:
    if k >= current:
        raise _Rejected(f"line {k} is not an earlier line")
    if k not in formulas:
        raise _Rejected(f"line {k} does not exist")
    return formulas[k]


def _check_line(system: AxiomSystem, line: ProofLine, formulas: Mapping[int, Formula]) -> None:
    just = line.justification
    if just.rule not in system.rules:
        raise _Rejected(f"rule {just.rule.value} is not available in {system.name}")
    cited = [_premise(formulas, k, line.number) for k in just.premises]
    target = expand_defined(line.formula)

    match just.rule:
        case Rule.AX:
            assert just.axiom is not None
            schema = system.schema(just.axiom)
            if schema is None:
                raise _Rejected(f"{just.axiom} is not an axiom of {system.name}")
            if match_schema(schema, line.formula) is None:
                raise _Rejected(f"not an instance of {schema}")
        case Rule.TAUT:
            if not is_tautology_instance(line.formula):
                raise _Rejected("not a tautology instance")
        case Rule.MP:
            minor, major = (expand_defined(f) for f in cited)
            if major != Imp(minor, target):
                raise _Rejected(
                    f"line {just.premises[1]} is not line {just.premises[0]} -> line {line.number}"
                )
        case Rule.RE_NABLA | Rule.RE_BULLET:
            wrap = Nabla if just.rule is Rule.RE_NABLA else Bullet
            premise = expand_defined(cited[0])
            if not isinstance(premise, Iff):
                raise _Rejected(f"line {just.premises[0]} is not an equivalence")
            if target != Iff(wrap(premise.left), wrap(premise.right)):
                raise _Rejected(f"not the {just.rule.value} image of line {just.premises[0]}")
        case Rule.DEF:
            if not definitionally_equal(cited[0], line.formula):
                raise _Rejected(f"not definitionally equal to line {just.premises[0]}")
        case Rule.CONSEQ:
            if not is_tautology_instance(Imp(conjunction(cited), line.formula)):
                refs = ",".join(map(str, just.premises))
                raise _Rejected(f"not a tautological consequence of line(s) {refs}")


def check_derivation(system: AxiomSystem, d: Derivation) -> CheckResult:
    """Verify every line of ``d`` against ``system``; the first failing line is reported.

    Raises:
        BudgetExceededError: when a tautology check exceeds the skeleton budget
    """
    if not d.lines:
        return CheckResult(False, reason="derivation has no lines")
    formulas: dict[int, Formula] = {}
    for line in d.lines:
        if line.number in formulas:
            return CheckResult(False, line.number, "line number used twice", len(formulas))
        try:
            _check_line(system, line, formulas)
        except _Rejected as exc:
            logger.debug("Line %d rejected: %s", line.number, exc)
            return CheckResult(False, line.number, str(exc), len(formulas))
        formulas[line.number] = line.formula
    logger.info("Derivation of %s accepted in %s", render(d.lines[-1].formula), system.name)
    return CheckResult(True, checked=len(formulas))


# --------------------------------------------------------------------------
# Shipped derivations and soundness
# --------------------------------------------------------------------------


def _proof_dir() -> Any:
    return files("ignorance_toolkit").joinpath("fixtures", "proofs")


def fixture_proofs() -> list[str]:
    """Names of the shipped proof scripts."""
    return sorted(
        entry.name.removesuffix(".prf")
        for entry in _proof_dir().iterdir()
        if entry.name.endswith(".prf")
    )


def load_fixture_proof(name: str) -> Derivation:
    """Load a shipped proof script by name.

    Raises:
        FixtureError: if no such script ships with the package
    """
    resource = _proof_dir().joinpath(f"{name}.prf")
    if not resource.is_file():
        raise FixtureError(
            f"Unknown proof fixture {name!r}; available: {', '.join(fixture_proofs())}"
        )
    derivation = parse_script(resource.read_text(encoding="utf-8"))
    return _renamed(derivation, name)


@dataclass(frozen=True, slots=True)
class SoundnessEntry:
    schema: AxiomSchema
    instance: Formula
    verdict: Verdict


@dataclass(frozen=True, slots=True)
class SoundnessReport:
    system: AxiomSystem
    properties: frozenset[Property]
    bound: int
    entries: tuple[SoundnessEntry, ...] = field(default=())

    @property
    def all_valid(self) -> bool:
        return all(entry.verdict.is_valid for entry in self.entries)

    def to_dict(self) -> dict[str, Any]:
        return {
            "system": self.system.name,
            "class": ",".join(p.value for p in sorted(self.properties)) or "all",
            "bound": self.bound,
            "axioms": [
                {"name": e.schema.name, "instance": render(e.instance), **e.verdict.to_dict()}
                for e in self.entries
            ],
        }


def axiom_soundness_suite(
    system: AxiomSystem,
    *,
    props: Iterable[Property] | None = None,
    max_states: int = 2,
    **options: Any,
) -> SoundnessReport:
    """Bounded validity of every schema instance ``?phi, ?psi, ?chi := p, q, r``.

    The system's own frame class is used unless ``props`` overrides it.
    """
    frame_class = system.frame_class if props is None else frozenset(props)
    entries: list[SoundnessEntry] = []
    for schema in system.schemas:
        instance = expand_defined(schema.instantiate())
        verdict = class_valid(instance, frame_class, max_states, **options)
        entries.append(SoundnessEntry(schema, instance, verdict))
    return SoundnessReport(system, frame_class, max_states, tuple(entries))


def instantiate_lines(d: Derivation) -> Sequence[Formula]:
    """Object-level instances of every line at ``?phi, ?psi, ?chi := p, q, r``."""
    return [expand_defined(substitute(line.formula, DEFAULT_INSTANCE)) for line in d.lines]
