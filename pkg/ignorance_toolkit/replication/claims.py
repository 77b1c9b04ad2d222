"""Mechanized claims about the fixtures, one library call per claim."""

from __future__ import annotations

import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Final

from ..config import setting
from ..formula import Fragment, parse, render
from ..logger import get_logger
from ..model import NeighborhoodModel, Property, supplementation
from ..proofs import AxiomSystem, axiom_soundness_suite, check_derivation, instantiate_lines
from ..proofs import load_fixture_proof as _load_proof
from ..search import (
    check_bullet_morphism,
    check_definability,
    distinguishable,
    frames_indistinguishable,
)
from ..semantics import class_valid, frame_valid, satisfies
from .catalog import get_fixture, load_frame_fixture, load_model_fixture

logger = get_logger(__name__)

THREE_STATE_FRAMES: Final = 256**3
SMALL_FRAMES: Final = 4 + 256


@dataclass(frozen=True, slots=True)
class SuiteOptions:
    jobs: int | None = None
    seed: int | None = None
    exhaustive: bool = False
    progress: bool = False
    definability_samples: int | None = None


@dataclass(frozen=True, slots=True)
class ClaimOutcome:
    claim_id: str
    group: str
    kind: str
    statement: str
    passed: bool
    detail: str
    elapsed_ms: float = 0.0

    def to_dict(self, *, timings: bool = False) -> dict[str, Any]:
        data: dict[str, Any] = {
            "id": self.claim_id,
            "group": self.group,
            "kind": self.kind,
            "statement": self.statement,
            "verdict": "pass" if self.passed else "fail",
            "detail": self.detail,
        }
        if timings:
            data["elapsed_ms"] = round(self.elapsed_ms, 3)
        return data


@dataclass(frozen=True)
class Claim(ABC):
    """Base class for claims checked by the replication suite."""

    claim_id: str
    group: str

    @property
    def kind(self) -> str:
        return type(self).__name__

    @property
    @abstractmethod
    def statement(self) -> str:
        """One-line human-readable form of the claim."""
        raise NotImplementedError

    @abstractmethod
    def evaluate(self, options: SuiteOptions) -> tuple[bool, str]:
        """Run the check; return whether it holds and a short detail line."""
        raise NotImplementedError

    def check(self, options: SuiteOptions | None = None) -> ClaimOutcome:
        start = time.perf_counter()
        passed, detail = self.evaluate(options or SuiteOptions())
        elapsed = (time.perf_counter() - start) * 1000
        if not passed:
            logger.error("Claim %s failed: %s", self.claim_id, detail)
        return ClaimOutcome(
            self.claim_id, self.group, self.kind, self.statement, passed, detail, elapsed
        )


def _props(props: tuple[Property, ...]) -> str:
    return ",".join(p.label for p in props)


def _class(props: frozenset[Property]) -> str:
    return ",".join(p.label for p in sorted(props)) or "all frames"


# --------------------------------------------------------------------------
# Property profiles
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class HasProperty(Claim):
    fixture: str
    props: tuple[Property, ...]

    @property
    def statement(self) -> str:
        return f"{self.fixture} has {_props(self.props)}"

    def evaluate(self, options: SuiteOptions) -> tuple[bool, str]:
        frame = load_frame_fixture(self.fixture)
        missing = [p for p in self.props if not frame.has_property(p)]
        if missing:
            return False, f"lacks {_props(tuple(missing))}"
        return True, "all present"


@dataclass(frozen=True)
class LacksProperty(Claim):
    fixture: str
    props: tuple[Property, ...]

    @property
    def statement(self) -> str:
        return f"{self.fixture} lacks {_props(self.props)}"

    def evaluate(self, options: SuiteOptions) -> tuple[bool, str]:
        frame = load_frame_fixture(self.fixture)
        present = [p for p in self.props if frame.has_property(p)]
        if present:
            return False, f"has {_props(tuple(present))}"
        return True, "all absent"


# --------------------------------------------------------------------------
# Pointed truth
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Satisfies(Claim):
    fixture: str
    state: str
    formula: str

    @property
    def statement(self) -> str:
        return f"{self.fixture},{self.state} |= {self.formula}"

    def evaluate(self, options: SuiteOptions) -> tuple[bool, str]:
        value = satisfies(load_model_fixture(self.fixture), self.state, parse(self.formula))
        return value, "true" if value else "false"


@dataclass(frozen=True)
class Falsifies(Claim):
    fixture: str
    state: str
    formula: str

    @property
    def statement(self) -> str:
        return f"{self.fixture},{self.state} |/= {self.formula}"

    def evaluate(self, options: SuiteOptions) -> tuple[bool, str]:
        value = satisfies(load_model_fixture(self.fixture), self.state, parse(self.formula))
        return not value, "true" if value else "false"


# --------------------------------------------------------------------------
# Expressivity
# --------------------------------------------------------------------------


def _pair(left: str, right: str) -> tuple[NeighborhoodModel, str, NeighborhoodModel, str]:
    return (
        load_model_fixture(left),
        get_fixture(left).points[0],
        load_model_fixture(right),
        get_fixture(right).points[0],
    )


@dataclass(frozen=True)
class Indistinguishable(Claim):
    left: str
    right: str
    fragment: str
    vocab: tuple[str, ...] = ("p",)

    @property
    def statement(self) -> str:
        return f"{self.left} and {self.right} agree on {Fragment.from_name(self.fragment)}"

    def evaluate(self, options: SuiteOptions) -> tuple[bool, str]:
        m, s, m2, s2 = _pair(self.left, self.right)
        witness = distinguishable(m, s, m2, s2, Fragment.from_name(self.fragment), self.vocab)
        if witness is not None:
            return False, f"separated by {witness}"
        return True, "no separating formula"


@dataclass(frozen=True)
class Distinguishable(Claim):
    left: str
    right: str
    fragment: str
    witness: str
    vocab: tuple[str, ...] = ("p",)

    @property
    def statement(self) -> str:
        frag = Fragment.from_name(self.fragment)
        return f"{self.left} and {self.right} differ on {frag} via {self.witness}"

    def evaluate(self, options: SuiteOptions) -> tuple[bool, str]:
        m, s, m2, s2 = _pair(self.left, self.right)
        frag = Fragment.from_name(self.fragment)
        stated = parse(self.witness)
        if not frag.admits(stated):
            return False, f"{self.witness} is outside {frag}"
        if satisfies(m, s, stated) == satisfies(m2, s2, stated):
            return False, f"{self.witness} does not separate the points"
        found = distinguishable(m, s, m2, s2, frag, self.vocab)
        if found is None:
            return False, "closure found no separating formula"
        return True, f"{self.witness} separates; closure found {found}"


@dataclass(frozen=True)
class FrameCorrespondence(Claim):
    left: str
    right: str
    pairs: tuple[tuple[str, str], ...]
    fragment: str = "nabla-bullet"
    vocabs: tuple[tuple[str, ...], ...] = (("p",), ("p", "q"))

    @property
    def statement(self) -> str:
        links = ", ".join(f"{a}~{b}" for a, b in self.pairs)
        frag = Fragment.from_name(self.fragment)
        return f"{self.left} and {self.right} agree on {frag} at {links} (bounded vocabulary)"

    def evaluate(self, options: SuiteOptions) -> tuple[bool, str]:
        frame, frame2 = load_frame_fixture(self.left), load_frame_fixture(self.right)
        frag = Fragment.from_name(self.fragment)
        checked = 0
        for vocab in self.vocabs:
            result = frames_indistinguishable(frame, frame2, self.pairs, frag, vocab)
            checked += result.valuations_checked
            if result.failure is not None:
                _, a, _, b, witness = result.failure
                return False, f"{witness} separates {a} and {b} over {{{','.join(vocab)}}}"
        return True, f"{checked} matching valuation pairs"


@dataclass(frozen=True)
class Morphism(Claim):
    left: str
    right: str
    mapping: tuple[tuple[str, str], ...]
    expected: bool = True

    @property
    def statement(self) -> str:
        arrows = ", ".join(f"{a}->{b}" for a, b in self.mapping)
        verb = "is" if self.expected else "is not"
        return f"{arrows} {verb} a bullet-morphism from {self.left} to {self.right}"

    def evaluate(self, options: SuiteOptions) -> tuple[bool, str]:
        holds = check_bullet_morphism(
            load_model_fixture(self.left), load_model_fixture(self.right), dict(self.mapping)
        )
        return holds == self.expected, "morphism" if holds else "not a morphism"


# --------------------------------------------------------------------------
# Validity
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FrameValid(Claim):
    fixture: str
    formula: str
    expected: bool = True

    @property
    def statement(self) -> str:
        verb = "validates" if self.expected else "does not validate"
        return f"{self.fixture} {verb} {self.formula}"

    def evaluate(self, options: SuiteOptions) -> tuple[bool, str]:
        valid = frame_valid(load_frame_fixture(self.fixture), parse(self.formula))
        return valid == self.expected, "valid" if valid else "not valid"


@dataclass(frozen=True)
class ClassValid(Claim):
    formula: str
    props: frozenset[Property] = field(default_factory=frozenset)
    bound: int = 2
    expected: bool = True

    @property
    def statement(self) -> str:
        verb = "valid" if self.expected else "refuted"
        return f"{self.formula} {verb} over {_class(self.props)} (|S| <= {self.bound})"

    def evaluate(self, options: SuiteOptions) -> tuple[bool, str]:
        f = parse(self.formula)
        verdict = class_valid(
            f, self.props, self.bound, jobs=options.jobs, seed=options.seed, progress=False
        )
        if verdict.witness is not None:
            model, state = verdict.witness
            if satisfies(model, state, f):
                return False, "reported countermodel does not falsify the formula"
        return verdict.is_valid == self.expected, verdict.summary()


@dataclass(frozen=True)
class Definability(Claim):
    formula: str
    prop: Property
    bound: int = 3

    @property
    def statement(self) -> str:
        return f"{self.formula} defines {self.prop.label} (|S| <= {self.bound})"

    def evaluate(self, options: SuiteOptions) -> tuple[bool, str]:
        exhaustive_states = self.bound if options.exhaustive else min(self.bound, 2)
        samples: int = setting("definability_samples", options.definability_samples)
        if options.exhaustive:
            budget = THREE_STATE_FRAMES + 1024
        else:
            budget = max(setting("frame_budget"), samples + SMALL_FRAMES)
        report = check_definability(
            parse(self.formula),
            self.prop,
            self.bound,
            exhaustive_states=exhaustive_states,
            sample_size=samples,
            seed=options.seed,
            jobs=options.jobs,
            frame_budget=budget,
            progress=options.progress,
        )
        mode = "exhaustive"
        if report.sampled_sizes:
            mode = f"sampled sizes {','.join(map(str, report.sampled_sizes))}, seed {report.seed}"
        detail = f"{report.frames_checked} frames ({mode}), {report.violations} disagreements"
        return report.defines, detail


# --------------------------------------------------------------------------
# Frame constructions and proofs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Supplemented(Claim):
    fixture: str

    @property
    def statement(self) -> str:
        return f"the supplementation of {self.fixture} is monotone and idempotent"

    def evaluate(self, options: SuiteOptions) -> tuple[bool, str]:
        frame = load_frame_fixture(self.fixture)
        closed = supplementation(frame)
        if not closed.has_property(Property.S_SUP):
            return False, "supplementation lacks (s)"
        if supplementation(closed) != closed:
            return False, "supplementation is not idempotent"
        if frame.has_property(Property.S_SUP) and closed != frame:
            return False, "a monotone frame changed under supplementation"
        return True, closed.describe()


@dataclass(frozen=True)
class ProofAccepted(Claim):
    proof: str
    system: str

    @property
    def statement(self) -> str:
        return f"derivation {self.proof} is accepted in {self.system}"

    def evaluate(self, options: SuiteOptions) -> tuple[bool, str]:
        system = AxiomSystem.from_name(self.system)
        derivation = _load_proof(self.proof)
        result = check_derivation(system, derivation)
        if not result.accepted:
            return False, str(result)
        for number, instance in enumerate(instantiate_lines(derivation), start=1):
            verdict = class_valid(
                instance, system.frame_class, 2, jobs=options.jobs, progress=False
            )
            if not verdict.is_valid:
                return False, f"line {number} instance {render(instance)}: {verdict.summary()}"
        return True, f"{result}; every line valid at |S| <= 2"


@dataclass(frozen=True)
class Sound(Claim):
    system: str

    @property
    def statement(self) -> str:
        system = AxiomSystem.from_name(self.system)
        return f"axioms of {system.name} are valid over {_class(system.frame_class)} (|S| <= 2)"

    def evaluate(self, options: SuiteOptions) -> tuple[bool, str]:
        report = axiom_soundness_suite(
            AxiomSystem.from_name(self.system), jobs=options.jobs, progress=False
        )
        failed = [e.schema.name for e in report.entries if not e.verdict.is_valid]
        if failed:
            return False, f"countermodels for {', '.join(failed)}"
        return True, f"{len(report.entries)} axioms valid up to bound"
