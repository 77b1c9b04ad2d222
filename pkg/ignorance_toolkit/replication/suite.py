"""The replication suite: every fixture claim, run in id order, with text and JSON reports."""

from __future__ import annotations

import json
from collections.abc import Iterable
from dataclasses import dataclass
from typing import Any

from ..logger import get_logger
from ..model import Property
from ..parallel import JobRunner
from .claims import (
    Claim,
    ClaimOutcome,
    ClassValid,
    Definability,
    Distinguishable,
    Falsifies,
    FrameCorrespondence,
    FrameValid,
    HasProperty,
    Indistinguishable,
    LacksProperty,
    Morphism,
    ProofAccepted,
    Satisfies,
    Sound,
    SuiteOptions,
    Supplemented,
)

logger = get_logger(__name__)

P = Property


def _expressivity(
    group: str,
    props: tuple[Property, ...],
    weak: str,
    strong: str,
    witness: str,
) -> list[Claim]:
    """Both models have ``props``, agree on ``weak`` and differ on ``strong`` via ``witness``."""
    left, right = f"{group}.M", f"{group}.M'"
    return [
        HasProperty(f"{group}.has.M", group, left, props),
        HasProperty(f"{group}.has.M'", group, right, props),
        Indistinguishable(f"{group}.indistinguishable", group, left, right, weak),
        Distinguishable(f"{group}.distinguishable", group, left, right, strong, witness),
    ]


def _equivalences() -> list[Claim]:
    claims: list[Claim] = []
    for tag, formula in (
        ("bullet", "bullet p <-> p & nabla p"),
        ("nabla", "nabla p <-> bullet p | bullet ~p"),
    ):
        claims += [
            ClassValid(f"EQ.{tag}.c", "EQ", formula, frozenset({P.C})),
            ClassValid(f"EQ.{tag}.t", "EQ", formula, frozenset({P.T})),
            ClassValid(f"EQ.{tag}.all", "EQ", formula, expected=False),
        ]
    return claims


def build_claims() -> list[Claim]:
    """Every claim of the suite."""
    n_r_i_s_d_b = (P.N, P.R, P.I, P.S_SUP, P.D, P.B)
    claims: list[Claim] = [
        *_expressivity("P1", (P.R, P.I, P.S_SUP, P.D), "nabla", "bullet", "bullet p"),
        LacksProperty("P1.lacks.M", "P1", "P1.M", (P.N,)),
        LacksProperty("P1.lacks.M'", "P1", "P1.M'", (P.N,)),
        Satisfies("P1.sat", "P1", "P1.M", "s", "bullet p"),
        Falsifies("P1.fals", "P1", "P1.M'", "s'", "bullet p"),
        *_expressivity("P2", (P.N, P.B), "nabla", "bullet", "bullet p"),
        *_expressivity("P3", (P.FOUR, P.FIVE), "nabla", "bullet", "bullet ~p"),
        *_expressivity("R1", (P.R, P.I, P.FOUR, P.FIVE), "nabla-bullet", "box", "box false"),
        Falsifies("R1.fals", "R1", "R1.M", "s", "bullet p"),
        *_expressivity("P6", n_r_i_s_d_b, "bullet", "nabla", "nabla p"),
        Satisfies("P6.sat", "P6", "P6.M", "s", "nabla p"),
        Morphism("P6.morphism", "P6", "P6.M", "P6.M'", (("s", "s'"), ("t", "t'"))),
        Morphism(
            "P6.morphism.swapped", "P6", "P6.M", "P6.M'", (("s", "t'"), ("t", "s'")), False
        ),
        *_expressivity("P7", (P.FOUR,), "bullet", "nabla", "nabla p"),
        *_expressivity("P8", (P.FIVE,), "bullet", "nabla", "nabla p"),
        *_expressivity("P12", (P.N, P.S_SUP, P.B), "nabla-bullet", "box", "box p"),
        Satisfies("P12.sat", "P12", "P12.M", "s", "box p"),
        Falsifies("P12.fals", "P12", "P12.M'", "s'", "box p"),
        Definability("P13.definability", "P13", "circ true", P.N),
        FrameValid("P13.valid.F2", "P13", "P14.F2", "circ true"),
        HasProperty("P14.has.F1", "P14", "P14.F1", (P.D, P.T)),
        LacksProperty("P14.lacks.F1", "P14", "P14.F1", (P.C,)),
        HasProperty("P14.has.F2", "P14", "P14.F2", (P.C, P.R, P.I, P.B)),
        LacksProperty("P14.lacks.F2", "P14", "P14.F2", (P.D, P.T)),
        LacksProperty("P14.lacks.F3", "P14", "P14.F3", (P.R, P.I, P.B)),
        FrameCorrespondence("P14.F1-F2", "P14", "P14.F1", "P14.F2", (("s1", "s2"),)),
        FrameCorrespondence("P14.F2-F3.s3", "P14", "P14.F2", "P14.F3", (("s2", "s3"),)),
        FrameCorrespondence("P14.F2-F3.t3", "P14", "P14.F2", "P14.F3", (("s2", "t3"),)),
        HasProperty("P15.has.F", "P15", "P15.F", (P.S_SUP, P.FOUR)),
        LacksProperty("P15.lacks.F'", "P15", "P15.F'", (P.S_SUP, P.FOUR)),
        FrameCorrespondence(
            "P15.F-F'", "P15", "P15.F", "P15.F'", (("s", "s'"), ("t", "t'"))
        ),
        HasProperty("P16.has.F", "P16", "P16.F", (P.FIVE,)),
        LacksProperty("P16.lacks.F'", "P16", "P16.F'", (P.FIVE,)),
        FrameCorrespondence(
            "P16.F-F'", "P16", "P16.F", "P16.F'", (("s", "s'"), ("t", "t'"))
        ),
        *_equivalences(),
        ClassValid("COR.rumsfeld-first-order", "COR", "bullet nabla p -> nabla p"),
        ClassValid("COR.second-order", "COR", "nabla nabla p & nabla p -> bullet nabla p"),
        ClassValid(
            "COR.rumsfeld-second-order.c", "COR", "bullet nabla p -> nabla nabla p",
            frozenset({P.C}),
        ),
        ClassValid(
            "COR.rumsfeld-second-order.all", "COR", "bullet nabla p -> nabla nabla p",
            expected=False,
        ),
        ClassValid("NEG.E4", "NEG", "bullet p -> nabla p", expected=False),
        ClassValid(
            "NEG.M1", "NEG", "nabla (p | q) & nabla (~p | r) -> nabla p", expected=False
        ),
        ClassValid("NEG.N", "NEG", "circ true", expected=False),
        ProofAccepted("PRF.nabla-and-fact", "PRF", "nabla-and-fact-implies-bullet", "E"),
        ProofAccepted("PRF.circ-and-fact", "PRF", "circ-and-fact-implies-delta", "E"),
        ProofAccepted("PRF.bullet-circ-or", "PRF", "bullet-circ-or-implies", "E"),
        ProofAccepted("PRF.rumsfeld-first-order", "PRF", "bullet-nabla-implies-nabla", "E"),
        ProofAccepted("PRF.second-order", "PRF", "second-order-and-first-order", "E"),
        ProofAccepted(
            "PRF.rumsfeld-second-order", "PRF", "bullet-nabla-implies-nabla-nabla", "Ec"
        ),
        ProofAccepted("PRF.delta-top", "PRF", "delta-top", "EN"),
        *(Sound(f"SND.{name}", "SND", name) for name in ("E", "Ec", "EN", "M", "R", "K")),
        Supplemented("SUP.P15.F'", "SUP", "P15.F'"),
        Supplemented("SUP.P6.M", "SUP", "P6.M"),
    ]
    return sorted(claims, key=lambda c: c.claim_id)


def select_claims(claims: Iterable[Claim], only: Iterable[str] = ()) -> list[Claim]:
    """Claims whose group or id matches one of ``only`` (all claims when empty)."""
    wanted = {o.strip().upper().replace("′", "'") for o in only if o.strip()}
    if not wanted:
        return list(claims)
    return [
        c
        for c in claims
        if c.group.upper() in wanted
        or c.claim_id.upper() in wanted
        or any(c.claim_id.upper().startswith(w + ".") for w in wanted)
    ]


@dataclass(frozen=True, slots=True)
class SuiteReport:
    outcomes: tuple[ClaimOutcome, ...]
    options: SuiteOptions

    @property
    def passed(self) -> int:
        return sum(1 for o in self.outcomes if o.passed)

    @property
    def failed(self) -> int:
        return len(self.outcomes) - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_dict(self, *, timings: bool = False) -> dict[str, Any]:
        return {
            "claims": [o.to_dict(timings=timings) for o in self.outcomes],
            "summary": {
                "total": len(self.outcomes),
                "passed": self.passed,
                "failed": self.failed,
                "exhaustive_definability": self.options.exhaustive,
            },
        }

    def to_json(self, *, timings: bool = False) -> str:
        return json.dumps(self.to_dict(timings=timings), indent=2, sort_keys=True) + "\n"

    def to_text(self, *, timings: bool = True) -> str:
        lines: list[str] = []
        group = None
        for outcome in self.outcomes:
            if outcome.group != group:
                group = outcome.group
                lines.append(f"[{group}]")
            mark = "PASS" if outcome.passed else "FAIL"
            line = f"  {mark} {outcome.claim_id}: {outcome.statement} -- {outcome.detail}"
            if timings:
                line += f" ({outcome.elapsed_ms:.1f} ms)"
            lines.append(line)
        lines.append(f"{self.passed}/{len(self.outcomes)} claims passed")
        return "\n".join(lines) + "\n"


def _run(task: tuple[Claim, SuiteOptions]) -> ClaimOutcome:
    claim, options = task
    return claim.check(options)


def run_claim_suite(
    options: SuiteOptions | None = None, *, only: Iterable[str] = ()
) -> SuiteReport:
    """Check every selected claim; ``options.jobs`` parallelizes the searches inside claims."""
    opts = options or SuiteOptions()
    claims = select_claims(build_claims(), only)
    logger.info("Running %d claims", len(claims))
    # claims run in order; heavy claims spread their own search over the job pool
    runner = JobRunner(1, progress=opts.progress, desc="claims", unit="claim")
    outcomes = runner.map(_run, [(c, opts) for c in claims])
    report = SuiteReport(tuple(outcomes), opts)
    logger.info("%d/%d claims passed", report.passed, len(outcomes))
    return report
