"""Truth sets, validity on models and frames, and bounded validity over frame classes."""

from __future__ import annotations

import itertools
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass
from enum import StrEnum
from typing import Any

from .config import setting
from .errors import BudgetExceededError
from .formula import (
    And,
    Atom,
    Bot,
    Box,
    Bullet,
    Circ,
    Delta,
    Diamond,
    Formula,
    Iff,
    Imp,
    MetaVar,
    Nabla,
    Not,
    Or,
    Top,
    atoms,
    render,
)
from .logger import get_logger
from .model import (
    NeighborhoodFrame,
    NeighborhoodModel,
    Property,
    box_image,
    bullet_image,
    nabla_image,
)
from .modelfile import to_document
from .utils import StateSet, full_set, lowest_index

logger = get_logger(__name__)

__all__ = [
    "Verdict",
    "VerdictStatus",
    "class_valid",
    "evaluate",
    "frame_counterexample",
    "frame_valid",
    "iter_valuations",
    "model_valid",
    "satisfies",
    "truth_set",
]


def evaluate(
    f: Formula, size: int, masks: Sequence[int], valuation: Mapping[str, StateSet]
) -> StateSet:
    """Truth set of ``f`` over raw frame ``masks`` (the hot path of every search)."""
    full = full_set(size)
    match f:
        case Atom(name):
            return valuation.get(name, 0)
        case Top():
            return full
        case Bot():
            return 0
        case Not(x):
            return full ^ evaluate(x, size, masks, valuation)
        case And(left, right):
            return evaluate(left, size, masks, valuation) & evaluate(right, size, masks, valuation)
        case Or(left, right):
            return evaluate(left, size, masks, valuation) | evaluate(right, size, masks, valuation)
        case Imp(left, right):
            return (full ^ evaluate(left, size, masks, valuation)) | evaluate(
                right, size, masks, valuation
            )
        case Iff(left, right):
            return full ^ (
                evaluate(left, size, masks, valuation) ^ evaluate(right, size, masks, valuation)
            )
        case Nabla(x):
            return nabla_image(size, masks, evaluate(x, size, masks, valuation))
        case Bullet(x):
            return bullet_image(size, masks, evaluate(x, size, masks, valuation))
        case Box(x):
            return box_image(size, masks, evaluate(x, size, masks, valuation))
        case Delta(x):
            # phi or its complement is a neighborhood
            return full ^ nabla_image(size, masks, evaluate(x, size, masks, valuation))
        case Circ(x):
            return full ^ bullet_image(size, masks, evaluate(x, size, masks, valuation))
        case Diamond(x):
            inner = full ^ evaluate(x, size, masks, valuation)
            return full ^ box_image(size, masks, inner)
        case MetaVar(name):
            raise ValueError(f"Cannot evaluate schematic formula containing ?{name}")
    raise TypeError(f"Not a formula: {f!r}")


def truth_set(m: NeighborhoodModel, f: Formula) -> StateSet:
    """The set of states of ``m`` where ``f`` is true."""
    return evaluate(f, m.size, m.frame.masks, m.valuation_map())


def satisfies(m: NeighborhoodModel, state: str, f: Formula) -> bool:
    """Whether ``f`` is true at ``state``; raises ValueError for unknown states."""
    index = m.frame.index(state)
    return (truth_set(m, f) >> index) & 1 == 1


def model_valid(m: NeighborhoodModel, f: Formula) -> bool:
    return truth_set(m, f) == m.frame.full


def iter_valuations(names: Sequence[str], size: int) -> Iterator[dict[str, StateSet]]:
    """All valuations of ``names`` over ``size`` states, last name varying fastest."""
    for values in itertools.product(range(1 << size), repeat=len(names)):
        yield dict(zip(names, values, strict=True))


def _guard_valuations(f: Formula, size: int, valuation_bits: int | None) -> list[str]:
    names = sorted(atoms(f))
    limit: int = setting("valuation_bits", valuation_bits)
    if len(names) * size > limit:
        raise BudgetExceededError(
            f"{len(names)} atoms over {size} states needs 2^{len(names) * size} valuations; "
            f"the limit is 2^{limit}"
        )
    return names


def frame_counterexample(
    frame: NeighborhoodFrame, f: Formula, *, valuation_bits: int | None = None
) -> tuple[NeighborhoodModel, str] | None:
    """First falsifying pointed model on ``frame`` in canonical valuation order.

    Raises:
        BudgetExceededError: when ``|atoms(f)| * |S|`` exceeds the valuation guard
    """
    names = _guard_valuations(f, frame.size, valuation_bits)
    full = frame.full
    for valuation in iter_valuations(names, frame.size):
        result = evaluate(f, frame.size, frame.masks, valuation)
        if result != full:
            model = NeighborhoodModel.from_sets(frame, valuation)
            return model, frame.states[lowest_index(full ^ result)]
    return None


def frame_valid(
    frame: NeighborhoodFrame, f: Formula, *, valuation_bits: int | None = None
) -> bool:
    """True iff ``f`` is valid on every model based on ``frame``."""
    return frame_counterexample(frame, f, valuation_bits=valuation_bits) is None


class VerdictStatus(StrEnum):
    VALID_UP_TO_BOUND = "valid-up-to-bound"
    COUNTERMODEL = "countermodel"


@dataclass(frozen=True, slots=True)
class Verdict:
    """Outcome of a bounded validity check over a frame class.

    ``frames_checked`` counts frames in canonical order up to and including the
    countermodel's frame (all frames in scope when none was found).
    """

    status: VerdictStatus
    formula: Formula
    properties: frozenset[Property]
    bound: int
    frames_checked: int
    witness_model: NeighborhoodModel | None = None
    witness_state: str | None = None
    sampled_sizes: tuple[int, ...] = ()
    seed: int | None = None

    @property
    def is_valid(self) -> bool:
        return self.status is VerdictStatus.VALID_UP_TO_BOUND

    @property
    def witness(self) -> tuple[NeighborhoodModel, str] | None:
        if self.witness_model is None or self.witness_state is None:
            return None
        return self.witness_model, self.witness_state

    @property
    def class_label(self) -> str:
        if not self.properties:
            return "all"
        return ",".join(p.value for p in sorted(self.properties))

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "status": self.status.value,
            "formula": render(self.formula),
            "class": self.class_label,
            "bound": self.bound,
            "frames_checked": self.frames_checked,
            "sampled_sizes": list(self.sampled_sizes),
        }
        if self.sampled_sizes:
            data["seed"] = self.seed
        if self.witness_model is not None:
            data["countermodel"] = {
                "model": to_document(self.witness_model),
                "state": self.witness_state,
            }
        return data

    def summary(self) -> str:
        scope = f"|S| <= {self.bound}, class {self.class_label}"
        if self.sampled_sizes:
            sizes = ",".join(str(n) for n in self.sampled_sizes)
            scope += f", sampled sizes {sizes} (seed {self.seed})"
        if self.is_valid:
            return f"valid up to bound ({scope}; {self.frames_checked} frames)"
        assert self.witness_model is not None
        return (
            f"countermodel ({scope}) at state {self.witness_state}: "
            f"{self.witness_model.describe()}"
        )


def class_valid(
    f: Formula,
    props: frozenset[Property] | set[Property] = frozenset(),
    max_states: int = 2,
    **options: Any,
) -> Verdict:
    """Bounded validity of ``f`` over the frames having every property in ``props``.

    Frames are searched in canonical order, exhaustively up to
    ``exhaustive_states`` states and by seeded sampling above it. Keyword options
    (``jobs``, ``seed``, ``sample_size``, ``exhaustive_states``, ``frame_budget``,
    ``valuation_bits``, ``progress``) override the configuration.

    Raises:
        BudgetExceededError: when the frame or valuation guard is exceeded
    """
    from .search import search_countermodel

    outcome = search_countermodel(f, frozenset(props), max_states, **options)
    if outcome.witness is None:
        status = VerdictStatus.VALID_UP_TO_BOUND
        model, state = None, None
    else:
        status = VerdictStatus.COUNTERMODEL
        model, state = outcome.witness
    verdict = Verdict(
        status=status,
        formula=f,
        properties=frozenset(props),
        bound=max_states,
        frames_checked=outcome.frames_checked,
        witness_model=model,
        witness_state=state,
        sampled_sizes=outcome.sampled_sizes,
        seed=outcome.seed,
    )
    logger.info("%s: %s", render(f), verdict.summary())
    return verdict
