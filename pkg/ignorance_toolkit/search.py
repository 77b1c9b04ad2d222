"""Frame enumeration, bounded countermodel search and fragment distinguishability.

Frames are enumerated per size in canonical order: the tuple of membership
masks, compared lexicographically. Searches are split into chunks (one per
neighborhood collection of the first state, or one per sample stream) so they
can run on a :class:`~ignorance_toolkit.parallel.JobRunner`; results are reduced
in chunk order, which keeps every report independent of the job count.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from functools import cache, reduce
from operator import mul
from typing import Any, Final

from .config import setting
from .errors import BudgetExceededError
from .formula import (
    And,
    Atom,
    Bot,
    Box,
    Bullet,
    Formula,
    Fragment,
    Modality,
    Nabla,
    Not,
    Top,
    atoms,
    render,
    subformulas,
)
from .logger import get_logger
from .model import (
    GLOBAL_PROPERTIES,
    LOCAL_PROPERTIES,
    NeighborhoodFrame,
    NeighborhoodModel,
    Property,
    base_properties,
    box_image,
    bullet_image,
    default_labels,
    local_property_holds,
    masks_have_properties,
    nabla_image,
)
from .parallel import JobRunner
from .semantics import evaluate, iter_valuations, satisfies, truth_set
from .utils import StateSet, full_set, lowest_index

logger = get_logger(__name__)

__all__ = [
    "CorrespondenceResult",
    "DefinabilityReport",
    "DefinablePair",
    "SearchOutcome",
    "Witness",
    "check_bullet_morphism",
    "check_definability",
    "definable_pool",
    "distinguishable",
    "enumerate_frames",
    "find_countermodel",
    "frames_indistinguishable",
    "search_countermodel",
]

MAX_SEARCH_STATES: Final = 4
EXHAUSTIVE_LIMIT: Final = 3
SAMPLE_STREAMS: Final = 16


# --------------------------------------------------------------------------
# Enumeration
# --------------------------------------------------------------------------


@cache
def _allowed_masks(size: int, index: int, local: frozenset[Property]) -> tuple[int, ...] | None:
    """Neighborhood collections of state ``index`` meeting every per-state condition.

    ``None`` means unrestricted (every mask below ``2 ** 2 ** size``).
    """
    if not local:
        return None
    return tuple(
        mask
        for mask in range(1 << (1 << size))
        if all(local_property_holds(prop, size, index, mask) for prop in sorted(local))
    )


def _split(props: Iterable[Property]) -> tuple[frozenset[Property], frozenset[Property]]:
    base = base_properties(props)
    return base & LOCAL_PROPERTIES, base & GLOBAL_PROPERTIES


def _per_state(size: int, local: frozenset[Property]) -> list[Sequence[int]]:
    result: list[Sequence[int]] = []
    for index in range(size):
        # only (t) depends on which state owns the collection
        key_index = index if Property.T in local else 0
        allowed = _allowed_masks(size, key_index, local)
        result.append(range(1 << (1 << size)) if allowed is None else allowed)
    return result


def _candidate_count(size: int, props: Iterable[Property]) -> int:
    local, _ = _split(props)
    return reduce(mul, (len(choices) for choices in _per_state(size, local)), 1)


def _iter_exhaustive(
    size: int, props: Iterable[Property], head: int | None = None
) -> Iterator[tuple[int, ...]]:
    local, global_ = _split(props)
    choices = _per_state(size, local)
    if head is not None:
        choices = [(choices[0][head],), *choices[1:]]
    for masks in itertools.product(*choices):
        if not global_ or masks_have_properties(size, masks, global_):
            yield masks


def _sample_rng(seed: int, size: int, stream: int) -> random.Random:
    return random.Random(f"{seed}:{size}:{stream}")


def _iter_sampled(
    size: int, props: Iterable[Property], seed: int, stream: int, count: int
) -> Iterator[tuple[int, ...]]:
    """``count`` seeded draws; each state's collection is drawn from its allowed set."""
    local, global_ = _split(props)
    choices = _per_state(size, local)
    if any(len(c) == 0 for c in choices):
        return
    rng = _sample_rng(seed, size, stream)
    width = 1 << size
    for _ in range(count):
        masks = tuple(
            rng.getrandbits(width) if isinstance(c, range) else rng.choice(c) for c in choices
        )
        if not global_ or masks_have_properties(size, masks, global_):
            yield masks


def _stream_counts(total: int) -> list[int]:
    share, extra = divmod(total, SAMPLE_STREAMS)
    return [share + (1 if i < extra else 0) for i in range(SAMPLE_STREAMS)]


def enumerate_frames(
    n_states: int,
    props: Iterable[Property] = frozenset(),
    *,
    sampled: bool = False,
    seed: int | None = None,
    sample_size: int | None = None,
) -> Iterator[NeighborhoodFrame]:
    """Yield the frames with exactly ``n_states`` states having every property in ``props``.

    Exhaustive mode (sizes up to 3) yields each such frame once, in canonical
    order. Sampled mode draws ``sample_size`` candidates from seeded streams and
    yields those in the class.

    Raises:
        ValueError: for sizes outside 1..4, or size 4 without ``sampled``
    """
    if not 1 <= n_states <= MAX_SEARCH_STATES:
        raise ValueError(f"Frame enumeration supports 1 to {MAX_SEARCH_STATES} states")
    if n_states > EXHAUSTIVE_LIMIT and not sampled:
        raise ValueError(f"{n_states}-state frames can only be sampled")
    labels = default_labels(n_states)
    if not sampled:
        for masks in _iter_exhaustive(n_states, props):
            yield NeighborhoodFrame(labels, masks)
        return
    used_seed: int = setting("seed", seed)
    total: int = setting("sample_size", sample_size)
    for stream, count in enumerate(_stream_counts(total)):
        for masks in _iter_sampled(n_states, props, used_seed, stream, count):
            yield NeighborhoodFrame(labels, masks)


# --------------------------------------------------------------------------
# Chunked scans
# --------------------------------------------------------------------------


class ScanMode(StrEnum):
    COUNTERMODEL = "countermodel"
    DEFINABILITY = "definability"


@dataclass(frozen=True, slots=True)
class ScanTask:
    """One chunk of a frame scan; picklable so it can cross process boundaries."""

    mode: ScanMode
    formula: Formula
    props: frozenset[Property]
    size: int
    names: tuple[str, ...]
    head: int | None = None
    stream: int | None = None
    count: int = 0
    seed: int = 0
    target: Property | None = None


@dataclass(frozen=True, slots=True)
class ScanResult:
    examined: int
    # countermodel: (masks, valuation, falsified state index, 1-based position)
    hit: tuple[tuple[int, ...], tuple[tuple[str, int], ...], int, int] | None = None
    violations: int = 0
    first_violation: tuple[int, ...] | None = None


def _task_frames(task: ScanTask) -> Iterator[tuple[int, ...]]:
    if task.stream is None:
        return _iter_exhaustive(task.size, task.props, task.head)
    return _iter_sampled(task.size, task.props, task.seed, task.stream, task.count)


def _falsify(
    formula: Formula, size: int, masks: Sequence[int], names: Sequence[str]
) -> tuple[dict[str, StateSet], int] | None:
    full = full_set(size)
    for valuation in iter_valuations(names, size):
        result = evaluate(formula, size, masks, valuation)
        if result != full:
            return valuation, lowest_index(full ^ result)
    return None


def scan_chunk(task: ScanTask) -> ScanResult:
    """Worker entry point: scan the frames of one chunk."""
    examined = 0
    violations = 0
    first_violation: tuple[int, ...] | None = None
    for masks in _task_frames(task):
        examined += 1
        falsified = _falsify(task.formula, task.size, masks, task.names)
        if task.mode is ScanMode.COUNTERMODEL:
            if falsified is not None:
                valuation, state = falsified
                return ScanResult(examined, (masks, tuple(valuation.items()), state, examined))
            continue
        assert task.target is not None
        if (falsified is None) != masks_have_properties(task.size, masks, (task.target,)):
            violations += 1
            if first_violation is None:
                first_violation = masks
    return ScanResult(examined, violations=violations, first_violation=first_violation)


@dataclass(frozen=True, slots=True)
class _Plan:
    tasks: list[ScanTask]
    candidates: int
    sampled_sizes: tuple[int, ...]
    seed: int | None


def _plan(  # noqa: PLR0913
    mode: ScanMode,
    formula: Formula,
    props: frozenset[Property],
    sizes: Iterable[int],
    *,
    exhaustive_states: int,
    sample_size: int,
    seed: int,
    frame_budget: int,
    target: Property | None = None,
) -> _Plan:
    names = tuple(sorted(atoms(formula)))
    tasks: list[ScanTask] = []
    candidates = 0
    sampled: list[int] = []
    for size in sizes:
        if size <= exhaustive_states:
            candidates += _candidate_count(size, props)
            local, _ = _split(props)
            heads = len(_per_state(size, local)[0])
            tasks.extend(
                ScanTask(mode, formula, props, size, names, head=head, target=target)
                for head in range(heads)
            )
        else:
            sampled.append(size)
            candidates += sample_size
            tasks.extend(
                ScanTask(
                    mode,
                    formula,
                    props,
                    size,
                    names,
                    stream=stream,
                    count=count,
                    seed=seed,
                    target=target,
                )
                for stream, count in enumerate(_stream_counts(sample_size))
                if count
            )
    if candidates > frame_budget:
        raise BudgetExceededError(
            f"The search would examine {candidates} candidate frames; "
            f"the frame budget is {frame_budget}"
        )
    return _Plan(tasks, candidates, tuple(sampled), seed if sampled else None)


def _guard(formula: Formula, max_states: int, valuation_bits: int | None) -> None:
    count = len(atoms(formula))
    limit: int = setting("valuation_bits", valuation_bits)
    if count * max_states > limit:
        raise BudgetExceededError(
            f"{count} atoms over {max_states} states needs 2^{count * max_states} "
            f"valuations per frame; the limit is 2^{limit}"
        )


def _check_bound(max_states: int, exhaustive_states: int) -> None:
    if not 1 <= max_states <= MAX_SEARCH_STATES:
        raise ValueError(f"max_states must be between 1 and {MAX_SEARCH_STATES}")
    if not 1 <= exhaustive_states <= EXHAUSTIVE_LIMIT:
        raise ValueError(f"exhaustive_states must be between 1 and {EXHAUSTIVE_LIMIT}")


@dataclass(frozen=True, slots=True)
class SearchOutcome:
    witness: tuple[NeighborhoodModel, str] | None
    frames_checked: int
    sampled_sizes: tuple[int, ...] = ()
    seed: int | None = None


def search_countermodel(  # noqa: PLR0913
    f: Formula,
    props: frozenset[Property] = frozenset(),
    max_states: int = 2,
    *,
    jobs: int | None = None,
    seed: int | None = None,
    sample_size: int | None = None,
    exhaustive_states: int | None = None,
    frame_budget: int | None = None,
    valuation_bits: int | None = None,
    progress: bool = True,
) -> SearchOutcome:
    """Canonically least falsifying pointed model over frames with ``props``.

    Raises:
        BudgetExceededError: when the frame budget or valuation guard is exceeded
        ValueError: when ``f`` contains metavariables or the bound is out of range
    """
    limit: int = setting("exhaustive_states", exhaustive_states)
    _check_bound(max_states, limit)
    _guard(f, max_states, valuation_bits)
    plan = _plan(
        ScanMode.COUNTERMODEL,
        f,
        frozenset(props),
        range(1, max_states + 1),
        exhaustive_states=limit,
        sample_size=setting("sample_size", sample_size),
        seed=setting("seed", seed),
        frame_budget=setting("frame_budget", frame_budget),
    )
    if plan.sampled_sizes:
        logger.warning(
            "Sizes %s are sampled (seed %s); a valid verdict is not exhaustive there",
            ",".join(map(str, plan.sampled_sizes)),
            plan.seed,
        )
    logger.debug("Scanning %d candidate frames in %d chunks", plan.candidates, len(plan.tasks))
    runner = JobRunner(jobs, progress=progress, desc="frames", unit="chunk")
    results = runner.map(scan_chunk, plan.tasks, stop=lambda r: r.hit is not None)

    checked = 0
    for task, result in zip(plan.tasks, results, strict=False):
        if result.hit is None:
            checked += result.examined
            continue
        masks, valuation, state, position = result.hit
        frame = NeighborhoodFrame(default_labels(task.size), masks)
        model = NeighborhoodModel(frame, valuation)
        return SearchOutcome(
            (model, frame.states[state]), checked + position, plan.sampled_sizes, plan.seed
        )
    return SearchOutcome(None, checked, plan.sampled_sizes, plan.seed)


def find_countermodel(
    f: Formula,
    props: frozenset[Property] | set[Property] = frozenset(),
    max_states: int = 2,
    **options: Any,
) -> tuple[NeighborhoodModel, str] | None:
    """The canonical least falsifying pointed model, or ``None`` up to the bound."""
    return search_countermodel(f, frozenset(props), max_states, **options).witness


@dataclass(frozen=True, slots=True)
class DefinabilityReport:
    """Frames where validity of a formula and a frame property disagree."""

    formula: Formula
    prop: Property
    bound: int
    frames_checked: int
    violations: int
    first_violation: NeighborhoodFrame | None
    sampled_sizes: tuple[int, ...] = ()
    seed: int | None = None

    @property
    def defines(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "formula": render(self.formula),
            "property": self.prop.value,
            "bound": self.bound,
            "frames_checked": self.frames_checked,
            "violations": self.violations,
            "sampled_sizes": list(self.sampled_sizes),
        }
        if self.sampled_sizes:
            data["seed"] = self.seed
        if self.first_violation is not None:
            data["first_violation"] = self.first_violation.describe()
        return data


def check_definability(  # noqa: PLR0913
    formula: Formula,
    prop: Property,
    max_states: int = 3,
    *,
    exhaustive_states: int | None = None,
    sample_size: int | None = None,
    seed: int | None = None,
    jobs: int | None = None,
    frame_budget: int | None = None,
    valuation_bits: int | None = None,
    progress: bool = True,
) -> DefinabilityReport:
    """Compare ``frame_valid(formula)`` with ``has_property(prop)`` on every frame in scope.

    Sizes above ``exhaustive_states`` are sampled with ``sample_size`` draws
    (``definability_samples`` by default).
    """
    limit: int = setting("exhaustive_states", exhaustive_states)
    _check_bound(max_states, limit)
    _guard(formula, max_states, valuation_bits)
    plan = _plan(
        ScanMode.DEFINABILITY,
        formula,
        frozenset(),
        range(1, max_states + 1),
        exhaustive_states=limit,
        sample_size=setting("definability_samples", sample_size),
        seed=setting("seed", seed),
        frame_budget=setting("frame_budget", frame_budget),
        target=prop,
    )
    runner = JobRunner(jobs, progress=progress, desc=f"definability {prop.label}", unit="chunk")
    results = runner.map(scan_chunk, plan.tasks)

    first: NeighborhoodFrame | None = None
    for task, result in zip(plan.tasks, results, strict=True):
        if first is None and result.first_violation is not None:
            first = NeighborhoodFrame(default_labels(task.size), result.first_violation)
    report = DefinabilityReport(
        formula=formula,
        prop=prop,
        bound=max_states,
        frames_checked=sum(r.examined for r in results),
        violations=sum(r.violations for r in results),
        first_violation=first,
        sampled_sizes=plan.sampled_sizes,
        seed=plan.seed,
    )
    logger.info(
        "%s vs %s: %d frames, %d disagreements",
        render(formula),
        prop.label,
        report.frames_checked,
        report.violations,
    )
    return report


# --------------------------------------------------------------------------
# Distinguishability
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True, order=True)
class DefinablePair:
    """Truth sets of one formula in two models."""

    left: StateSet
    right: StateSet


@dataclass(frozen=True, slots=True)
class Witness:
    """A separating formula together with the pairs its subformulas define."""

    formula: Formula
    trace: tuple[tuple[Formula, DefinablePair], ...] = field(default=())

    def __str__(self) -> str:
        return render(self.formula)


def _images(
    mod: Modality, size: int, masks: Sequence[int], x: StateSet
) -> StateSet:
    match mod:
        case Modality.NABLA:
            return nabla_image(size, masks, x)
        case Modality.BULLET:
            return bullet_image(size, masks, x)
        case Modality.BOX:
            return box_image(size, masks, x)


_CONSTRUCTOR: Final[dict[Modality, type[Nabla] | type[Bullet] | type[Box]]] = {
    Modality.NABLA: Nabla,
    Modality.BULLET: Bullet,
    Modality.BOX: Box,
}


def _default_vocab(m: NeighborhoodModel, m2: NeighborhoodModel) -> list[str]:
    return sorted({a for a, x in m.valuation if x} | {a for a, x in m2.valuation if x})


def _fixpoint(
    m: NeighborhoodModel,
    m2: NeighborhoodModel,
    frag: Fragment,
    vocab: Iterable[str],
    separates: tuple[int, int] | None = None,
) -> tuple[dict[DefinablePair, Formula], Formula | None]:
    """Breadth-first closure of the definable pairs; stops at the first separating pair."""
    size, size2 = m.size, m2.size
    full, full2 = m.frame.full, m2.frame.full
    masks, masks2 = m.frame.masks, m2.frame.masks
    value, value2 = m.valuation_map(), m2.valuation_map()
    pool: dict[DefinablePair, Formula] = {}
    processed: list[tuple[DefinablePair, Formula]] = []
    queue: deque[tuple[DefinablePair, Formula]] = deque()

    def add(pair: DefinablePair, f: Formula) -> Formula | None:
        if pair in pool:
            return None
        pool[pair] = f
        queue.append((pair, f))
        if separates is not None:
            s, s2 = separates
            if ((pair.left >> s) & 1) != ((pair.right >> s2) & 1):
                return f
        return None

    seeds: list[tuple[DefinablePair, Formula]] = [
        (DefinablePair(value.get(a, 0), value2.get(a, 0)), Atom(a)) for a in sorted(set(vocab))
    ]
    seeds += [(DefinablePair(0, 0), Bot()), (DefinablePair(full, full2), Top())]
    for pair, f in seeds:
        if (hit := add(pair, f)) is not None:
            return pool, hit

    while queue:
        pair, f = queue.popleft()
        processed.append((pair, f))
        successors: list[tuple[DefinablePair, Formula]] = [
            (DefinablePair(full ^ pair.left, full2 ^ pair.right), Not(f))
        ]
        for mod in frag.ordered():
            successors.append(
                (
                    DefinablePair(
                        _images(mod, size, masks, pair.left),
                        _images(mod, size2, masks2, pair.right),
                    ),
                    _CONSTRUCTOR[mod](f),
                )
            )
        for other, g in processed:
            successors.append(
                (DefinablePair(other.left & pair.left, other.right & pair.right), And(g, f))
            )
        for succ, g in successors:
            if (hit := add(succ, g)) is not None:
                return pool, hit
    logger.debug("Definable-pair closure reached %d pairs", len(pool))
    return pool, None


def _trace(
    f: Formula, m: NeighborhoodModel, m2: NeighborhoodModel
) -> tuple[tuple[Formula, DefinablePair], ...]:
    return tuple(
        (g, DefinablePair(truth_set(m, g), truth_set(m2, g))) for g in subformulas(f)
    )


def distinguishable(  # noqa: PLR0913
    m: NeighborhoodModel,
    s: str,
    m2: NeighborhoodModel,
    s2: str,
    frag: Fragment,
    vocab: Iterable[str] | None = None,
) -> Witness | None:
    """A formula of ``frag`` over ``vocab`` true at exactly one of ``(m, s)`` and ``(m2, s2)``.

    The search closes the pairs of truth sets under complement, intersection and
    the images of the fragment's modalities, so ``None`` means no formula of the
    fragment over ``vocab`` separates the two points.

    Raises:
        ValueError: if either state is unknown
    """
    index, index2 = m.frame.index(s), m2.frame.index(s2)
    names = _default_vocab(m, m2) if vocab is None else list(vocab)
    _, hit = _fixpoint(m, m2, frag, names, (index, index2))
    if hit is None:
        return None
    witness = Witness(hit, _trace(hit, m, m2))
    logger.debug("%s separates %s and %s in %s", witness, s, s2, frag)
    return witness


def definable_pool(
    m: NeighborhoodModel,
    m2: NeighborhoodModel,
    frag: Fragment,
    vocab: Iterable[str] | None = None,
) -> dict[DefinablePair, Formula]:
    """Every pair of truth sets definable in ``frag`` over ``vocab``, with a defining formula."""
    names = _default_vocab(m, m2) if vocab is None else list(vocab)
    pool, _ = _fixpoint(m, m2, frag, names)
    return pool


# --------------------------------------------------------------------------
# Bullet morphisms
# --------------------------------------------------------------------------


def check_bullet_morphism(
    m: NeighborhoodModel, m2: NeighborhoodModel, mapping: Mapping[str, str]
) -> bool:
    """Check that ``mapping`` is a morphism for the ignorance-of-fact modality.

    Raises:
        ValueError: if ``mapping`` is not total on ``m`` or names unknown states
    """
    missing = set(m.states) - set(mapping)
    if missing:
        raise ValueError(f"Mapping is not total; missing {', '.join(sorted(missing))}")
    unknown = set(mapping) - set(m.states)
    if unknown:
        raise ValueError(f"Unknown source state(s): {', '.join(sorted(unknown))}")
    image = [m2.frame.index(mapping[label]) for label in m.states]

    value, value2 = m.valuation_map(), m2.valuation_map()
    for atom in sorted(set(value) | set(value2)):
        x, x2 = value.get(atom, 0), value2.get(atom, 0)
        for i, j in enumerate(image):
            if ((x >> i) & 1) != ((x2 >> j) & 1):
                logger.debug("Atom %s breaks the morphism at %s", atom, m.states[i])
                return False

    masks, masks2 = m.frame.masks, m2.frame.masks
    for x2 in range(1 << m2.size):
        pre = 0
        for i, j in enumerate(image):
            if (x2 >> j) & 1:
                pre |= 1 << i
        for i, j in enumerate(image):
            here = (pre >> i) & 1 == 1 and (masks[i] >> pre) & 1 == 0
            there = (x2 >> j) & 1 == 1 and (masks2[j] >> x2) & 1 == 0
            if here != there:
                logger.debug(
                    "Set %s breaks the morphism at %s",
                    m2.frame.format_set(x2),
                    m.states[i],
                )
                return False
    return True


# --------------------------------------------------------------------------
# Frame correspondence
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class CorrespondenceResult:
    valuations_checked: int
    failure: tuple[NeighborhoodModel, str, NeighborhoodModel, str, Witness] | None = None

    @property
    def holds(self) -> bool:
        return self.failure is None


def _agrees(
    valuation: Mapping[str, StateSet],
    valuation2: Mapping[str, StateSet],
    pairs: Sequence[tuple[int, int]],
) -> bool:
    return all(
        ((valuation[a] >> i) & 1) == ((valuation2[a] >> j) & 1)
        for a in valuation
        for i, j in pairs
    )


def frames_indistinguishable(
    frame: NeighborhoodFrame,
    frame2: NeighborhoodFrame,
    correspondence: Sequence[tuple[str, str]],
    frag: Fragment,
    vocab: Sequence[str] = ("p",),
) -> CorrespondenceResult:
    """Check corresponded points agree on ``frag`` under every pair of matching valuations.

    For each valuation on ``frame`` and each valuation on ``frame2`` giving the
    atoms the same value at every corresponded pair, no formula of ``frag`` over
    ``vocab`` may separate any corresponded pair. The check is bounded by
    ``vocab``.
    """
    pairs = [(frame.index(a), frame2.index(b)) for a, b in correspondence]
    names = sorted(set(vocab))
    checked = 0
    for valuation in iter_valuations(names, frame.size):
        model = NeighborhoodModel.from_sets(frame, valuation)
        for valuation2 in iter_valuations(names, frame2.size):
            if not _agrees(valuation, valuation2, pairs):
                continue
            checked += 1
            model2 = NeighborhoodModel.from_sets(frame2, valuation2)
            for a, b in correspondence:
                witness = distinguishable(model, a, model2, b, frag, names)
                if witness is not None:
                    return CorrespondenceResult(checked, (model, a, model2, b, witness))
    return CorrespondenceResult(checked)


def separates(
    witness: Witness, m: NeighborhoodModel, s: str, m2: NeighborhoodModel, s2: str
) -> bool:
    """Re-check that ``witness`` has different truth values at the two points."""
    return satisfies(m, s, witness.formula) != satisfies(m2, s2, witness.formula)
