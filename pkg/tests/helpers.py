"""Independent oracles and generators shared by the test modules.

The evaluator and property checker here work on frozensets of state labels and
transcribe the truth and property clauses directly, without the bitset kernels.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable

from hypothesis import strategies as st

from ignorance_toolkit.formula import (
    And,
    Atom,
    Bot,
    Box,
    Bullet,
    Formula,
    Iff,
    Imp,
    Nabla,
    Not,
    Or,
    Top,
)
from ignorance_toolkit.model import NeighborhoodFrame, NeighborhoodModel, Property

type Labels = frozenset[str]


def powerset(states: Iterable[str]) -> list[Labels]:
    items = list(states)
    return [
        frozenset(combo)
        for r in range(len(items) + 1)
        for combo in itertools.combinations(items, r)
    ]


def neighborhoods(frame: NeighborhoodFrame) -> dict[str, set[Labels]]:
    return {s: {frozenset(frame.labels(x)) for x in frame.neighborhood(s)} for s in frame.states}


def naive_truth(model: NeighborhoodModel, f: Formula) -> Labels:
    """Truth set by direct transcription of the truth clauses."""
    states = frozenset(model.states)
    nbhd = neighborhoods(model.frame)

    def ext(g: Formula) -> Labels:
        match g:
            case Atom(name):
                return frozenset(model.frame.labels(model.value(name)))
            case Top():
                return states
            case Bot():
                return frozenset()
            case Not(x):
                return states - ext(x)
            case And(a, b):
                return ext(a) & ext(b)
            case Or(a, b):
                return ext(a) | ext(b)
            case Imp(a, b):
                return (states - ext(a)) | ext(b)
            case Iff(a, b):
                ea, eb = ext(a), ext(b)
                return frozenset(s for s in states if (s in ea) == (s in eb))
            case Nabla(x):
                ex = ext(x)
                return frozenset(
                    s for s in states if ex not in nbhd[s] and states - ex not in nbhd[s]
                )
            case Bullet(x):
                ex = ext(x)
                return frozenset(s for s in states if s in ex and ex not in nbhd[s])
            case Box(x):
                ex = ext(x)
                return frozenset(s for s in states if ex in nbhd[s])
        raise AssertionError(f"unexpected node {g!r}")

    return ext(f)


def naive_has(frame: NeighborhoodFrame, prop: Property) -> bool:  # noqa: PLR0911, PLR0912
    """Neighborhood conditions written as plain quantifier loops."""
    states = frozenset(frame.states)
    subsets = powerset(frame.states)
    n = neighborhoods(frame)

    def holders(x: Labels) -> Labels:
        return frozenset(u for u in states if x in n[u])

    match prop:
        case Property.N:
            return all(states in n[s] for s in states)
        case Property.R:
            for s in states:
                if not n[s]:
                    continue
                core = states
                for x in n[s]:
                    core = core & x
                if core not in n[s]:
                    return False
            return True
        case Property.I:
            return all(x & y in n[s] for s in states for x in n[s] for y in n[s])
        case Property.S_SUP:
            return all(y in n[s] for s in states for x in n[s] for y in subsets if x <= y)
        case Property.C:
            return all(states - x in n[s] for s in states for x in n[s])
        case Property.D:
            return all(states - x not in n[s] for s in states for x in n[s])
        case Property.T:
            return all(s in x for s in states for x in n[s])
        case Property.B:
            return all(
                frozenset(u for u in states if states - x not in n[u]) in n[s]
                for s in states
                for x in subsets
                if s in x
            )
        case Property.FOUR:
            return all(holders(x) in n[s] for s in states for x in n[s])
        case Property.FIVE:
            return all(
                states - holders(x) in n[s] for s in states for x in subsets if x not in n[s]
            )
        case Property.QUASI_FILTER:
            return naive_has(frame, Property.I) and naive_has(frame, Property.S_SUP)
        case Property.FILTER:
            return naive_has(frame, Property.QUASI_FILTER) and naive_has(frame, Property.N)
        case Property.MONOTONE:
            return naive_has(frame, Property.S_SUP)
    raise AssertionError(prop)


def all_frames(size: int) -> list[NeighborhoodFrame]:
    labels = ("s", "t", "u")[:size]
    width = 1 << (1 << size)
    return [
        NeighborhoodFrame(labels, masks)
        for masks in itertools.product(range(width), repeat=size)
    ]


# --------------------------------------------------------------------------
# Hypothesis strategies
# --------------------------------------------------------------------------

ATOM_NAMES = ("p", "q", "r")


def formulas(
    names: tuple[str, ...] = ATOM_NAMES,
    *,
    max_leaves: int = 12,
    modal: tuple[type[Nabla] | type[Bullet] | type[Box], ...] = (Nabla, Bullet, Box),
) -> st.SearchStrategy[Formula]:
    """Primitive formulas over ``names`` (no abbreviation nodes)."""
    leaves = st.one_of(
        st.sampled_from(names).map(Atom),
        st.just(Top()),
        st.just(Bot()),
    )

    def extend(children: st.SearchStrategy[Formula]) -> st.SearchStrategy[Formula]:
        unary = [Not, *modal]
        return st.one_of(
            st.tuples(st.sampled_from(unary), children).map(lambda t: t[0](t[1])),
            st.tuples(st.sampled_from([And, Or, Imp, Iff]), children, children).map(
                lambda t: t[0](t[1], t[2])
            ),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


@st.composite
def frames(draw: st.DrawFn, max_states: int = 3) -> NeighborhoodFrame:
    size = draw(st.integers(min_value=1, max_value=max_states))
    width = 1 << (1 << size)
    masks = draw(st.lists(st.integers(0, width - 1), min_size=size, max_size=size))
    return NeighborhoodFrame(("s", "t", "u", "v")[:size], tuple(masks))


@st.composite
def models(
    draw: st.DrawFn, max_states: int = 3, names: tuple[str, ...] = ATOM_NAMES
) -> NeighborhoodModel:
    frame = draw(frames(max_states))
    values = draw(st.lists(st.integers(0, frame.full), min_size=len(names), max_size=len(names)))
    return NeighborhoodModel.from_sets(frame, dict(zip(names, values, strict=True)))
