"""Finite neighborhood frames and models, neighborhood properties and supplementation.

Frames store, for every state, a membership mask over the powerset of states:
bit ``X`` of ``masks[i]`` is set iff the state set ``X`` is a neighborhood of
state ``i``. Frames are value types, so equality is structural and the field
order is the canonical enumeration order.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from enum import StrEnum
from typing import ClassVar, Final

from .formula import NAME_PATTERN
from .utils import StateSet, bits, complement, from_indices, full_set, members

__all__ = [
    "GLOBAL_PROPERTIES",
    "LOCAL_PROPERTIES",
    "NeighborhoodFrame",
    "NeighborhoodModel",
    "Property",
    "base_properties",
    "box_image",
    "bullet_image",
    "core",
    "default_labels",
    "has_property",
    "local_property_holds",
    "masks_have_properties",
    "nabla_image",
    "supplementation",
]

MAX_STATES: Final = 20


class Property(StrEnum):
    """Neighborhood conditions and the classes derived from them."""

    N = "n"
    R = "r"
    I = "i"  # noqa: E741
    S_SUP = "s"
    C = "c"
    D = "d"
    T = "t"
    B = "b"
    FOUR = "4"
    FIVE = "5"
    QUASI_FILTER = "quasi-filter"
    FILTER = "filter"
    MONOTONE = "monotone"

    @property
    def label(self) -> str:
        return f"({self.value})" if len(self.value) == 1 else self.value

    @property
    def components(self) -> frozenset[Property]:
        """The base conditions this property is the conjunction of."""
        return _COMPOSITES.get(self, frozenset({self}))

    @classmethod
    def parse_class(cls, text: str) -> frozenset[Property]:
        """Parse a comma-joined class description such as ``c,t`` or ``filter``.

        ``all`` (or an empty string) denotes the class of all frames.

        Raises:
            ValueError: on an unknown property name
        """
        names = [part.strip().lower() for part in text.split(",") if part.strip()]
        if names in ([], ["all"]):
            return frozenset()
        result: set[Property] = set()
        for name in names:
            try:
                result.add(cls(_PROPERTY_ALIASES.get(name, name)))
            except ValueError:
                known = ", ".join(p.value for p in cls)
                raise ValueError(f"Unknown property {name!r}; expected one of: {known}") from None
        return frozenset(result)


_COMPOSITES: Final[dict[Property, frozenset[Property]]] = {
    Property.QUASI_FILTER: frozenset({Property.I, Property.S_SUP}),
    Property.FILTER: frozenset({Property.I, Property.S_SUP, Property.N}),
    Property.MONOTONE: frozenset({Property.S_SUP}),
}

_PROPERTY_ALIASES: Final[dict[str, str]] = {
    "(n)": "n",
    "(r)": "r",
    "(i)": "i",
    "(s)": "s",
    "(c)": "c",
    "(d)": "d",
    "(t)": "t",
    "(b)": "b",
    "(4)": "4",
    "(5)": "5",
    "quasifilter": "quasi-filter",
    "quasi_filter": "quasi-filter",
    "four": "4",
    "five": "5",
}

LOCAL_PROPERTIES: Final[frozenset[Property]] = frozenset(
    {Property.N, Property.R, Property.I, Property.S_SUP, Property.C, Property.D, Property.T}
)
GLOBAL_PROPERTIES: Final[frozenset[Property]] = frozenset(
    {Property.B, Property.FOUR, Property.FIVE}
)


def base_properties(props: Iterable[Property]) -> frozenset[Property]:
    """Expand derived classes into base conditions."""
    result: set[Property] = set()
    for prop in props:
        result |= prop.components
    return frozenset(result)


# --------------------------------------------------------------------------
# Kernels over raw masks
# --------------------------------------------------------------------------


def _has(collection: int, x: StateSet) -> bool:
    return (collection >> x) & 1 == 1


def nabla_image(size: int, masks: Sequence[int], x: StateSet) -> StateSet:
    """States where neither ``x`` nor its complement is a neighborhood."""
    cx = complement(x, size)
    result = 0
    for i, mask in enumerate(masks):
        if not _has(mask, x) and not _has(mask, cx):
            result |= 1 << i
    return result


def bullet_image(size: int, masks: Sequence[int], x: StateSet) -> StateSet:
    """States inside ``x`` for which ``x`` is not a neighborhood."""
    result = 0
    for i in bits(x):
        if not _has(masks[i], x):
            result |= 1 << i
    return result


def box_image(size: int, masks: Sequence[int], x: StateSet) -> StateSet:
    """States for which ``x`` is a neighborhood."""
    result = 0
    for i, mask in enumerate(masks):
        if _has(mask, x):
            result |= 1 << i
    return result


def _core(size: int, mask: int) -> StateSet:
    result = full_set(size)
    for x in members(mask):
        result &= x
    return result


def local_property_holds(prop: Property, size: int, index: int, mask: int) -> bool:
    """Check a per-state condition on the neighborhood collection ``mask`` of state ``index``."""
    full = full_set(size)
    match prop:
        case Property.N:
            return _has(mask, full)
        case Property.R:
            # an empty collection satisfies (r) vacuously
            return mask == 0 or _has(mask, _core(size, mask))
        case Property.I:
            sets = list(members(mask))
            return all(_has(mask, x & y) for x in sets for y in sets)
        case Property.S_SUP:
            return all(_has(mask, x | (1 << j)) for x in members(mask) for j in range(size))
        case Property.C:
            return all(_has(mask, full ^ x) for x in members(mask))
        case Property.D:
            return not any(_has(mask, full ^ x) for x in members(mask))
        case Property.T:
            return all((x >> index) & 1 for x in members(mask))
    raise ValueError(f"{prop.label} is not a per-state condition")


def _global_property_holds(prop: Property, size: int, masks: Sequence[int]) -> bool:
    full = full_set(size)
    holders = [box_image(size, masks, x) for x in range(1 << size)]
    for s, mask in enumerate(masks):
        for x in range(1 << size):
            match prop:
                case Property.B:
                    if (x >> s) & 1 and not _has(mask, full ^ holders[full ^ x]):
                        return False
                case Property.FOUR:
                    if _has(mask, x) and not _has(mask, holders[x]):
                        return False
                case Property.FIVE:
                    if not _has(mask, x) and not _has(mask, full ^ holders[x]):
                        return False
                case _:
                    raise ValueError(f"{prop.label} is not a frame-wide condition")
    return True


def masks_have_properties(size: int, masks: Sequence[int], props: Iterable[Property]) -> bool:
    """True iff the raw frame ``masks`` satisfies every property in ``props``."""
    for prop in sorted(base_properties(props)):
        if prop in LOCAL_PROPERTIES:
            if not all(local_property_holds(prop, size, i, m) for i, m in enumerate(masks)):
                return False
        elif not _global_property_holds(prop, size, masks):
            return False
    return True


def _superset_closure(size: int, mask: int) -> int:
    full = full_set(size)
    result = 0
    for x in members(mask):
        free = full ^ x
        sub = free
        while True:
            result |= 1 << (x | sub)
            if sub == 0:
                break
            sub = (sub - 1) & free
    return result


def default_labels(n: int) -> tuple[str, ...]:
    """State labels used for enumerated frames: ``s, t, u, v`` then ``s0, s1, ...``."""
    if n <= 4:  # noqa: PLR2004
        return ("s", "t", "u", "v")[:n]
    return tuple(f"s{i}" for i in range(n))


# --------------------------------------------------------------------------
# Frames and models
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class NeighborhoodFrame:
    """A finite neighborhood frame ``(S, N)``."""

    states: tuple[str, ...]
    masks: tuple[int, ...]

    MAX_STATES: ClassVar[int] = MAX_STATES

    def __post_init__(self) -> None:
        n = len(self.states)
        if not 1 <= n <= MAX_STATES:
            raise ValueError(f"A frame needs between 1 and {MAX_STATES} states, got {n}")
        if len(set(self.states)) != n or not all(self.states):
            raise ValueError("State labels must be unique and non-empty")
        if len(self.masks) != n:
            raise ValueError("One neighborhood collection per state is required")
        limit = 1 << (1 << n)
        for label, mask in zip(self.states, self.masks, strict=True):
            if not 0 <= mask < limit:
                raise ValueError(f"Neighborhoods of {label!r} mention sets outside S")

    @classmethod
    def from_sets(
        cls, states: Sequence[str], neighborhoods: Mapping[str, Iterable[StateSet]]
    ) -> NeighborhoodFrame:
        """Build a frame from bitmask state sets; absent states get ``N = ∅``.

        Raises:
            ValueError: on unknown labels, out-of-range sets or duplicates
        """
        labels = tuple(states)
        unknown = set(neighborhoods) - set(labels)
        if unknown:
            raise ValueError(f"Unknown state(s): {', '.join(sorted(unknown))}")
        limit = 1 << len(labels)
        masks: list[int] = []
        for label in labels:
            mask = 0
            for x in neighborhoods.get(label, ()):
                if not 0 <= x < limit:
                    raise ValueError(f"Neighborhood of {label!r} is not a subset of S")
                if (mask >> x) & 1:
                    raise ValueError(f"Duplicate neighborhood in N({label})")
                mask |= 1 << x
            masks.append(mask)
        return cls(labels, tuple(masks))

    @classmethod
    def from_labels(
        cls, states: Sequence[str], neighborhoods: Mapping[str, Iterable[Iterable[str]]]
    ) -> NeighborhoodFrame:
        """Build a frame from neighborhoods written as lists of state labels."""
        index = {label: i for i, label in enumerate(states)}

        def to_set(labels: Iterable[str]) -> StateSet:
            result = 0
            for label in labels:
                if label not in index:
                    raise ValueError(f"Unknown state: {label!r}")
                if (result >> index[label]) & 1:
                    raise ValueError(f"Repeated state {label!r} in a neighborhood")
                result |= 1 << index[label]
            return result

        return cls.from_sets(
            states, {s: [to_set(x) for x in sets] for s, sets in neighborhoods.items()}
        )

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def full(self) -> StateSet:
        return full_set(self.size)

    def index(self, state: str) -> int:
        """Position of ``state``; raises ValueError for unknown labels."""
        try:
            return self.states.index(state)
        except ValueError:
            raise ValueError(f"Unknown state: {state!r}") from None

    def state_set(self, labels: Iterable[str]) -> StateSet:
        return from_indices(self.index(label) for label in labels)

    def labels(self, x: StateSet) -> tuple[str, ...]:
        return tuple(self.states[i] for i in bits(x))

    def neighborhood(self, state: str) -> tuple[StateSet, ...]:
        """Neighborhoods of ``state`` in canonical (bitmask) order."""
        return tuple(members(self.masks[self.index(state)]))

    def contains(self, state: str, x: StateSet) -> bool:
        return _has(self.masks[self.index(state)], x)

    def nabla_image(self, x: StateSet) -> StateSet:
        return nabla_image(self.size, self.masks, x)

    def bullet_image(self, x: StateSet) -> StateSet:
        return bullet_image(self.size, self.masks, x)

    def box_image(self, x: StateSet) -> StateSet:
        return box_image(self.size, self.masks, x)

    def has_property(self, prop: Property) -> bool:
        return masks_have_properties(self.size, self.masks, (prop,))

    def profile(self) -> dict[Property, bool]:
        """Every property mapped to whether the frame has it."""
        return {prop: self.has_property(prop) for prop in Property}

    def format_set(self, x: StateSet) -> str:
        return "{" + ",".join(self.labels(x)) + "}"

    def describe(self) -> str:
        parts = [f"S={self.format_set(self.full)}"]
        for i, label in enumerate(self.states):
            sets = ",".join(self.format_set(x) for x in members(self.masks[i]))
            parts.append(f"N({label})={{{sets}}}")
        return "; ".join(parts)


@dataclass(frozen=True, slots=True)
class NeighborhoodModel:
    """A frame plus a valuation; atoms missing from the valuation are false everywhere."""

    frame: NeighborhoodFrame
    valuation: tuple[tuple[str, StateSet], ...] = ()

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for name, x in self.valuation:
            if not NAME_PATTERN.fullmatch(name):
                raise ValueError(f"Invalid atom name: {name!r}")
            if name in seen:
                raise ValueError(f"Atom {name!r} valued twice")
            if not 0 <= x <= self.frame.full:
                raise ValueError(f"Valuation of {name!r} is not a subset of S")
            seen.add(name)
        object.__setattr__(self, "valuation", tuple(sorted(self.valuation)))

    @classmethod
    def from_sets(
        cls, frame: NeighborhoodFrame, valuation: Mapping[str, StateSet] | None = None
    ) -> NeighborhoodModel:
        return cls(frame, tuple((valuation or {}).items()))

    @classmethod
    def from_labels(
        cls, frame: NeighborhoodFrame, valuation: Mapping[str, Iterable[str]] | None = None
    ) -> NeighborhoodModel:
        items = (valuation or {}).items()
        return cls(frame, tuple((name, frame.state_set(labels)) for name, labels in items))

    def value(self, atom: str) -> StateSet:
        return dict(self.valuation).get(atom, 0)

    def valuation_map(self) -> dict[str, StateSet]:
        return dict(self.valuation)

    @property
    def states(self) -> tuple[str, ...]:
        return self.frame.states

    @property
    def size(self) -> int:
        return self.frame.size

    def describe(self) -> str:
        values = "; ".join(f"V({a})={self.frame.format_set(x)}" for a, x in self.valuation)
        return f"{self.frame.describe()}; {values}" if values else self.frame.describe()


def has_property(frame: NeighborhoodFrame, prop: Property) -> bool:
    """Decide whether ``frame`` satisfies the neighborhood condition ``prop``."""
    return frame.has_property(prop)


def supplementation(frame: NeighborhoodFrame) -> NeighborhoodFrame:
    """Close every neighborhood collection under supersets."""
    masks = tuple(_superset_closure(frame.size, mask) for mask in frame.masks)
    return NeighborhoodFrame(frame.states, masks)


def core(frame: NeighborhoodFrame, state: str) -> StateSet:
    """Intersection of the neighborhoods of ``state``; the empty intersection is S."""
    return _core(frame.size, frame.masks[frame.index(state)])
