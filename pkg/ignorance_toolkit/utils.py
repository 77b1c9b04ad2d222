"""Bitset helpers for state sets and neighborhood membership masks.

A state set over ``n`` states is an ``int`` whose bit ``i`` marks state ``i``.
A neighborhood collection is an ``int`` over ``2**n`` bits whose bit ``X`` marks
membership of the state set ``X``.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator

__all__ = [
    "StateSet",
    "bits",
    "complement",
    "from_indices",
    "full_set",
    "lowest_index",
    "members",
]

type StateSet = int


def full_set(size: int) -> StateSet:
    """Return the state set containing all ``size`` states."""
    return (1 << size) - 1


def complement(x: StateSet, size: int) -> StateSet:
    return full_set(size) ^ x


def bits(x: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``x`` in increasing order."""
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def lowest_index(x: int) -> int:
    """Index of the lowest set bit; ``x`` must be nonzero."""
    return (x & -x).bit_length() - 1


def from_indices(indices: Iterable[int]) -> StateSet:
    result = 0
    for index in indices:
        result |= 1 << index
    return result


def members(collection: int) -> Iterator[StateSet]:
    """Yield the state sets recorded in a membership mask, smallest bitmask first."""
    return bits(collection)
