"""Vertex sets as Python integers (bit i set <=> vertex i present)."""
from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np


def from_iter(vertices: Iterable[int]) -> int:
    bits = 0
    for v in vertices:
        bits |= 1 << int(v)
    return bits


def from_mask(mask: np.ndarray) -> int:
    """Pack a boolean vector into an integer bitset."""
    packed = np.packbits(np.asarray(mask, dtype=bool), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def iter_bits(bits: int) -> Iterator[int]:
    """Yield set positions in increasing order."""
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


def to_list(bits: int) -> list[int]:
    return list(iter_bits(bits))


def lowest(bits: int) -> int:
    if not bits:
        raise ValueError("empty bitset")
    return (bits & -bits).bit_length() - 1


def count(bits: int) -> int:
    return bits.bit_count()
