"""Finite cell sets with bitmask storage.

A cell set is a subset of ``{0, ..., size - 1}``.  When a grid space is
attached, closure / interior / boundary use the box-touching topology of
that space; without one the topology is discrete and those operations are
the identity (every set is clopen).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional


def mask_of(cells: Iterable[int], size: int) -> int:
    m = 0
    for c in cells:
        if not 0 <= c < size:
            raise ValueError(f"cell index {c} out of range for {size} cells")
        m |= 1 << c
    return m


def iter_bits(mask: int) -> Iterator[int]:
    """Yield set bit positions in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class CellSet:
    size: int
    mask: int
    space: Optional[object] = field(default=None, compare=False)

    def __post_init__(self):
        if self.mask >> self.size:
            raise ValueError("mask has bits outside the cell range")

    @staticmethod
    def from_cells(size: int, cells: Iterable[int], space=None) -> "CellSet":
        return CellSet(size, mask_of(cells, size), space)

    @staticmethod
    def empty(size: int, space=None) -> "CellSet":
        return CellSet(size, 0, space)

    @staticmethod
    def full(size: int, space=None) -> "CellSet":
        return CellSet(size, (1 << size) - 1, space)

    def _wrap(self, mask: int) -> "CellSet":
        return CellSet(self.size, mask, self.space)

    @property
    def members(self) -> tuple:
        return tuple(iter_bits(self.mask))

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.mask)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __contains__(self, cell: int) -> bool:
        return bool(self.mask >> cell & 1)

    def __bool__(self) -> bool:
        return self.mask != 0

    def __or__(self, other: "CellSet") -> "CellSet":
        self._check(other)
        return self._wrap(self.mask | other.mask)

    def __and__(self, other: "CellSet") -> "CellSet":
        self._check(other)
        return self._wrap(self.mask & other.mask)

    def __sub__(self, other: "CellSet") -> "CellSet":
        self._check(other)
        return self._wrap(self.mask & ~other.mask)

    def __le__(self, other: "CellSet") -> bool:
        self._check(other)
        return self.mask & ~other.mask == 0

    def __lt__(self, other: "CellSet") -> bool:
        return self <= other and self.mask != other.mask

    def _check(self, other: "CellSet") -> None:
        if self.size != other.size:
            raise ValueError("cell sets live on different cell universes")

    def complement(self) -> "CellSet":
        return self._wrap(~self.mask & (1 << self.size) - 1)

    def closure(self) -> "CellSet":
        """Combinatorial closure: add every cell whose box touches the set."""
        if self.space is None:
            return self
        return self._wrap(self.space.closure_mask(self.mask))

    def interior(self) -> "CellSet":
        """Cells all of whose touching neighbours lie in the set."""
        if self.space is None:
            return self
        full = (1 << self.size) - 1
        return self._wrap(full & ~self.space.closure_mask(full & ~self.mask))

    def boundary(self) -> "CellSet":
        return self - self.interior()

    def closure_in(self, ambient: "CellSet") -> "CellSet":
        """Relative closure inside ``ambient``."""
        return self.closure() & ambient

    def interior_in(self, ambient: "CellSet") -> "CellSet":
        """Relative interior inside ``ambient``: members none of whose
        touching neighbours within the ambient set escape this set."""
        outside = ambient - self
        return self - self._wrap(outside.closure().mask)

    def compactly_inside(self, other: "CellSet") -> bool:
        """Closure contained in interior, the grid version of being well
        inside an open set."""
        return self.closure() <= other.interior()
