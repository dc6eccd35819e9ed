"""Bitmask sets over conditional-attribute indices."""

from __future__ import annotations

from typing import Iterable, Iterator


class AttributeSet:
    """Immutable set of conditional-attribute indices backed by an int bitmask.

    ``size`` is the number of conditional attributes of the owning
    information system; only indices below it may be set. Python ints are
    unbounded, so capacity is not limited to 64 attributes.
    """

    __slots__ = ("_bits", "_size")

    def __init__(self, bits: int, size: int):
        if size < 0:
            raise ValueError("size must be non-negative")
        if bits < 0 or bits >> size:
            raise ValueError(f"bitmask {bits:#x} has bits outside 0..{size - 1}")
        self._bits = bits
        self._size = size

    @classmethod
    def from_indices(cls, indices: Iterable[int], size: int) -> AttributeSet:
        bits = 0
        for i in indices:
            i = int(i)
            if not 0 <= i < size:
                raise ValueError(f"attribute index {i} out of range 0..{size - 1}")
            bits |= 1 << i
        return cls(bits, size)

    @classmethod
    def full(cls, size: int) -> AttributeSet:
        return cls((1 << size) - 1, size)

    @classmethod
    def empty(cls, size: int) -> AttributeSet:
        return cls(0, size)

    @property
    def bits(self) -> int:
        return self._bits

    @property
    def size(self) -> int:
        return self._size

    def indices(self) -> list[int]:
        return list(self)

    def __iter__(self) -> Iterator[int]:
        b, i = self._bits, 0
        while b:
            if b & 1:
                yield i
            b >>= 1
            i += 1

    def __len__(self) -> int:
        return bin(self._bits).count("1")

    def __bool__(self) -> bool:
        return self._bits != 0

    def __contains__(self, index: object) -> bool:
        return isinstance(index, int) and 0 <= index < self._size and bool(self._bits >> index & 1)

    def _check(self, other: AttributeSet) -> None:
        if not isinstance(other, AttributeSet):
            raise TypeError(f"expected AttributeSet, got {type(other).__name__}")
        if other._size != self._size:
            raise ValueError(f"attribute sets over different universes ({self._size} vs {other._size})")

    def __or__(self, other: AttributeSet) -> AttributeSet:
        self._check(other)
        return AttributeSet(self._bits | other._bits, self._size)

    def __and__(self, other: AttributeSet) -> AttributeSet:
        self._check(other)
        return AttributeSet(self._bits & other._bits, self._size)

    def __sub__(self, other: AttributeSet) -> AttributeSet:
        self._check(other)
        return AttributeSet(self._bits & ~other._bits, self._size)

    def __xor__(self, other: AttributeSet) -> AttributeSet:
        self._check(other)
        return AttributeSet(self._bits ^ other._bits, self._size)

    def add(self, index: int) -> AttributeSet:
        return self | AttributeSet.from_indices([index], self._size)

    def remove(self, index: int) -> AttributeSet:
        return self - AttributeSet.from_indices([index], self._size)

    def issubset(self, other: AttributeSet) -> bool:
        self._check(other)
        return self._bits & ~other._bits == 0

    def __le__(self, other: AttributeSet) -> bool:
        return self.issubset(other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AttributeSet):
            return NotImplemented
        return self._bits == other._bits and self._size == other._size

    def __hash__(self) -> int:
        return hash((self._bits, self._size))

    def __repr__(self) -> str:
        return f"AttributeSet({self.indices()}, size={self._size})"
