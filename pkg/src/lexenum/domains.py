"""Backtrackable integer domains.

Every domain is kept as a bitmask over a shared value offset, so bit ``b`` of
a mask stands for the value ``offset + b``.  All mutations go through
:class:`Domains`, which records the previous mask on a :class:`Trail` so that
``undo(mark)`` restores the exact prior state.
"""
from __future__ import annotations

import enum
from typing import Iterable, Sequence


class Outcome(enum.Enum):
    REVISED = "revised"
    UNCHANGED = "unchanged"
    CONFLICT = "conflict"
    FIXPOINT = "fixpoint"


def mask_values(mask: int, offset: int = 0) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1 + offset)
        mask ^= low
    return out


def mask_of(values: Iterable[int], offset: int = 0) -> int:
    m = 0
    for v in values:
        if v < offset:
            raise ValueError(f"value {v} below domain offset {offset}")
        m |= 1 << (v - offset)
    return m


def interval_mask(lo: int, hi: int, offset: int = 0) -> int:
    if hi < lo:
        return 0
    return ((1 << (hi - lo + 1)) - 1) << (lo - offset)


class Trail:
    """Stack of ``(variable, previous mask)`` entries."""

    __slots__ = ("entries",)

    def __init__(self) -> None:
        self.entries: list[tuple[int, int]] = []

    def __len__(self) -> int:
        return len(self.entries)

    def record(self, var: int, old_mask: int) -> None:
        self.entries.append((var, old_mask))

    def mark(self) -> int:
        return len(self.entries)

    def pop_to(self, mark: int, masks: list[int]) -> None:
        entries = self.entries
        while len(entries) > mark:
            var, old = entries.pop()
            masks[var] = old

    def changed_since(self, mark: int) -> set[int]:
        return {var for var, _ in self.entries[mark:]}


class Domains:
    """Current domains of all variables of one search, plus their trail."""

    __slots__ = ("offset", "masks", "initial", "trail")

    def __init__(self, intervals: Sequence[tuple[int, int]], offset: int | None = None):
        if offset is None:
            offset = min((lo for lo, _ in intervals), default=0)
        self.offset = offset
        self.initial = [tuple(iv) for iv in intervals]
        self.masks = [interval_mask(lo, hi, offset) for lo, hi in intervals]
        self.trail = Trail()

    @classmethod
    def from_values(cls, value_sets: Sequence[Iterable[int]], offset: int | None = None) -> "Domains":
        sets = [sorted(set(vs)) for vs in value_sets]
        if offset is None:
            offset = min((s[0] for s in sets if s), default=0)
        intervals = [(s[0], s[-1]) if s else (offset, offset - 1) for s in sets]
        doms = cls(intervals, offset)
        doms.masks = [mask_of(s, offset) for s in sets]
        return doms

    def copy(self) -> "Domains":
        """Independent store with the same current masks and a fresh trail."""
        new = Domains.__new__(Domains)
        new.offset = self.offset
        new.initial = list(self.initial)
        new.masks = list(self.masks)
        new.trail = Trail()
        return new

    def __len__(self) -> int:
        return len(self.masks)

    def __repr__(self) -> str:
        return f"Domains({[self.values(i) for i in range(len(self))]})"

    def bit(self, value: int) -> int:
        return 1 << (value - self.offset)

    def values(self, var: int) -> list[int]:
        return mask_values(self.masks[var], self.offset)

    def snapshot(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(self.values(i)) for i in range(len(self)))

    def min(self, var: int) -> int:
        m = self.masks[var]
        if not m:
            raise ValueError(f"domain of variable {var} is empty")
        return (m & -m).bit_length() - 1 + self.offset

    def max(self, var: int) -> int:
        m = self.masks[var]
        if not m:
            raise ValueError(f"domain of variable {var} is empty")
        return m.bit_length() - 1 + self.offset

    def size(self, var: int) -> int:
        return bin(self.masks[var]).count("1")

    def is_empty(self, var: int) -> bool:
        return self.masks[var] == 0

    def is_singleton(self, var: int) -> bool:
        m = self.masks[var]
        return m != 0 and m & (m - 1) == 0

    def contains(self, var: int, value: int) -> bool:
        if value < self.offset:
            return False
        return (self.masks[var] >> (value - self.offset)) & 1 == 1

    # -- mutation ---------------------------------------------------------
    def set_mask(self, var: int, mask: int) -> bool:
        """Narrow ``var`` to ``mask`` (must be a subset).  Returns True on change."""
        masks = self.masks
        old = masks[var]
        if mask == old:
            return False
        self.trail.entries.append((var, old))
        masks[var] = mask
        return True

    def keep(self, var: int, allowed: int) -> bool:
        return self.set_mask(var, self.masks[var] & allowed)

    def remove(self, var: int, value: int) -> bool:
        if value < self.offset:
            return False
        old = self.masks[var]
        bit = 1 << (value - self.offset)
        if not old & bit:
            return False
        return self.set_mask(var, old & ~bit)

    def assign(self, var: int, value: int) -> bool:
        bit = 1 << (value - self.offset) if value >= self.offset else 0
        return self.set_mask(var, self.masks[var] & bit)

    def mark(self) -> int:
        return self.trail.mark()

    def undo(self, mark: int) -> None:
        self.trail.pop_to(mark, self.masks)
