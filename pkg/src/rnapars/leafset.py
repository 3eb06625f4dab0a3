"""Descendant and internal leafsets, and the conflicts between them."""

from __future__ import annotations

from collections.abc import Iterable
from itertools import combinations

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

Gap = tuple[int, int]


class ConflictError(ValueError):
    """Error raised when leafsets cannot coexist in one RNA tree."""


class PartitionError(ValueError):
    """Error raised when sets do not form a structural partition."""


class LeafInterval(BaseModel):
    """A descendant leafset: the interval ``[lo, hi]`` of at least two leaves."""

    model_config = ConfigDict(frozen=True)

    lo: int
    hi: int

    @model_validator(mode="after")
    def check_bounds(self) -> LeafInterval:
        if self.lo >= self.hi:
            raise ValueError(f"empty or singleton interval [{self.lo}, {self.hi}]")

        return self

    def __str__(self) -> str:
        return f"[{self.lo},{self.hi}]"

    @property
    def key(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def contains(self, other: LeafInterval) -> bool:
        """Return True if ``other`` lies within this interval."""
        return self.lo <= other.lo and other.hi <= self.hi

    @classmethod
    def of(cls, key: tuple[int, int]) -> LeafInterval:
        return cls(lo=key[0], hi=key[1])


class InternalLeafset(BaseModel):
    """The sorted leaf children of one internal node."""

    model_config = ConfigDict(frozen=True)

    members: tuple[int, ...]

    @field_validator("members")
    @classmethod
    def check_members(cls, members: tuple[int, ...]) -> tuple[int, ...]:
        if len(members) < 2:
            raise ValueError("an internal leafset holds at least two leaves")

        if any(a >= b for a, b in zip(members, members[1:])):
            raise ValueError(f"members {members} are not strictly increasing")

        return members

    def __str__(self) -> str:
        return "{" + ",".join(str(member) for member in self.members) + "}"

    @property
    def lo(self) -> int:
        return self.members[0]

    @property
    def hi(self) -> int:
        return self.members[-1]

    @property
    def gaps(self) -> list[Gap]:
        return gaps(self.members)

    @classmethod
    def of(cls, members: Iterable[int]) -> InternalLeafset:
        return cls(members=tuple(sorted(members)))


def dl_conflict(x: LeafInterval, y: LeafInterval) -> bool:
    """Return True if two intervals overlap without one containing the other."""
    overlap = x.lo <= y.hi and y.lo <= x.hi

    return overlap and not (x.contains(y) or y.contains(x))


def dl_incompatible(x: LeafInterval, y: LeafInterval) -> bool:
    """
    Return True if no RNA tree can display both intervals.

    Besides conflicts, two distinct intervals sharing an endpoint are
    incompatible because every leaf closes at most one internal node.
    """
    if x == y:
        return False

    shared = {x.lo, x.hi} & {y.lo, y.hi}

    return bool(shared) or dl_conflict(x, y)


def il_conflict(x: InternalLeafset, y: InternalLeafset) -> bool:
    """Return True if two internal leafsets intersect or interleave."""
    if set(x.members) & set(y.members):
        return True

    # Disjoint sets interleave exactly when their merged order alternates
    # between the two origins at least four times.
    merged = sorted([(member, 0) for member in x.members] + [(m, 1) for m in y.members])
    runs = 1 + sum(1 for a, b in zip(merged, merged[1:]) if a[1] != b[1])

    return runs >= 4


def gaps(members: tuple[int, ...]) -> list[Gap]:
    """
    Return the maximal runs of leaves strictly between consecutive members.

    Runs are inclusive ``(lo, hi)`` bounds, ordered left to right. A run may be
    a single leaf, so plain tuples stand in for LeafInterval here.
    """
    return [(a + 1, b - 1) for a, b in zip(members, members[1:]) if b - a > 1]


def il_nested_in(outer: InternalLeafset, inner: InternalLeafset) -> bool:
    """Return True if every member of ``inner`` sits in a single gap of ``outer``."""
    return any(lo <= inner.lo and inner.hi <= hi for lo, hi in outer.gaps)


def check_partition(sets: Iterable[InternalLeafset]) -> tuple[int, int]:
    """
    Confirm that ``sets`` structurally partition a leaf interval.

    Return the interval bounds. Raise PartitionError when sets overlap, leave
    a leaf out, or conflict with each other.
    """
    collected = list(sets)

    if not collected:
        raise PartitionError("a structural partition needs at least one set")

    seen: set[int] = set()

    for leafset in collected:
        overlap = seen.intersection(leafset.members)

        if overlap:
            raise PartitionError(f"leaf {min(overlap)} appears in more than one set")

        seen.update(leafset.members)

    lo, hi = min(seen), max(seen)
    missing = set(range(lo, hi + 1)) - seen

    if missing:
        raise PartitionError(f"leaf {min(missing)} is not covered")

    for x, y in combinations(collected, 2):
        if il_conflict(x, y):
            raise PartitionError(f"sets {x} and {y} interleave")

    return lo, hi


class StructuralPartition(BaseModel):
    """A partition of a leaf interval into non-conflicting internal leafsets."""

    model_config = ConfigDict(frozen=True)

    sets: tuple[InternalLeafset, ...]

    @model_validator(mode="after")
    def check_sets(self) -> StructuralPartition:
        check_partition(self.sets)

        return self

    @property
    def lo(self) -> int:
        return min(leafset.lo for leafset in self.sets)

    @property
    def hi(self) -> int:
        return max(leafset.hi for leafset in self.sets)

    @property
    def keys(self) -> frozenset[tuple[int, ...]]:
        return frozenset(leafset.members for leafset in self.sets)

    def __len__(self) -> int:
        return len(self.sets)

    @classmethod
    def of(cls, sets: Iterable[Iterable[int]]) -> StructuralPartition:
        """Return a partition built from plain collections of leaves."""
        leafsets = [InternalLeafset.of(members) for members in sets]

        return cls(sets=tuple(sorted(leafsets, key=lambda leafset: leafset.members)))
