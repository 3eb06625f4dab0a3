"""RNA trees: ordered trees whose internal nodes are base pairs."""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable
from functools import cached_property
from typing import NamedTuple

from pydantic import BaseModel, ConfigDict, model_validator

from .const import logger
from .leafset import (
    ConflictError,
    InternalLeafset,
    LeafInterval,
    PartitionError,
    StructuralPartition,
)
from .structure import Pair, SecondaryStructure

Node = int | Pair
"""A leaf is its integer label; an internal node is its ``(i, j)`` pair."""


class LeafsetError(ValueError):
    """Error raised when a tree's leafset does not have the expected form."""


class _Layout(NamedTuple):
    """Child lists, internal leafsets and parents derived from a pair set."""

    children: dict[Pair, list[Node]]
    leafsets: dict[Pair, tuple[int, ...]]
    parents: dict[Pair, Pair]


class RnaTree(BaseModel):
    """
    An ordered rooted tree on the leafset ``[leaf_lo, leaf_hi]``.

    Each internal node is identified with the pair of its leftmost and
    rightmost children, which are distinct leaves. ``pairs`` holds every
    internal node, the root ``(leaf_lo, leaf_hi)`` included. Child lists and
    leafsets are derived on first use.
    """

    model_config = ConfigDict(frozen=True)

    leaf_lo: int
    leaf_hi: int
    pairs: frozenset[Pair]

    @model_validator(mode="after")
    def check_pairs(self) -> RnaTree:
        if self.leaf_lo >= self.leaf_hi:
            raise LeafsetError(f"leafset [{self.leaf_lo}, {self.leaf_hi}] is too small")

        if self.root not in self.pairs:
            raise LeafsetError(f"root {self.root} missing from internal nodes")

        closing: dict[int, int] = {}

        for i, j in self.pairs:
            if not self.leaf_lo <= i < j <= self.leaf_hi:
                raise ValueError(f"node {(i, j)} outside the leafset")

            if i in closing or j in closing:
                raise ConflictError(f"node {(i, j)} shares an endpoint leaf")

            closing[i] = j
            closing[j] = i

        opened: list[int] = []

        for leaf in sorted(closing):
            if closing[leaf] > leaf:
                opened.append(leaf)
            elif opened.pop() != closing[leaf]:
                raise ConflictError(f"node closing at {leaf} crosses another node")

        return self

    @property
    def root(self) -> Pair:
        return (self.leaf_lo, self.leaf_hi)

    @property
    def leafset(self) -> LeafInterval:
        return LeafInterval(lo=self.leaf_lo, hi=self.leaf_hi)

    @property
    def n(self) -> int:
        """Return the number of leaves between the two outermost leaves."""
        return self.leaf_hi - self.leaf_lo - 1

    @property
    def base_pairs(self) -> frozenset[Pair]:
        return self.pairs - {self.root}

    @property
    def num_base_pairs(self) -> int:
        return len(self.pairs) - 1

    @cached_property
    def layout(self) -> _Layout:
        children: dict[Pair, list[Node]] = {pair: [] for pair in self.pairs}
        leafsets: dict[Pair, list[int]] = {pair: [] for pair in self.pairs}
        parents: dict[Pair, Pair] = {}
        opener = {i: (i, j) for i, j in self.pairs}
        closer = {j: (i, j) for i, j in self.pairs}
        stack: list[Pair] = []

        for leaf in range(self.leaf_lo, self.leaf_hi + 1):
            if leaf in opener:
                node = opener[leaf]

                if stack:
                    parents[node] = stack[-1]
                    children[stack[-1]].append(node)

                stack.append(node)
            else:
                node = stack[-1]

            children[node].append(leaf)
            leafsets[node].append(leaf)

            if leaf in closer:
                stack.pop()

        return _Layout(
            children=children,
            leafsets={pair: tuple(members) for pair, members in leafsets.items()},
            parents=parents,
        )

    @cached_property
    def il_keys(self) -> frozenset[tuple[int, ...]]:
        """Return the members of every internal leafset."""
        return frozenset(self.layout.leafsets.values())

    @cached_property
    def internal_nodes(self) -> list[Pair]:
        """Return internal nodes in post-order."""
        return sorted(self.pairs, key=lambda pair: pair[1])

    def children(self, node: Pair) -> list[Node]:
        return self.layout.children[node]

    def arc_children(self, node: Pair) -> list[Pair]:
        """Return the internal children of ``node`` from left to right."""
        return [child for child in self.children(node) if isinstance(child, tuple)]

    def parent_of(self, node: Pair) -> Pair | None:
        return self.layout.parents.get(node)

    def internal_leafset(self, node: Pair) -> InternalLeafset:
        return InternalLeafset(members=self.layout.leafsets[node])

    def descendant_leafset(self, node: Pair) -> LeafInterval:
        return LeafInterval.of(node)

    def postorder(self) -> list[Pair]:
        return list(self.internal_nodes)

    def to_dotbracket(self) -> str:
        return to_structure(self).dotbracket


def is_ancestor(x: Pair, y: Pair) -> bool:
    """Return True if internal node ``x`` is a proper ancestor of ``y``."""
    return x[0] < y[0] and y[1] < x[1]


def precedes_in_postorder(x: Pair, y: Pair) -> bool:
    """Return True if ``x`` is visited before ``y`` in post-order."""
    return x[1] < y[1]


def root_only(leaf_lo: int, leaf_hi: int) -> RnaTree:
    """Return the tree whose root is the only internal node."""
    root = (leaf_lo, leaf_hi)

    return RnaTree(leaf_lo=leaf_lo, leaf_hi=leaf_hi, pairs=frozenset({root}))


def to_tree(structure: SecondaryStructure) -> RnaTree:
    """Return the RNA tree on ``[0, n+1]`` of a secondary structure."""
    leaf_hi = structure.length + 1

    return RnaTree(leaf_lo=0, leaf_hi=leaf_hi, pairs=structure.pairs | {(0, leaf_hi)})


def to_structure(tree: RnaTree) -> SecondaryStructure:
    """Return the secondary structure encoded by a tree on ``[0, n+1]``."""
    if tree.leaf_lo != 0:
        raise LeafsetError(f"leafset starts at {tree.leaf_lo}, expected 0")

    return SecondaryStructure(length=tree.n, pairs=tree.base_pairs)


def descendant_leafsets(tree: RnaTree) -> frozenset[LeafInterval]:
    return frozenset(LeafInterval.of(pair) for pair in tree.pairs)


def internal_leafsets(tree: RnaTree) -> StructuralPartition:
    return StructuralPartition.of(tree.il_keys)


def tree_from_dls(
    dls: Iterable[LeafInterval | Pair], leafset: LeafInterval | Pair
) -> RnaTree:
    """
    Return the RNA tree displaying exactly the given descendant leafsets.

    Raise ConflictError if two intervals conflict or share an endpoint, and
    LeafsetError if the whole leafset is not among them.
    """
    keys = {dl.key if isinstance(dl, LeafInterval) else dl for dl in dls}
    root = leafset.key if isinstance(leafset, LeafInterval) else leafset

    if root not in keys:
        raise LeafsetError(f"leafset {list(root)} is not among the intervals")

    stack: list[Pair] = []

    for lo, hi in sorted(keys, key=lambda key: (key[0], -key[1])):
        while stack and stack[-1][1] < lo:
            stack.pop()

        if stack and stack[-1][1] < hi:
            raise ConflictError(f"intervals {list(stack[-1])} and {[lo, hi]} conflict")

        stack.append((lo, hi))

    endpoints = Counter(leaf for key in keys for leaf in key)
    shared = sorted(leaf for leaf, count in endpoints.items() if count > 1)

    if shared:
        raise ConflictError(f"leaf {shared[0]} ends more than one interval")

    return RnaTree(leaf_lo=root[0], leaf_hi=root[1], pairs=frozenset(keys))


def tree_from_ils(
    partition: StructuralPartition | Iterable[Iterable[int]],
) -> RnaTree:
    """
    Return the unique RNA tree whose internal leafsets form ``partition``.

    Each set becomes the internal node spanning its smallest and largest
    member; nesting follows from the sets sitting inside each other's gaps.
    """
    if not isinstance(partition, StructuralPartition):
        partition = StructuralPartition.of(partition)

    lo, hi = partition.lo, partition.hi
    pairs = frozenset((leafset.lo, leafset.hi) for leafset in partition.sets)

    if (lo, hi) not in pairs:
        raise PartitionError(f"leaves {lo} and {hi} are in different sets")

    tree = RnaTree(leaf_lo=lo, leaf_hi=hi, pairs=pairs)

    if tree.il_keys != partition.keys:
        logger.error("Partition %s rebuilt as %s", partition.keys, tree.il_keys)
        raise PartitionError("sets do not describe a single RNA tree")

    return tree
