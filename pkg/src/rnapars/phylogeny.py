"""Phylogenies and assignments of RNA trees to their nodes."""

from __future__ import annotations

from collections.abc import Mapping
from functools import cached_property

from pydantic import BaseModel, ConfigDict, model_validator

from .distances import Metric, tree_distance
from .tree import RnaTree


class PhylogenyError(ValueError):
    """Error raised when node links do not form a rooted tree."""


class MissingAssignmentError(ValueError):
    """Error raised when a phylogeny node has no RNA tree."""


class LeafMismatchError(ValueError):
    """Error raised when leaf ids and input structure ids disagree."""


class Phylogeny(BaseModel):
    """
    A rooted tree of arbitrary out-degree.

    ``children`` lists the ordered children of every internal node. Nodes
    that never appear as a key are leaves, whose ids are the labels of the
    input structures.
    """

    model_config = ConfigDict(frozen=True)

    root: str
    children: dict[str, tuple[str, ...]] = {}

    @model_validator(mode="after")
    def check_shape(self) -> Phylogeny:
        seen = {self.root}
        pending = [self.root]

        while pending:
            node = pending.pop()

            for child in self.children.get(node, ()):
                if child in seen:
                    raise PhylogenyError(f"node {child!r} is reached twice")

                seen.add(child)
                pending.append(child)

        unreachable = set(self.children) - seen

        if unreachable:
            raise PhylogenyError(f"nodes {sorted(unreachable)} are not below the root")

        if any(not kids for kids in self.children.values()):
            raise PhylogenyError("internal nodes need at least one child")

        return self

    def child_nodes(self, node: str) -> tuple[str, ...]:
        return self.children.get(node, ())

    def is_leaf(self, node: str) -> bool:
        return node not in self.children

    @cached_property
    def preorder(self) -> list[str]:
        order = []
        pending = [self.root]

        while pending:
            node = pending.pop()
            order.append(node)
            pending.extend(reversed(self.child_nodes(node)))

        return order

    @cached_property
    def postorder(self) -> list[str]:
        """Return nodes with every child listed before its parent."""
        order = []
        pending: list[tuple[str, bool]] = [(self.root, False)]

        while pending:
            node, expanded = pending.pop()

            if expanded:
                order.append(node)
            else:
                pending.append((node, True))
                kids = reversed(self.child_nodes(node))
                pending.extend((child, False) for child in kids)

        return order

    @property
    def leaves(self) -> list[str]:
        return [node for node in self.preorder if self.is_leaf(node)]

    @property
    def internal_nodes(self) -> list[str]:
        return [node for node in self.preorder if not self.is_leaf(node)]

    @cached_property
    def parents(self) -> dict[str, str]:
        return {child: node for node, kids in self.children.items() for child in kids}

    def parent_of(self, node: str) -> str | None:
        return self.parents.get(node)

    @property
    def edges(self) -> list[tuple[str, str]]:
        """Return ``(parent, child)`` pairs in pre-order of the child."""
        return [
            (self.parents[node], node) for node in self.preorder if node != self.root
        ]

    def neighbors(self, node: str) -> list[str]:
        parent = self.parent_of(node)

        return list(self.child_nodes(node)) + ([parent] if parent is not None else [])

    @cached_property
    def depths(self) -> dict[str, int]:
        depths = {self.root: 0}

        for node in self.preorder:
            for child in self.child_nodes(node):
                depths[child] = depths[node] + 1

        return depths

    @cached_property
    def heights(self) -> dict[str, int]:
        """Return the longest distance from each node down to a leaf."""
        heights: dict[str, int] = {}

        for node in self.postorder:
            kids = self.child_nodes(node)
            heights[node] = 1 + max(heights[child] for child in kids) if kids else 0

        return heights


def check_leaf_trees(phylogeny: Phylogeny, leaf_trees: Mapping[str, RnaTree]) -> None:
    """Raise if leaf ids and tree ids differ, or the trees' leafsets differ."""
    leaves = set(phylogeny.leaves)
    missing = sorted(leaves - set(leaf_trees))
    extra = sorted(set(leaf_trees) - leaves)

    if missing or extra:
        raise LeafMismatchError(
            f"leaves without a structure: {missing}; structures without a leaf: {extra}"
        )

    roots = {leaf_trees[leaf].root for leaf in leaves}

    if len(roots) > 1:
        raise LeafMismatchError(f"leaf trees span different leafsets: {sorted(roots)}")


def sp_cost(
    phylogeny: Phylogeny, trees: Mapping[str, RnaTree] | Assignment, metric: Metric
) -> int:
    """Return the summed distance between the trees at both ends of every edge."""
    if isinstance(trees, Assignment):
        trees = trees.trees

    missing = [node for node in phylogeny.preorder if node not in trees]

    if missing:
        raise MissingAssignmentError(f"nodes without a tree: {missing}")

    return sum(
        tree_distance(metric, trees[parent], trees[child])
        for parent, child in phylogeny.edges
    )


class Assignment(BaseModel):
    """RNA trees for every phylogeny node, with their total edge cost."""

    model_config = ConfigDict(frozen=True)

    trees: dict[str, RnaTree]
    sp_cost: int
    metric: Metric
    trace: tuple[int, ...] = ()

    @classmethod
    def build(
        cls,
        phylogeny: Phylogeny,
        trees: Mapping[str, RnaTree],
        metric: Metric,
        trace: tuple[int, ...] = (),
    ) -> Assignment:
        """Return an Assignment with its cost computed over ``phylogeny``."""
        cost = sp_cost(phylogeny, trees, metric)

        return cls(trees=dict(trees), sp_cost=cost, metric=metric, trace=trace)

    def cost_per_edge(self, phylogeny: Phylogeny) -> float:
        edges = len(phylogeny.edges)

        return self.sp_cost / edges if edges else 0.0
