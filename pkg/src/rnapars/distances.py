"""Distances between RNA trees and the constraints their medians may obey."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from enum import StrEnum
from itertools import combinations

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict

from .const import INFINITY, logger
from .structure import Pair, SecondaryStructure
from .tree import RnaTree, is_ancestor, precedes_in_postorder

CostFunction = Callable[[Pair, Pair], float]


class Metric(StrEnum):
    BP = "bp"
    RF = "rf"
    IL = "il"
    RE = "re"


class Constraint(StrEnum):
    NC = "nc"
    DLC = "dlc"
    ILC = "ilc"
    BPC = "bpc"


class LeafsetMismatchError(ValueError):
    """Error raised when comparing trees over different leafsets."""


class LengthMismatchError(ValueError):
    """Error raised when comparing structures of different lengths."""


def relaxed_cost(x: Pair, y: Pair) -> float:
    """Return the Manhattan distance between the endpoints of two pairs."""
    return abs(x[0] - y[0]) + abs(x[1] - y[1])


def exact_cost(x: Pair, y: Pair) -> float:
    """Allow mapping identical pairs only."""
    return 0.0 if x == y else INFINITY


class Mapping(BaseModel):
    """A set of matched internal nodes between two RNA trees."""

    model_config = ConfigDict(frozen=True)

    pairs: frozenset[tuple[Pair, Pair]] = frozenset()

    def __len__(self) -> int:
        return len(self.pairs)

    def is_valid(self, first: RnaTree, second: RnaTree) -> bool:
        """Return True for a partial bijection preserving order and nesting."""
        sources = [x for x, _ in self.pairs]
        targets = [y for _, y in self.pairs]

        if len(set(sources)) != len(sources) or len(set(targets)) != len(targets):
            return False

        if not (set(sources) <= first.pairs and set(targets) <= second.pairs):
            return False

        for (x1, x2), (y1, y2) in combinations(self.pairs, 2):
            if precedes_in_postorder(x1, y1) != precedes_in_postorder(x2, y2):
                return False

            if is_ancestor(x1, y1) != is_ancestor(x2, y2):
                return False

            if is_ancestor(y1, x1) != is_ancestor(y2, x2):
                return False

        return True

    def cost(self, first: RnaTree, second: RnaTree, cost: CostFunction) -> float:
        """Return the matched costs plus one per unmatched internal node."""
        matched = sum(cost(x, y) for x, y in self.pairs)

        return matched + len(first.pairs) + len(second.pairs) - 2 * len(self.pairs)


def check_leafsets(first: RnaTree, second: RnaTree) -> None:
    if first.root != second.root:
        raise LeafsetMismatchError(
            f"leafsets {list(first.root)} and {list(second.root)} differ"
        )


def bp_distance(first: SecondaryStructure, second: SecondaryStructure) -> int:
    """Return the number of base pairs found in exactly one structure."""
    if first.length != second.length:
        raise LengthMismatchError(f"lengths {first.length} and {second.length} differ")

    return len(first.pairs ^ second.pairs)


def rf_distance(first: RnaTree, second: RnaTree) -> int:
    """Return the number of descendant leafsets displayed by exactly one tree."""
    check_leafsets(first, second)

    return len(first.pairs ^ second.pairs)


def il_distance(first: RnaTree, second: RnaTree) -> int:
    """Return the number of internal leafsets displayed by exactly one tree."""
    check_leafsets(first, second)

    return len(first.il_keys ^ second.il_keys)


class _ArcTree:
    """
    Post-order view of an RNA tree's internal nodes.

    Holds the leftmost descendant and keyroots of every internal node, as
    the tree edit recurrence needs.
    """

    def __init__(self, tree: RnaTree) -> None:
        self.nodes = tree.internal_nodes
        index = {node: position for position, node in enumerate(self.nodes)}
        self.leftmost: list[int] = []

        for position, node in enumerate(self.nodes):
            arc_children = tree.arc_children(node)
            self.leftmost.append(
                self.leftmost[index[arc_children[0]]] if arc_children else position
            )

        keyroots = {lml: position for position, lml in enumerate(self.leftmost)}
        self.keyroots = sorted(keyroots.values())

    def __len__(self) -> int:
        return len(self.nodes)


class _TreeEdit:
    """Zhang-Shasha tree edit over two arc trees, with unit insert and delete."""

    def __init__(self, first: RnaTree, second: RnaTree, cost: CostFunction) -> None:
        self.first = _ArcTree(first)
        self.second = _ArcTree(second)
        self.cost = cost
        self.treedist = [[0.0] * len(self.second) for _ in range(len(self.first))]

        for i in self.first.keyroots:
            for j in self.second.keyroots:
                self.forest(i, j)

    @property
    def distance(self) -> float:
        return self.treedist[-1][-1]

    def spans_whole_trees(self, i: int, j: int, xa: int, yb: int) -> bool:
        """Return True if nodes xa and yb share the leftmost leaves of i and j."""
        return (
            self.first.leftmost[xa] == self.first.leftmost[i]
            and self.second.leftmost[yb] == self.second.leftmost[j]
        )

    def forest(self, i: int, j: int) -> list[list[float]]:
        """Fill and return the forest distance table of subtrees ``i`` and ``j``."""
        a, b = self.first, self.second
        ioff, joff = a.leftmost[i] - 1, b.leftmost[j] - 1
        rows, cols = i - ioff + 1, j - joff + 1
        table = [[0.0] * cols for _ in range(rows)]

        for x in range(1, rows):
            table[x][0] = float(x)

        for y in range(1, cols):
            table[0][y] = float(y)

        for x in range(1, rows):
            xa = x + ioff

            for y in range(1, cols):
                yb = y + joff
                delete = table[x - 1][y] + 1
                insert = table[x][y - 1] + 1

                if self.spans_whole_trees(i, j, xa, yb):
                    match = table[x - 1][y - 1] + self.cost(a.nodes[xa], b.nodes[yb])
                    table[x][y] = min(delete, insert, match)
                    self.treedist[xa][yb] = table[x][y]
                else:
                    p, q = a.leftmost[xa] - 1 - ioff, b.leftmost[yb] - 1 - joff
                    subtree = table[p][q] + self.treedist[xa][yb]
                    table[x][y] = min(delete, insert, subtree)

        return table

    def mapping(self) -> Mapping:
        """Walk back through recomputed forest tables to an optimal mapping."""
        a, b = self.first, self.second
        matched: set[tuple[Pair, Pair]] = set()
        pending = [(len(a) - 1, len(b) - 1)]

        while pending:
            i, j = pending.pop()
            table = self.forest(i, j)
            ioff, joff = a.leftmost[i] - 1, b.leftmost[j] - 1
            x, y = i - ioff, j - joff

            while x > 0 or y > 0:
                xa, yb = x + ioff, y + joff

                if x > 0 and y > 0:
                    if self.spans_whole_trees(i, j, xa, yb):
                        step = self.cost(a.nodes[xa], b.nodes[yb])

                        if table[x][y] == table[x - 1][y - 1] + step:
                            matched.add((a.nodes[xa], b.nodes[yb]))
                            x, y = x - 1, y - 1
                            continue
                    else:
                        p, q = a.leftmost[xa] - 1 - ioff, b.leftmost[yb] - 1 - joff

                        if table[x][y] == table[p][q] + self.treedist[xa][yb]:
                            pending.append((xa, yb))
                            x, y = p, q
                            continue

                if x > 0 and table[x][y] == table[x - 1][y] + 1:
                    x -= 1
                elif y > 0 and table[x][y] == table[x][y - 1] + 1:
                    y -= 1
                else:
                    logger.error("Forest table walk stuck at %s", (x, y))
                    raise RuntimeError("tree edit walk found no optimal step")

        return Mapping(pairs=frozenset(matched))


def te_distance(
    first: RnaTree, second: RnaTree, cost: CostFunction = relaxed_cost
) -> tuple[float, Mapping]:
    """
    Return the minimum cost of a valid mapping and one mapping achieving it.

    Unmatched internal nodes cost one each; matched nodes cost ``cost``.
    """
    check_leafsets(first, second)
    edit = _TreeEdit(first, second, cost)

    return edit.distance, edit.mapping()


def re_distance(first: RnaTree, second: RnaTree) -> int:
    """Return the tree edit distance under the endpoint Manhattan cost."""
    check_leafsets(first, second)

    return int(_TreeEdit(first, second, relaxed_cost).distance)


def tree_distance(metric: Metric, first: RnaTree, second: RnaTree) -> int:
    match metric:
        case Metric.BP | Metric.RF:
            return rf_distance(first, second)
        case Metric.IL:
            return il_distance(first, second)
        case Metric.RE:
            return re_distance(first, second)

    raise ValueError(f"unknown metric {metric}")


def distance_matrix(trees: Sequence[RnaTree], metric: Metric) -> npt.NDArray[np.int64]:
    """Return the symmetric matrix of pairwise distances."""
    matrix = np.zeros((len(trees), len(trees)), dtype=np.int64)

    for i, j in combinations(range(len(trees)), 2):
        matrix[i, j] = matrix[j, i] = tree_distance(metric, trees[i], trees[j])

    logger.debug("Computed %s distance matrix of size %s", metric, len(trees))

    return matrix


def is_dlc(tree: RnaTree, trees: Sequence[RnaTree]) -> bool:
    """Return True if every descendant leafset of ``tree`` is in some input."""
    return tree.pairs <= frozenset[Pair]().union(*(other.pairs for other in trees))


def is_ilc(tree: RnaTree, trees: Sequence[RnaTree]) -> bool:
    """Return True if every internal leafset of ``tree`` is in some input."""
    leafsets = frozenset[tuple[int, ...]]().union(*(other.il_keys for other in trees))

    return tree.il_keys <= leafsets


def is_bpc(tree: RnaTree, trees: Sequence[RnaTree]) -> bool:
    """Return True if every base pair of ``tree`` is in some input."""
    pairs = frozenset[Pair]().union(*(other.base_pairs for other in trees))

    return tree.base_pairs <= pairs


def satisfies(tree: RnaTree, trees: Sequence[RnaTree], constraint: Constraint) -> bool:
    match constraint:
        case Constraint.NC:
            return True
        case Constraint.DLC:
            return is_dlc(tree, trees)
        case Constraint.ILC:
            return is_ilc(tree, trees)
        case Constraint.BPC:
            return is_bpc(tree, trees)

    raise ValueError(f"unknown constraint {constraint}")
