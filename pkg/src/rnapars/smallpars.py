"""Small parsimony: RNA trees for the internal nodes of a phylogeny."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import numpy.typing as npt

from .const import DEFAULT_MAX_ROUNDS, logger
from .distances import Constraint, Metric, distance_matrix, tree_distance
from .median import UnsupportedProblemError, solve_median
from .phylogeny import Assignment, Phylogeny, check_leaf_trees
from .structure import Pair
from .tree import RnaTree, tree_from_dls

# Bottom-up set codes: {0}, {1} and {0, 1}.
ABSENT = 0
PRESENT = 1
EITHER = 2


class Solver(StrEnum):
    EXACT = "exact"
    MEDIAN_HEURISTIC = "median-heuristic"
    LEAF_RESTRICTED = "leaf-restricted"


class ParsimonyInvariantError(RuntimeError):
    """Error raised when incompatible intervals are selected together."""


@dataclass
class CharacterTable:
    """
    Per-node states of every descendant leafset seen at the leaves.

    Rows follow ``nodes``; columns follow ``characters``. ``bottom_up`` holds
    set codes (ABSENT, PRESENT, EITHER), ``final`` holds 0 or 1, and
    ``absent_children``/``present_children`` count children whose set is a
    singleton.
    """

    nodes: list[str]
    characters: list[Pair]
    bottom_up: npt.NDArray[np.int8]
    final: npt.NDArray[np.int8]
    absent_children: npt.NDArray[np.int64]
    present_children: npt.NDArray[np.int64]

    def changes(self, phylogeny: Phylogeny) -> npt.NDArray[np.int64]:
        """Return, per character, the number of edges where its final state flips."""
        row = {node: index for index, node in enumerate(self.nodes)}
        parents = [row[parent] for parent, _ in phylogeny.edges]
        children = [row[child] for _, child in phylogeny.edges]
        flips = self.final[parents] != self.final[children]

        return flips.sum(axis=0).astype(np.int64)


def incompatibility(characters: list[Pair]) -> npt.NDArray[np.bool_]:
    """Return which pairs of intervals no single RNA tree can display together."""
    bounds = np.array(characters, dtype=np.int64).reshape(-1, 2)
    lo, hi = bounds[:, 0], bounds[:, 1]
    overlap = (lo[:, None] <= hi[None, :]) & (lo[None, :] <= hi[:, None])
    contains = (lo[:, None] <= lo[None, :]) & (hi[None, :] <= hi[:, None])
    shared = (
        (lo[:, None] == lo[None, :])
        | (hi[:, None] == hi[None, :])
        | (lo[:, None] == hi[None, :])
        | (hi[:, None] == lo[None, :])
    )
    incompatible = (overlap & ~(contains | contains.T)) | shared
    np.fill_diagonal(incompatible, False)

    return incompatible


def character_table(
    phylogeny: Phylogeny, leaf_trees: Mapping[str, RnaTree]
) -> CharacterTable:
    """Return bottom-up sets and final states of every leaf interval."""
    check_leaf_trees(phylogeny, leaf_trees)
    characters = sorted({pair for tree in leaf_trees.values() for pair in tree.pairs})
    column = {pair: index for index, pair in enumerate(characters)}
    nodes = phylogeny.postorder
    row = {node: index for index, node in enumerate(nodes)}
    shape = (len(nodes), len(characters))
    bottom_up = np.zeros(shape, dtype=np.int8)
    absent = np.zeros(shape, dtype=np.int64)
    present = np.zeros(shape, dtype=np.int64)

    for node in nodes:
        kids = [row[child] for child in phylogeny.child_nodes(node)]

        if not kids:
            for pair in leaf_trees[node].pairs:
                bottom_up[row[node], column[pair]] = PRESENT
            continue

        absent[row[node]] = (bottom_up[kids] == ABSENT).sum(axis=0)
        present[row[node]] = (bottom_up[kids] == PRESENT).sum(axis=0)
        bottom_up[row[node]] = np.where(
            absent[row[node]] > present[row[node]],
            ABSENT,
            np.where(present[row[node]] > absent[row[node]], PRESENT, EITHER),
        )

    final = np.zeros(shape, dtype=np.int8)

    for node in reversed(nodes):
        states = bottom_up[row[node]]
        parent = phylogeny.parent_of(node)

        if parent is None:
            final[row[node]] = states == PRESENT
        else:
            final[row[node]] = np.where(states == EITHER, final[row[parent]], states)

    return CharacterTable(
        nodes=nodes,
        characters=characters,
        bottom_up=bottom_up,
        final=final,
        absent_children=absent,
        present_children=present,
    )


def check_selection_invariants(table: CharacterTable) -> None:
    """
    Confirm that no node selects two incompatible intervals.

    A singleton-present bottom-up set forces every incompatible interval to
    singleton-absent, and a final state of 1 forces incompatible intervals
    to 0.
    """
    incompatible = incompatibility(table.characters).astype(np.int64)
    forced = table.bottom_up == PRESENT
    not_absent = (table.bottom_up != ABSENT).astype(np.int64)

    if (forced & ((not_absent @ incompatible) > 0)).any():
        raise ParsimonyInvariantError(
            "a present interval left an incompatible one open"
        )

    selected = table.final == 1

    if (selected & ((selected.astype(np.int64) @ incompatible) > 0)).any():
        raise ParsimonyInvariantError("a node selects two incompatible intervals")


def rf_nc_sp(
    phylogeny: Phylogeny, leaf_trees: Mapping[str, RnaTree], check: bool = True
) -> Assignment:
    """
    Return an optimal RF assignment built from per-interval parsimony.

    The selection check compares every pair of intervals, so it grows
    quadratically; pass ``check=False`` to skip it on large inputs.
    """
    table = character_table(phylogeny, leaf_trees)

    if check:
        check_selection_invariants(table)

    leafset = next(iter(leaf_trees.values())).root
    trees = dict(leaf_trees)

    for row, node in enumerate(table.nodes):
        if phylogeny.is_leaf(node):
            continue

        selected = [table.characters[col] for col in np.flatnonzero(table.final[row])]
        trees[node] = tree_from_dls(selected, leafset)

    logger.debug(
        "RF parsimony over %s intervals and %s nodes",
        len(table.characters),
        len(table.nodes),
    )

    return Assignment.build(phylogeny, trees, Metric.RF)


def distinct_leaf_trees(
    phylogeny: Phylogeny, leaf_trees: Mapping[str, RnaTree]
) -> list[RnaTree]:
    """Return the distinct leaf trees in order of first appearance among leaves."""
    candidates: list[RnaTree] = []

    for leaf in phylogeny.leaves:
        if leaf_trees[leaf] not in candidates:
            candidates.append(leaf_trees[leaf])

    return candidates


def leaf_restricted_sp(
    phylogeny: Phylogeny, leaf_trees: Mapping[str, RnaTree], metric: Metric
) -> Assignment:
    """
    Return the best assignment that uses only trees found at the leaves.

    Each internal node takes one of the distinct leaf trees. Subtree costs
    per candidate are filled bottom-up with the pairwise distance matrix as
    transition cost, then states are chosen top-down. Ties go to the lowest
    candidate index.
    """
    check_leaf_trees(phylogeny, leaf_trees)
    candidates = distinct_leaf_trees(phylogeny, leaf_trees)
    index = {leaf: candidates.index(leaf_trees[leaf]) for leaf in phylogeny.leaves}
    transition = distance_matrix(candidates, metric).astype(np.float64)
    subtree: dict[str, npt.NDArray[np.float64]] = {}

    for node in phylogeny.postorder:
        if phylogeny.is_leaf(node):
            costs = np.full(len(candidates), np.inf)
            costs[index[node]] = 0.0
        else:
            costs = np.zeros(len(candidates))

            for child in phylogeny.child_nodes(node):
                costs += (transition + subtree[child][None, :]).min(axis=1)

        subtree[node] = costs

    chosen = {phylogeny.root: int(np.argmin(subtree[phylogeny.root]))}

    for node in phylogeny.preorder:
        for child in phylogeny.child_nodes(node):
            step = transition[chosen[node]] + subtree[child]
            chosen[child] = int(np.argmin(step))

    trees = {node: candidates[state] for node, state in chosen.items()}
    logger.debug("Leaf-restricted %s over %s candidates", metric, len(candidates))

    return Assignment.build(phylogeny, trees, metric)


def _local_cost(tree: RnaTree, neighbors: list[RnaTree], metric: Metric) -> int:
    return sum(tree_distance(metric, tree, other) for other in neighbors)


def median_heuristic_sp(
    phylogeny: Phylogeny,
    leaf_trees: Mapping[str, RnaTree],
    metric: Metric,
    constraint: Constraint,
    init: Assignment | None = None,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
) -> Assignment:
    """
    Improve an assignment by replacing node trees with neighbor medians.

    Internal nodes are visited in post-order; the root takes the median of
    its children, other nodes of their children and parent. A median is
    adopted only if it strictly lowers the total cost. Rounds repeat until
    one makes no change or ``max_rounds`` is reached. ``trace`` records the
    total cost before the first round and after every round.
    """
    if metric not in (Metric.IL, Metric.RF) or constraint not in (
        Constraint.NC,
        Constraint.ILC,
    ):
        raise UnsupportedProblemError(
            f"unsupported: no median heuristic for {metric} under {constraint}"
        )

    check_leaf_trees(phylogeny, leaf_trees)

    if init is None:
        init = leaf_restricted_sp(phylogeny, leaf_trees, metric)

    trees = dict(init.trees)
    trees.update(leaf_trees)
    total = Assignment.build(phylogeny, trees, metric).sp_cost
    trace = [total]
    internal = [node for node in phylogeny.postorder if not phylogeny.is_leaf(node)]

    for round_number in range(1, max_rounds + 1):
        adopted = 0

        for node in internal:
            neighbors = [trees[other] for other in phylogeny.neighbors(node)]
            median = solve_median(neighbors, metric, constraint).tree

            if median == trees[node]:
                continue

            gain = _local_cost(trees[node], neighbors, metric) - _local_cost(
                median, neighbors, metric
            )

            if gain > 0:
                trees[node] = median
                total -= gain
                adopted += 1

        trace.append(total)
        logger.debug(
            "Round %s adopted %s medians, cost %s", round_number, adopted, total
        )

        if not adopted:
            break

    return Assignment.build(phylogeny, trees, metric, trace=tuple(trace))


def solve_small_parsimony(
    phylogeny: Phylogeny,
    leaf_trees: Mapping[str, RnaTree],
    metric: Metric,
    constraint: Constraint,
    solver: Solver,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
) -> Assignment:
    """Dispatch to the small parsimony solver named by ``solver``."""
    match solver:
        case Solver.EXACT:
            if metric not in (Metric.RF, Metric.BP) or constraint is Constraint.ILC:
                raise UnsupportedProblemError(
                    f"unsupported: no exact solver for {metric} under {constraint}"
                )

            return rf_nc_sp(phylogeny, leaf_trees)
        case Solver.LEAF_RESTRICTED:
            return leaf_restricted_sp(phylogeny, leaf_trees, metric)
        case Solver.MEDIAN_HEURISTIC:
            return median_heuristic_sp(
                phylogeny, leaf_trees, metric, constraint, max_rounds=max_rounds
            )

    raise ValueError(f"unknown solver {solver}")
