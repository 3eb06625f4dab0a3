"""Exhaustive reference solvers for small instances."""

from __future__ import annotations

from collections.abc import Iterator, Mapping, Sequence
from enum import StrEnum
from functools import lru_cache
from itertools import product

import numpy as np
import numpy.typing as npt

from .const import DEFAULT_MAPPING_CAP, DEFAULT_ORACLE_CAP, logger
from .distances import Constraint, Metric, distance_matrix, satisfies
from .distances import Mapping as TreeMapping
from .median import check_instance, mcost
from .phylogeny import Assignment, Phylogeny, check_leaf_trees
from .smallpars import distinct_leaf_trees
from .structure import Pair, SecondaryStructure, parse_dotbracket
from .tree import LeafsetError, RnaTree, is_ancestor, precedes_in_postorder, to_tree

DEFAULT_MEDIAN_CAP = 8
DEFAULT_SP_CAP = 6
DEFAULT_MAX_ASSIGNMENTS = 1_000_000


class OracleCapError(ValueError):
    """Error raised when an instance is too large to enumerate."""


class CandidatePolicy(StrEnum):
    ALL = "all"
    LEAF_RESTRICTED = "leaf-restricted"


@lru_cache(maxsize=128)
def _dotbrackets(length: int, theta: int) -> tuple[str, ...]:
    if length == 0:
        return ("",)

    found = ["." + rest for rest in _dotbrackets(length - 1, theta)]

    for k in range(theta + 2, length + 1):
        for inner in _dotbrackets(k - 2, theta):
            for outer in _dotbrackets(length - k, theta):
                found.append(f"({inner}){outer}")

    return tuple(found)


def enumerate_structures(
    n: int, theta: int = 0, cap: int = DEFAULT_ORACLE_CAP
) -> list[SecondaryStructure]:
    """Return every structure of length ``n``, sorted by dot-bracket text."""
    if n > cap:
        raise OracleCapError(f"length {n} exceeds the enumeration cap {cap}")

    return [parse_dotbracket(text) for text in sorted(_dotbrackets(n, theta))]


def _extend(
    first: list[Pair], second: list[Pair], chosen: list[tuple[Pair, Pair]]
) -> Iterator[list[tuple[Pair, Pair]]]:
    if not first:
        yield list(chosen)
        return

    x, rest = first[0], first[1:]
    yield from _extend(rest, second, chosen)
    used = {y for _, y in chosen}

    for y in second:
        if y in used:
            continue

        if all(
            precedes_in_postorder(x, u) == precedes_in_postorder(y, v)
            and is_ancestor(x, u) == is_ancestor(y, v)
            and is_ancestor(u, x) == is_ancestor(v, y)
            for u, v in chosen
        ):
            chosen.append((x, y))
            yield from _extend(rest, second, chosen)
            chosen.pop()


def enumerate_mappings(
    first: RnaTree, second: RnaTree, cap: int = DEFAULT_MAPPING_CAP
) -> list[TreeMapping]:
    """Return every valid mapping between the internal nodes of two trees."""
    for tree in (first, second):
        if len(tree.pairs) > cap:
            raise OracleCapError(
                f"{len(tree.pairs)} internal nodes exceed the mapping cap {cap}"
            )

    return [
        TreeMapping(pairs=frozenset(pairs))
        for pairs in _extend(first.internal_nodes, second.internal_nodes, [])
    ]


def all_trees(leaf_hi: int, cap: int = DEFAULT_ORACLE_CAP) -> list[RnaTree]:
    """Return every RNA tree on ``[0, leaf_hi]``."""
    structures = enumerate_structures(leaf_hi - 1, cap=cap)

    return [to_tree(structure) for structure in structures]


def brute_median(
    trees: Sequence[RnaTree],
    metric: Metric,
    constraint: Constraint,
    cap: int = DEFAULT_MEDIAN_CAP,
) -> tuple[int, RnaTree]:
    """
    Return the least total distance to ``trees`` over all constrained trees.

    The first optimal tree in dot-bracket order is returned with it.
    """
    first = check_instance(trees)

    if first.leaf_lo != 0:
        raise LeafsetError(f"leafset starts at {first.leaf_lo}, expected 0")

    best: tuple[int, RnaTree] | None = None

    for candidate in all_trees(first.leaf_hi, cap=cap):
        if not satisfies(candidate, trees, constraint):
            continue

        cost = mcost(candidate, trees, metric)

        if best is None or cost < best[0]:
            best = (cost, candidate)

    if best is None:
        raise ValueError(f"no tree satisfies {constraint}")

    return best


def brute_sp(
    phylogeny: Phylogeny,
    leaf_trees: Mapping[str, RnaTree],
    metric: Metric,
    policy: CandidatePolicy = CandidatePolicy.ALL,
    cap: int = DEFAULT_SP_CAP,
    max_assignments: int = DEFAULT_MAX_ASSIGNMENTS,
) -> tuple[int, Assignment]:
    """
    Return the least SP cost over every assignment of candidate trees.

    Candidates are all trees on the common leafset, or only the distinct
    leaf trees. Assignments are scored together with numpy; the first
    optimum in lexicographic order of candidate indices is returned.
    """
    check_leaf_trees(phylogeny, leaf_trees)

    if policy is CandidatePolicy.ALL:
        leaf_hi = next(iter(leaf_trees.values())).leaf_hi
        candidates = all_trees(leaf_hi, cap=cap)
    else:
        candidates = distinct_leaf_trees(phylogeny, leaf_trees)

    internal = phylogeny.internal_nodes
    total = len(candidates) ** len(internal)

    if total > max_assignments:
        raise OracleCapError(f"{total} assignments exceed the cap {max_assignments}")

    distances = distance_matrix(candidates, metric)
    states = np.array(
        list(product(range(len(candidates)), repeat=len(internal))), dtype=np.int64
    ).reshape(total, len(internal))
    column = {node: position for position, node in enumerate(internal)}

    def state_of(node: str) -> npt.NDArray[np.int64]:
        if node in column:
            return states[:, column[node]]

        return np.full(total, candidates.index(leaf_trees[node]), dtype=np.int64)

    costs = np.zeros(total, dtype=np.int64)

    for parent, child in phylogeny.edges:
        costs += distances[state_of(parent), state_of(child)]

    best = int(np.argmin(costs))
    trees = dict(leaf_trees)
    trees.update({node: candidates[states[best, column[node]]] for node in internal})
    logger.debug("Scored %s assignments over %s candidates", total, len(candidates))

    return int(costs[best]), Assignment.build(phylogeny, trees, metric)
