"""
Median RNA trees under the RF and IL distances.

The RF median without constraints is the majority-rule tree. The IL medians,
and the RF median restricted to input internal leafsets, come from a
folding-like dynamic program over leaf intervals: every tree is a structural
partition of its leafset, and the distance to the inputs splits into one
cost term per set in the partition.
"""

from __future__ import annotations

from bisect import bisect_left
from collections import Counter
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, model_validator

from .const import INFINITY, logger
from .distances import Constraint, Metric, tree_distance
from .leafset import InternalLeafset, StructuralPartition, gaps
from .structure import Pair
from .tree import LeafsetError, RnaTree, tree_from_dls, tree_from_ils

Members = tuple[int, ...]
Table = npt.NDArray[np.float64]


class UnsupportedProblemError(ValueError):
    """Error raised for a distance and constraint with no median solver."""


class BacktraceError(RuntimeError):
    """Error raised when filled tables do not explain their own optimum."""


class MedianResult(BaseModel):
    """A median tree with its total distance to the inputs."""

    model_config = ConfigDict(frozen=True)

    tree: RnaTree
    cost: int
    metric: Metric
    constraint: Constraint


class WeightedInterval(BaseModel):
    model_config = ConfigDict(frozen=True)

    lo: int
    hi: int
    weight: float

    @model_validator(mode="after")
    def check_bounds(self) -> WeightedInterval:
        if self.lo > self.hi:
            raise ValueError(f"interval [{self.lo}, {self.hi}] is reversed")

        return self


def check_instance(trees: Sequence[RnaTree]) -> RnaTree:
    """Return the first tree after confirming all trees share its leafset."""
    if not trees:
        raise ValueError("a median needs at least one input tree")

    first = trees[0]

    for tree in trees[1:]:
        if tree.root != first.root:
            raise LeafsetError(
                f"input leafsets {list(first.root)} and {list(tree.root)} differ"
            )

    return first


def mcost(candidate: RnaTree, trees: Sequence[RnaTree], metric: Metric) -> int:
    """Return the summed distance from ``candidate`` to every input tree."""
    return sum(tree_distance(metric, candidate, tree) for tree in trees)


def rf_nc_median(trees: Sequence[RnaTree]) -> RnaTree:
    """Return the tree of descendant leafsets displayed by a strict majority."""
    first = check_instance(trees)
    counts = Counter(pair for tree in trees for pair in tree.pairs)
    majority = [pair for pair, count in counts.items() if 2 * count > len(trees)]
    logger.debug("Majority rule keeps %s of %s intervals", len(majority), len(counts))

    return tree_from_dls(majority, first.root)


def cost_il(leafset: InternalLeafset, trees: Sequence[RnaTree]) -> int:
    """Return the number of trees missing ``leafset`` minus the number holding it."""
    holding = sum(1 for tree in trees if leafset.members in tree.il_keys)

    return len(trees) - 2 * holding


def mwis_intervals(
    items: Sequence[WeightedInterval],
) -> tuple[float, list[WeightedInterval]]:
    """
    Return a maximum-weight set of pairwise disjoint intervals and its weight.

    Intervals are inclusive. Only strictly positive weights are ever chosen,
    and on ties the interval ending later is left out.
    """
    weight, chosen = _schedule([(item.lo, item.hi, item.weight) for item in items])

    return weight, [WeightedInterval(lo=lo, hi=hi, weight=w) for lo, hi, w in chosen]


def _schedule(
    items: Sequence[tuple[int, int, float]],
) -> tuple[float, list[tuple[int, int, float]]]:
    positive = [item for item in items if item[2] > 0]
    ordered = sorted(positive, key=lambda item: (item[1], item[0]))
    ends = [item[1] for item in ordered]
    best = [0.0] * (len(ordered) + 1)
    previous = []

    for position, (lo, _, weight) in enumerate(ordered, start=1):
        before = bisect_left(ends, lo, 0, position - 1)
        previous.append(before)
        best[position] = max(best[position - 1], weight + best[before])

    chosen = []
    position = len(ordered)

    while position > 0:
        weight = ordered[position - 1][2]
        before = previous[position - 1]

        if weight + best[before] > best[position - 1]:
            chosen.append(ordered[position - 1])
            position = before
        else:
            position -= 1

    chosen.reverse()

    return best[-1], chosen


@dataclass
class DpTables:
    """
    Filled interval tables of one median computation.

    ``cost[i, j]`` is the best total leafset cost of a structural partition
    of ``[i, j]``; entries with ``j < i`` are 0 and single leaves are
    infinite. In the unconstrained case ``known`` and ``novel`` split that
    optimum by whether the set holding ``i`` comes from an input tree, and
    ``alpha[a, b]`` is the best weight of disjoint intervals inside
    ``[a, b]`` weighted by ``-cost``. Row 0 holds only the root entry
    ``[0, leaf_hi]``, where ``0`` and ``leaf_hi`` must share a set.
    """

    leaf_hi: int
    num_trees: int
    unconstrained: bool
    candidates: dict[int, list[Members]]
    leafset_cost: dict[Members, int]
    cost: Table
    known: Table | None = None
    novel: Table | None = None
    alpha: Table | None = None
    gap_cost: dict[Members, float] = field(default_factory=dict)

    @property
    def optimum(self) -> float:
        return float(self.cost[0, self.leaf_hi])

    def gap_total(self, members: Members) -> float:
        if members not in self.gap_cost:
            self.gap_cost[members] = sum(
                float(self.cost[lo, hi]) for lo, hi in gaps(members)
            )

        return self.gap_cost[members]

    def known_terms(self, i: int, j: int) -> list[tuple[Members, float]]:
        """Return input leafsets starting at ``i`` with the cost of using each."""
        return [
            (
                members,
                self.leafset_cost[members]
                + self.gap_total(members)
                + float(self.cost[members[-1] + 1, j]),
            )
            for members in self.candidates.get(i, [])
            if members[-1] <= j
        ]

    def novel_terms(self, i: int, j: int) -> npt.NDArray[np.float64]:
        """
        Return the cost of a new set holding ``i`` and then ``k``, for each k.

        The result is indexed by ``k - i - 1``; leaves after ``k`` either join
        the new set or fall into independently partitioned intervals.
        """
        assert self.alpha is not None
        upper = j - 1 if (i, j) == (0, self.leaf_hi) else j
        inner = self.cost[i + 1, i:j]
        outer = self.alpha[i + 2 : j + 2, upper]

        return self.num_trees + inner - outer


def _collect_candidates(trees: Sequence[RnaTree]) -> dict[int, list[Members]]:
    """Group input leafsets by smallest member, in order of first tree holding them."""
    candidates: dict[int, list[Members]] = {}

    for tree in trees:
        for members in sorted(tree.il_keys):
            starting = candidates.setdefault(members[0], [])

            if members not in starting:
                starting.append(members)

    return candidates


def _leafset_costs(
    trees: Sequence[RnaTree], metric: Metric
) -> tuple[dict[Members, int], Callable[[RnaTree], int]]:
    """Return per-leafset costs and the constant term of the total distance."""
    p = len(trees)
    leafsets = {members for tree in trees for members in tree.il_keys}

    if metric is Metric.IL:
        held = Counter(members for tree in trees for members in tree.il_keys)
        costs = {members: p - 2 * held[members] for members in leafsets}

        return costs, lambda tree: len(tree.il_keys)

    held_pairs = Counter(pair for tree in trees for pair in tree.pairs)
    costs = {
        members: p - 2 * held_pairs[(members[0], members[-1])] for members in leafsets
    }

    return costs, lambda tree: len(tree.pairs)


def fill_tables(
    trees: Sequence[RnaTree], metric: Metric, constraint: Constraint
) -> DpTables:
    """Fill the interval tables for an IL or RF median restricted by ``constraint``."""
    first = check_instance(trees)

    if first.leaf_lo != 0:
        raise LeafsetError("median tables expect a leafset starting at 0")

    unconstrained = constraint is Constraint.NC
    leaf_hi = first.leaf_hi
    size = leaf_hi + 2
    costs, _ = _leafset_costs(trees, metric)
    cost = np.zeros((size, size), dtype=np.float64)
    np.fill_diagonal(cost, INFINITY)
    tables = DpTables(
        leaf_hi=leaf_hi,
        num_trees=len(trees),
        unconstrained=unconstrained,
        candidates=_collect_candidates(trees),
        leafset_cost=costs,
        cost=cost,
    )

    if unconstrained:
        tables.known = np.full((size, size), INFINITY)
        tables.novel = np.full((size, size), INFINITY)
        tables.alpha = np.zeros((size, size), dtype=np.float64)

    n = leaf_hi - 1

    for length in range(2, n + 1):
        for i in range(1, n - length + 2):
            _fill_entry(tables, i, i + length - 1)

    _fill_entry(tables, 0, leaf_hi)
    logger.debug(
        "Filled %s median tables for n=%s, p=%s: optimum %s",
        constraint,
        n,
        len(trees),
        tables.optimum,
    )

    return tables


def _fill_entry(tables: DpTables, i: int, j: int) -> None:
    best_known = min((value for _, value in tables.known_terms(i, j)), default=INFINITY)

    if not tables.unconstrained:
        tables.cost[i, j] = best_known
        return

    assert tables.known is not None and tables.novel is not None
    assert tables.alpha is not None
    best_novel = float(tables.novel_terms(i, j).min())
    tables.known[i, j] = best_known
    tables.novel[i, j] = best_novel
    tables.cost[i, j] = min(best_known, best_novel)

    if i == 0:
        return

    weights = -tables.cost[i, i + 1 : j + 1]
    tails = tables.alpha[i + 2 : j + 2, j]
    gains = np.where(weights > 0, weights + tails, -INFINITY)
    tables.alpha[i, j] = max(float(tables.alpha[i + 1, j]), float(gains.max()))


def backtrace(tables: DpTables, i: int, j: int) -> StructuralPartition:
    """
    Return a structural partition of ``[i, j]`` achieving ``tables.cost[i, j]``.

    Input leafsets are preferred over new sets on ties, in candidate order;
    new sets prefer the smallest second member.
    """
    sets: list[Members] = []
    pending = [(i, j)]

    while pending:
        lo, hi = pending.pop()

        if hi < lo:
            continue

        members, parts = _trace_entry(tables, lo, hi)
        sets.append(members)
        pending.extend(parts)

    return StructuralPartition.of(sets)


def _trace_entry(tables: DpTables, i: int, j: int) -> tuple[Members, list[Pair]]:
    target = float(tables.cost[i, j])

    if target == INFINITY:
        raise BacktraceError(f"interval [{i}, {j}] has no structural partition")

    for members, value in tables.known_terms(i, j):
        if value == target:
            return members, gaps(members) + [(members[-1] + 1, j)]

    if tables.unconstrained:
        assert tables.alpha is not None
        upper = j - 1 if (i, j) == (0, tables.leaf_hi) else j

        for offset, value in enumerate(tables.novel_terms(i, j)):
            if value != target:
                continue

            k = i + 1 + offset
            weight, chosen = mwis_intervals(
                [
                    WeightedInterval(lo=u, hi=v, weight=-float(tables.cost[u, v]))
                    for u in range(k + 1, upper + 1)
                    for v in range(u + 1, upper + 1)
                    if tables.cost[u, v] < 0
                ]
            )

            if weight != tables.alpha[k + 1, upper]:
                logger.error(
                    "Interval weight %s, table says %s",
                    weight,
                    tables.alpha[k + 1, upper],
                )
                raise BacktraceError(
                    f"interval schedule disagrees at [{k + 1}, {upper}]"
                )

            covered = {
                leaf for item in chosen for leaf in range(item.lo, item.hi + 1)
            }
            members = (i, k) + tuple(
                leaf for leaf in range(k + 1, j + 1) if leaf not in covered
            )

            return members, [(i + 1, k - 1)] + [(item.lo, item.hi) for item in chosen]

    raise BacktraceError(f"no choice reproduces the optimum of [{i}, {j}]")


def _dp_median(
    trees: Sequence[RnaTree], metric: Metric, constraint: Constraint
) -> MedianResult:
    tables = fill_tables(trees, metric, constraint)
    tree = tree_from_ils(backtrace(tables, 0, tables.leaf_hi))
    _, base = _leafset_costs(trees, metric)
    total = sum(base(other) for other in trees) + int(tables.optimum)

    return MedianResult(tree=tree, cost=total, metric=metric, constraint=constraint)


def il_ilc_median(trees: Sequence[RnaTree]) -> MedianResult:
    """Return an IL median built only from input internal leafsets."""
    return _dp_median(trees, Metric.IL, Constraint.ILC)


def il_nc_median(trees: Sequence[RnaTree]) -> MedianResult:
    """Return an IL median over all RNA trees on the common leafset."""
    return _dp_median(trees, Metric.IL, Constraint.NC)


def rf_ilc_median(trees: Sequence[RnaTree]) -> MedianResult:
    """Return an RF median built only from input internal leafsets."""
    return _dp_median(trees, Metric.RF, Constraint.ILC)


def solve_median(
    trees: Sequence[RnaTree], metric: Metric, constraint: Constraint
) -> MedianResult:
    """Dispatch to the median solver for a distance and output constraint."""
    match metric, constraint:
        case (Metric.RF | Metric.BP, Constraint.NC | Constraint.DLC | Constraint.BPC):
            tree = rf_nc_median(trees)

            return MedianResult(
                tree=tree,
                cost=mcost(tree, trees, Metric.RF),
                metric=metric,
                constraint=constraint,
            )
        case (Metric.RF | Metric.BP, Constraint.ILC):
            return rf_ilc_median(trees)
        case (Metric.IL, Constraint.ILC):
            return il_ilc_median(trees)
        case (Metric.IL, Constraint.NC):
            return il_nc_median(trees)
        case (Metric.RE, _):
            raise UnsupportedProblemError(
                "unsupported: the RE median is an open problem with no known solver"
            )

    raise UnsupportedProblemError(f"unsupported: no {metric} median under {constraint}")
