"""Tests for median RNA trees."""

from collections import Counter
from itertools import combinations

import numpy as np
import pytest
from rnapars.distances import Constraint, Metric, satisfies
from rnapars.leafset import InternalLeafset
from rnapars.median import (
    BacktraceError,
    UnsupportedProblemError,
    WeightedInterval,
    backtrace,
    cost_il,
    fill_tables,
    il_ilc_median,
    il_nc_median,
    mcost,
    mwis_intervals,
    rf_ilc_median,
    rf_nc_median,
    solve_median,
)
from rnapars.oracle import brute_median
from rnapars.sampling import SamplerConfig, sample_structure
from rnapars.tree import LeafsetError, to_tree, tree_from_ils

from .conftest import best_time, enumerated_trees, random_trees, tree_of, trees_of

# pylint: disable=missing-class-docstring, missing-function-docstring

DP_PROBLEMS = [
    (Metric.IL, Constraint.ILC),
    (Metric.IL, Constraint.NC),
    (Metric.RF, Constraint.ILC),
]
MEDIAN_PROBLEMS = [(Metric.RF, Constraint.NC), *DP_PROBLEMS]


def weighted(lo: int, hi: int, weight: float) -> WeightedInterval:
    return WeightedInterval(lo=lo, hi=hi, weight=weight)


def disjoint(first: WeightedInterval, second: WeightedInterval) -> bool:
    return first.hi < second.lo or second.hi < first.lo


def exhaustive_weight(items: list[WeightedInterval]) -> float:
    best = 0.0

    for size in range(1, len(items) + 1):
        for subset in combinations(items, size):
            if all(disjoint(a, b) for a, b in combinations(subset, 2)):
                best = max(best, sum(item.weight for item in subset))

    return best


def partition_cost(tables, partition) -> float:
    return sum(
        tables.leafset_cost.get(leafset.members, tables.num_trees)
        for leafset in partition.sets
    )


class TestMwisIntervals:
    def test_picks_disjoint_pair(self):
        items = [weighted(1, 3, 5), weighted(2, 5, 6), weighted(4, 7, 5)]
        weight, chosen = mwis_intervals(items)

        assert weight == 10
        assert [(item.lo, item.hi) for item in chosen] == [(1, 3), (4, 7)]

    def test_skips_non_positive_weights(self):
        weight, chosen = mwis_intervals([weighted(1, 2, -1), weighted(3, 4, 0)])

        assert weight == 0
        assert not chosen

    def test_empty(self):
        assert mwis_intervals([]) == (0, [])

    def test_rejects_reversed_interval(self):
        with pytest.raises(ValueError):
            weighted(4, 2, 1)

    def test_matches_exhaustive_search(self, rng):
        for _ in range(100):
            items = []

            for _ in range(int(rng.integers(13))):
                lo = int(rng.integers(20))
                hi = lo + int(rng.integers(6))
                items.append(weighted(lo, hi, int(rng.integers(-3, 10))))

            weight, chosen = mwis_intervals(items)

            assert weight == exhaustive_weight(items)
            assert sum(item.weight for item in chosen) == weight
            assert all(disjoint(a, b) for a, b in combinations(chosen, 2))


class TestCostIl:
    def test_held_by_every_tree(self):
        trees = trees_of("((..))", "((..))")

        assert cost_il(InternalLeafset.of((2, 3, 4, 5)), trees) == -2

    def test_held_by_no_tree(self):
        trees = trees_of("((..))", "(....)")

        assert cost_il(InternalLeafset.of((0, 1, 6, 7)), trees) == 2

    def test_total_distance_splits_over_candidate_leafsets(self, rng):
        for _ in range(100):
            length = int(rng.integers(1, 8))
            trees = enumerated_trees(rng, int(rng.integers(2, 5)), length)
            candidate = enumerated_trees(rng, 1, length)[0]
            held = sum(len(tree.il_keys) for tree in trees)
            split = sum(
                cost_il(InternalLeafset.of(members), trees)
                for members in candidate.il_keys
            )

            assert mcost(candidate, trees, Metric.IL) == held + split


class TestRfNcMedian:
    def test_majority_rule(self):
        trees = trees_of("((..))", "(....)", "......")

        assert rf_nc_median(trees) == tree_of("(....)")
        assert mcost(tree_of("(....)"), trees, Metric.RF) == 2

    def test_repeated_input(self):
        trees = trees_of("((..))", "((..))", "(....)")
        result = solve_median(trees, Metric.RF, Constraint.NC)

        assert result.tree == tree_of("((..))")
        assert result.cost == 1

    def test_keeps_intervals_held_by_a_majority(self, rng):
        for _ in range(200):
            trees = enumerated_trees(rng, int(rng.integers(2, 4)), int(rng.integers(8)))
            counts = Counter(pair for tree in trees for pair in tree.pairs)
            majority = {
                pair for pair, count in counts.items() if 2 * count > len(trees)
            }

            assert rf_nc_median(trees).pairs == majority

    def test_rejects_mixed_leafsets(self):
        with pytest.raises(LeafsetError):
            rf_nc_median(trees_of("(..)", "(...)"))

    def test_rejects_empty_input(self):
        with pytest.raises(ValueError):
            rf_nc_median([])


class TestDpMedians:
    def test_il_ilc_example(self):
        result = il_ilc_median(trees_of("((..))", "(....)"))

        assert result.cost == 3
        assert result.tree == tree_of("((..))")

    def test_rf_ilc_example(self):
        result = rf_ilc_median(trees_of("((..))", "(....)"))

        assert result.cost == 1

    def test_il_nc_single_input(self):
        tree = tree_of("(.)(.)")
        result = il_nc_median([tree])

        assert result.cost == 0
        assert result.tree == tree

    @pytest.mark.parametrize("metric, constraint", DP_PROBLEMS)
    def test_identical_inputs(self, metric, constraint):
        tree = tree_of(".((..)).")
        result = solve_median([tree, tree, tree], metric, constraint)

        assert result.cost == 0
        assert result.tree == tree

    @pytest.mark.parametrize("metric, constraint", DP_PROBLEMS)
    def test_cost_matches_tree(self, metric, constraint, rng):
        for _ in range(5):
            trees = list(random_trees(rng, 3, 7))
            result = solve_median(trees, metric, constraint)

            assert mcost(result.tree, trees, metric) == result.cost
            assert satisfies(result.tree, trees, constraint)


class TestTables:
    def test_unconstrained_entries_never_exceed_constrained(self, rng):
        for _ in range(100):
            trees = enumerated_trees(rng, int(rng.integers(2, 4)), int(rng.integers(9)))
            relaxed = fill_tables(trees, Metric.IL, Constraint.NC)
            restricted = fill_tables(trees, Metric.IL, Constraint.ILC)

            assert (relaxed.cost <= restricted.cost).all()

    @pytest.mark.parametrize("metric, constraint", DP_PROBLEMS)
    def test_backtrace_reproduces_every_entry(self, metric, constraint, rng):
        for _ in range(20):
            length = int(rng.integers(2, 8))
            trees = enumerated_trees(rng, int(rng.integers(2, 4)), length)
            tables = fill_tables(trees, metric, constraint)

            for i, j in combinations(range(1, length + 1), 2):
                if np.isinf(tables.cost[i, j]):
                    with pytest.raises(BacktraceError):
                        backtrace(tables, i, j)
                    continue

                partition = backtrace(tables, i, j)

                assert (partition.lo, partition.hi) == (i, j)
                assert partition_cost(tables, partition) == tables.cost[i, j]

            top = backtrace(tables, 0, tables.leaf_hi)

            assert partition_cost(tables, top) == tables.optimum
            assert tree_from_ils(top).root == trees[0].root


class TestAgainstBruteForce:
    @pytest.mark.parametrize("metric, constraint", MEDIAN_PROBLEMS)
    def test_small_instances(self, metric, constraint, rng):
        for _ in range(25):
            trees = enumerated_trees(rng, int(rng.integers(2, 4)), int(rng.integers(6)))
            expected, _ = brute_median(trees, metric, constraint)

            assert solve_median(trees, metric, constraint).cost == expected

    @pytest.mark.slow
    @pytest.mark.parametrize("metric, constraint", MEDIAN_PROBLEMS)
    def test_random_instances(self, metric, constraint, rng):
        for _ in range(200):
            trees = enumerated_trees(rng, int(rng.integers(2, 4)), int(rng.integers(8)))
            expected, _ = brute_median(trees, metric, constraint)
            result = solve_median(trees, metric, constraint)

            assert result.cost == expected
            assert mcost(result.tree, trees, metric) == expected
            assert satisfies(result.tree, trees, constraint)


class TestSolveMedian:
    def test_re_is_unsupported(self):
        with pytest.raises(UnsupportedProblemError, match="open problem"):
            solve_median(trees_of("(..)"), Metric.RE, Constraint.NC)

    def test_il_dlc_is_unsupported(self):
        with pytest.raises(UnsupportedProblemError):
            solve_median(trees_of("(..)"), Metric.IL, Constraint.DLC)

    def test_bp_uses_majority_rule(self):
        trees = trees_of("((..))", "(....)", "......")
        result = solve_median(trees, Metric.BP, Constraint.NC)

        assert result.tree == tree_of("(....)")
        assert result.metric is Metric.BP


@pytest.mark.slow
class TestScaling:
    def test_constrained_tables_grow_at_most_cubically(self):
        lengths = [25, 50, 100]
        seconds = []

        for length in lengths:
            trees = [
                to_tree(sample_structure(SamplerConfig(length=length, seed=seed)))
                for seed in range(10)
            ]
            seconds.append(best_time(il_ilc_median, trees))

        slope = np.polyfit(np.log(lengths), np.log(seconds), 1)[0]

        assert slope <= 3.7
