"""Tests for the exhaustive reference solvers."""

from itertools import product

import pytest
from rnapars.distances import Constraint, Metric, re_distance, relaxed_cost
from rnapars.oracle import (
    CandidatePolicy,
    OracleCapError,
    all_trees,
    brute_median,
    brute_sp,
    enumerate_mappings,
    enumerate_structures,
)
from rnapars.tree import LeafsetError, RnaTree, to_tree

from .conftest import random_trees, tree_of, trees_of

# pylint: disable=missing-class-docstring, missing-function-docstring


def cheapest_mapping(first: RnaTree, second: RnaTree) -> float:
    return min(
        mapping.cost(first, second, relaxed_cost)
        for mapping in enumerate_mappings(first, second)
    )


class TestEnumerateStructures:
    def test_small_lengths(self):
        assert [s.dotbracket for s in enumerate_structures(3)] == [
            "().",
            "(.)",
            ".()",
            "...",
        ]

    def test_empty(self):
        assert len(enumerate_structures(0)) == 1

    def test_hairpin_minimum(self):
        assert [s.dotbracket for s in enumerate_structures(5, theta=3)] == [
            "(...)",
            ".....",
        ]

    def test_cap(self):
        with pytest.raises(OracleCapError):
            enumerate_structures(13)

    def test_all_trees(self):
        trees = all_trees(5)

        assert len(trees) == 9
        assert all(tree.root == (0, 5) for tree in trees)


class TestEnumerateMappings:
    def test_root_only_trees(self):
        assert len(enumerate_mappings(tree_of("..."), tree_of("..."))) == 2

    def test_shifted_pair(self):
        mappings = enumerate_mappings(tree_of("(....)"), tree_of(".(...)"))

        assert len(mappings) == 6
        assert all(m.is_valid(tree_of("(....)"), tree_of(".(...)")) for m in mappings)

    def test_cap(self):
        with pytest.raises(OracleCapError):
            enumerate_mappings(tree_of("((((..))))"), tree_of(".........."), cap=3)

    @pytest.mark.parametrize(
        "n", [2, 3, 4, 5, pytest.param(6, marks=pytest.mark.slow)]
    )
    def test_re_distance_is_cheapest_mapping(self, n):
        trees = [to_tree(structure) for structure in enumerate_structures(n)]

        for first, second in product(trees, repeat=2):
            assert re_distance(first, second) == cheapest_mapping(first, second)

    @pytest.mark.slow
    def test_re_distance_with_six_internal_nodes(self, rng):
        for _ in range(30):
            first, second = random_trees(rng, 2, 10)

            assert len(first.pairs) <= 6 and len(second.pairs) <= 6
            assert re_distance(first, second) == cheapest_mapping(first, second)


class TestBruteMedian:
    def test_majority_example(self):
        cost, tree = brute_median(
            trees_of("((..))", "(....)", "......"), Metric.RF, Constraint.NC
        )

        assert cost == 2
        assert tree == tree_of("(....)")

    def test_ilc_restricts_candidates(self):
        trees = trees_of("((..))", "(....)")
        cost, tree = brute_median(trees, Metric.IL, Constraint.ILC)

        assert cost == 3
        assert tree.il_keys <= trees[0].il_keys | trees[1].il_keys

    def test_needs_leafset_from_zero(self):
        tree = RnaTree(leaf_lo=1, leaf_hi=4, pairs=frozenset({(1, 4)}))

        with pytest.raises(LeafsetError):
            brute_median([tree], Metric.RF, Constraint.NC)

    def test_cap(self):
        with pytest.raises(OracleCapError):
            brute_median(trees_of("........."), Metric.RF, Constraint.NC)


class TestBruteSp:
    def test_three_leaf_example(self, three_leaf_phylogeny, three_leaf_trees):
        cost, assignment = brute_sp(three_leaf_phylogeny, three_leaf_trees, Metric.IL)

        assert cost == 3
        assert assignment.sp_cost == 3
        assert assignment.trees["x"] == three_leaf_trees["x"]

    def test_leaf_restricted_candidates(self, three_leaf_phylogeny, three_leaf_trees):
        _, assignment = brute_sp(
            three_leaf_phylogeny,
            three_leaf_trees,
            Metric.RF,
            policy=CandidatePolicy.LEAF_RESTRICTED,
        )

        assert set(assignment.trees.values()) <= set(three_leaf_trees.values())

    def test_assignment_cap(self, three_leaf_phylogeny, three_leaf_trees):
        with pytest.raises(OracleCapError):
            brute_sp(
                three_leaf_phylogeny, three_leaf_trees, Metric.RF, max_assignments=100
            )
