"""Tests for distances between RNA trees."""

from itertools import product

import numpy as np
import pytest
from rnapars.distances import (
    Constraint,
    LeafsetMismatchError,
    LengthMismatchError,
    Mapping,
    Metric,
    bp_distance,
    distance_matrix,
    exact_cost,
    il_distance,
    is_bpc,
    is_dlc,
    is_ilc,
    re_distance,
    relaxed_cost,
    rf_distance,
    satisfies,
    te_distance,
    tree_distance,
)
from rnapars.oracle import enumerate_structures
from rnapars.structure import parse_dotbracket
from rnapars.tree import root_only, to_tree

from .conftest import tree_of, trees_of

# pylint: disable=missing-class-docstring, missing-function-docstring


class TestBpDistance:
    @pytest.mark.parametrize(
        "first, second, expected",
        [
            ("((..))", "(....)", 1),
            ("(....)", "(.)(.)", 3),
            ("((..))", "((..))", 0),
        ],
    )
    def test_examples(self, first, second, expected):
        distance = bp_distance(parse_dotbracket(first), parse_dotbracket(second))

        assert distance == expected

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            bp_distance(parse_dotbracket("(..)"), parse_dotbracket("(...)"))


class TestRfDistance:
    @pytest.mark.parametrize(
        "first, second, expected",
        [("((..))", "(....)", 1), ("((..))", "......", 2), ("(.)(.)", "(.)(.)", 0)],
    )
    def test_examples(self, first, second, expected):
        assert rf_distance(tree_of(first), tree_of(second)) == expected

    def test_leafset_mismatch(self):
        with pytest.raises(LeafsetMismatchError):
            rf_distance(tree_of("...."), tree_of("....."))

    @pytest.mark.parametrize("n", range(6))
    def test_equals_bp_distance(self, n):
        structures = enumerate_structures(n)

        for first, second in product(structures, repeat=2):
            assert rf_distance(to_tree(first), to_tree(second)) == bp_distance(
                first, second
            )


class TestIlDistance:
    @pytest.mark.parametrize(
        "first, second, expected",
        [("((..))", "(....)", 3), ("((..))", "......", 4), ("(.)(.)", "(.)(.)", 0)],
    )
    def test_examples(self, first, second, expected):
        assert il_distance(tree_of(first), tree_of(second)) == expected

    def test_leafset_mismatch(self):
        with pytest.raises(LeafsetMismatchError):
            il_distance(tree_of("...."), tree_of("....."))


class TestTreeEdit:
    def test_identity(self):
        tree = tree_of("((.)(.))")
        distance, mapping = te_distance(tree, tree)

        assert distance == 0
        assert len(mapping) == len(tree.pairs)

    def test_exact_cost_counts_unmatched_nodes(self):
        distance, _ = te_distance(tree_of("(....)"), tree_of(".(...)"), exact_cost)

        assert distance == 2

    def test_relaxed_cost_maps_shifted_pair(self):
        first, second = tree_of("(....)"), tree_of(".(...)")
        distance, mapping = te_distance(first, second, relaxed_cost)

        assert distance == 1
        assert ((1, 6), (2, 6)) in mapping.pairs

    @pytest.mark.parametrize(
        "first, second, expected",
        [("(....)", ".(...)", 1), ("((..))", "......", 2), ("(.)(.)", "(.)(.)", 0)],
    )
    def test_re_distance(self, first, second, expected):
        assert re_distance(tree_of(first), tree_of(second)) == expected

    @pytest.mark.parametrize("n", range(6))
    def test_exact_cost_equals_bp_distance(self, n):
        trees = [to_tree(structure) for structure in enumerate_structures(n)]

        for first, second in product(trees, repeat=2):
            distance, _ = te_distance(first, second, exact_cost)

            assert distance == rf_distance(first, second)

    @pytest.mark.parametrize("n", range(2, 6))
    def test_mapping_is_valid_and_optimal(self, n):
        trees = [to_tree(structure) for structure in enumerate_structures(n)]

        for first, second in product(trees, repeat=2):
            distance, mapping = te_distance(first, second)

            assert mapping.is_valid(first, second)
            assert mapping.cost(first, second, relaxed_cost) == distance

    def test_leafset_mismatch(self):
        with pytest.raises(LeafsetMismatchError):
            re_distance(tree_of("...."), tree_of("....."))

    @pytest.mark.slow
    def test_exact_cost_equals_bp_distance_at_seven(self):
        trees = [to_tree(structure) for structure in enumerate_structures(7)]

        for first, second in product(trees, repeat=2):
            distance, _ = te_distance(first, second, exact_cost)

            assert distance == rf_distance(first, second)


class TestMapping:
    def test_empty_mapping_cost(self):
        first, second = tree_of("(..)"), tree_of("....")

        assert Mapping().cost(first, second, relaxed_cost) == 3

    def test_order_violation_is_invalid(self):
        first, second = tree_of("(.)(.)"), tree_of("(.)(.)")
        mapping = Mapping(pairs=frozenset({((1, 3), (4, 6)), ((4, 6), (1, 3))}))

        assert not mapping.is_valid(first, second)

    def test_nesting_violation_is_invalid(self):
        first, second = tree_of("((..))"), tree_of("((..))")
        mapping = Mapping(pairs=frozenset({((1, 6), (2, 5)), ((2, 5), (1, 6))}))

        assert not mapping.is_valid(first, second)

    def test_not_injective_is_invalid(self):
        first, second = tree_of("((..))"), tree_of("(....)")
        mapping = Mapping(pairs=frozenset({((1, 6), (1, 6)), ((2, 5), (1, 6))}))

        assert not mapping.is_valid(first, second)


class TestMetricAxioms:
    @pytest.mark.parametrize("metric", [Metric.RF, Metric.IL, Metric.RE])
    @pytest.mark.parametrize("n", range(5))
    def test_axioms(self, metric, n):
        trees = [to_tree(structure) for structure in enumerate_structures(n)]
        matrix = distance_matrix(trees, metric)

        assert (np.diag(matrix) == 0).all()
        assert (matrix == matrix.T).all()
        assert (matrix[~np.eye(len(trees), dtype=bool)] > 0).all()
        assert (matrix[:, :, None] <= matrix[:, None, :] + matrix.T[None, :, :]).all()

    @pytest.mark.slow
    @pytest.mark.parametrize("metric", [Metric.RF, Metric.IL, Metric.RE])
    def test_triangle_inequality_at_six(self, metric):
        trees = [to_tree(structure) for structure in enumerate_structures(6)]
        matrix = distance_matrix(trees, metric)

        assert (matrix[:, :, None] <= matrix[:, None, :] + matrix.T[None, :, :]).all()


class TestDispatch:
    @pytest.mark.parametrize(
        "metric, expected", [("bp", 1), ("rf", 1), ("il", 3), ("re", 1)]
    )
    def test_tree_distance(self, metric, expected):
        first, second = trees_of("((..))", "(....)")

        assert tree_distance(Metric(metric), first, second) == expected

    def test_distance_matrix(self):
        trees = trees_of("((..))", "(....)", "......")
        matrix = distance_matrix(trees, Metric.RF)

        assert matrix.tolist() == [[0, 1, 2], [1, 0, 1], [2, 1, 0]]


class TestConstraints:
    def test_input_tree_satisfies_everything(self):
        trees = trees_of("((..))", "(....)")

        for constraint in Constraint:
            assert satisfies(trees[0], trees, constraint)

    def test_root_only_is_ilc_only_if_an_input_is_empty(self):
        empty = root_only(0, 7)

        assert not is_ilc(empty, trees_of("((..))", "(....)"))
        assert is_ilc(empty, trees_of("((..))", "......"))
        assert is_dlc(empty, trees_of("((..))", "(....)"))

    def test_dlc_and_bpc_agree(self):
        inputs = trees_of("((..))", ".(..).")
        candidate = tree_of(".(..).")
        other = tree_of("(.)(.)")

        assert is_dlc(candidate, inputs) and is_bpc(candidate, inputs)
        assert not is_dlc(other, inputs) and not is_bpc(other, inputs)

    def test_ilc_rejects_new_loop(self):
        inputs = trees_of("((..))", "(....)")

        assert not is_ilc(tree_of(".(..)."), inputs)
        assert satisfies(tree_of(".(..)."), inputs, Constraint.NC)
