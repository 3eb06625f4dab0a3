"""
Ancestral structure experiments over directories of datasets.

A dataset directory holds a structure file and a Newick phylogeny whose leaf
labels match the structure ids, plus an optional ``meta.json`` written by
the sampler. Every method infers the internal structures of every dataset,
and the results are reported per node height.
"""

from __future__ import annotations

import json
import time
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from itertools import combinations
from pathlib import Path
from typing import NamedTuple

import pandas as pd
from pydantic import BaseModel, ConfigDict

from .const import DEFAULT_MAX_ROUNDS, META_FILE, STRUCTURES_FILE, TREE_FILE, logger
from .distances import Constraint, Metric, il_distance
from .exporter import EXPERIMENT_COLUMNS, AssignmentExporter, frame
from .phylogeny import Phylogeny, check_leaf_trees
from .readers import degap, read_newick, read_structures
from .smallpars import Solver, solve_small_parsimony
from .tree import RnaTree, to_tree


class UnknownMethodError(ValueError):
    """Error raised for a method name with no pipeline."""


class Method(NamedTuple):
    metric: Metric
    constraint: Constraint
    solver: Solver


METHODS = {
    "rf-nc": Method(Metric.RF, Constraint.NC, Solver.EXACT),
    "il-nc": Method(Metric.IL, Constraint.NC, Solver.MEDIAN_HEURISTIC),
    "il-ilc": Method(Metric.IL, Constraint.ILC, Solver.MEDIAN_HEURISTIC),
    "rf-ilc": Method(Metric.RF, Constraint.ILC, Solver.MEDIAN_HEURISTIC),
    "re-leaf": Method(Metric.RE, Constraint.NC, Solver.LEAF_RESTRICTED),
    "rf-leaf": Method(Metric.RF, Constraint.NC, Solver.LEAF_RESTRICTED),
    "il-leaf": Method(Metric.IL, Constraint.NC, Solver.LEAF_RESTRICTED),
}
DEFAULT_METHODS = ("rf-nc", "il-nc", "il-ilc", "rf-ilc")


def parse_methods(text: str) -> list[str]:
    """Return the method names in a comma-separated list, in order."""
    names = [name.strip() for name in text.split(",") if name.strip()]
    unknown = [name for name in names if name not in METHODS]

    if unknown:
        raise UnknownMethodError(
            f"unknown methods {unknown}; choose from {sorted(METHODS)}"
        )

    return names


class Dataset(BaseModel):
    """One phylogeny with the RNA trees of its leaves."""

    model_config = ConfigDict(frozen=True)

    name: str
    phylogeny: Phylogeny
    leaf_trees: dict[str, RnaTree]
    seed: int | None = None
    replicate: int | None = None

    @property
    def max_leaf_bp(self) -> int:
        return max(tree.num_base_pairs for tree in self.leaf_trees.values())


def is_dataset(path: Path) -> bool:
    return (path / STRUCTURES_FILE).is_file() and (path / TREE_FILE).is_file()


def discover_datasets(root: Path) -> list[Path]:
    """Return ``root`` if it is a dataset, else its dataset subdirectories."""
    if is_dataset(root):
        return [root]

    found = sorted(path for path in root.iterdir() if is_dataset(path))
    logger.info("Found %s datasets under %s", len(found), root)

    return found


def load_dataset(path: Path, min_hairpin: int = 0) -> Dataset:
    """Return the dataset stored in a directory."""
    structures = degap(read_structures(path / STRUCTURES_FILE), min_hairpin)
    leaf_trees = {record_id: to_tree(structure) for record_id, structure in structures}
    phylogeny = read_newick(path / TREE_FILE)
    check_leaf_trees(phylogeny, leaf_trees)
    meta = {}

    if (path / META_FILE).is_file():
        meta = json.loads((path / META_FILE).read_text(encoding="utf-8"))

    return Dataset(
        name=path.name,
        phylogeny=phylogeny,
        leaf_trees=leaf_trees,
        seed=meta.get("seed"),
        replicate=meta.get("replicate"),
    )


def family_divergence(leaf_trees: dict[str, RnaTree]) -> int:
    """Return the summed IL distance over all pairs of leaf trees."""
    return sum(
        il_distance(first, second)
        for first, second in combinations(leaf_trees.values(), 2)
    )


class Task(NamedTuple):
    path: Path
    methods: tuple[str, ...]
    max_rounds: int
    timing: bool
    rank_divergence: bool
    min_hairpin: int


def run_dataset(task: Task) -> list[dict[str, object]]:
    """Return one row per method and node height for one dataset."""
    dataset = load_dataset(task.path, task.min_hairpin)
    divergence = family_divergence(dataset.leaf_trees) if task.rank_divergence else None
    rows = []

    for name in task.methods:
        method = METHODS[name]
        started = time.perf_counter()
        assignment = solve_small_parsimony(
            dataset.phylogeny,
            dataset.leaf_trees,
            method.metric,
            method.constraint,
            method.solver,
            max_rounds=task.max_rounds,
        )
        wall_ms = (time.perf_counter() - started) * 1000 if task.timing else 0
        heights = AssignmentExporter(
            phylogeny=dataset.phylogeny, assignment=assignment
        ).heights
        logger.debug("%s on %s: SP cost %s", name, dataset.name, assignment.sp_cost)

        for height in heights.itertuples(index=False):
            row: dict[str, object] = {
                "dataset": dataset.name,
                "replicate": dataset.replicate,
                "method": name,
                "seed": dataset.seed,
                "node_height": int(height.node_height),
                "mean_bp": float(height.mean_bp),
                "max_bp": int(height.max_bp),
                "max_leaf_bp": dataset.max_leaf_bp,
                "spcost_per_edge": assignment.cost_per_edge(dataset.phylogeny),
                "wall_ms": round(wall_ms, 3),
            }

            if task.rank_divergence:
                row["divergence"] = divergence

            rows.append(row)

    return rows


def run_experiment(
    root: Path,
    methods: Sequence[str] = DEFAULT_METHODS,
    threads: int = 1,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    timing: bool = True,
    rank_divergence: bool = False,
    min_hairpin: int = 0,
) -> pd.DataFrame:
    """
    Return the experiment table for every dataset under ``root``.

    Datasets run in a process pool when ``threads`` is above one. Rows are
    sorted by dataset, method and node height, so the table does not depend
    on scheduling.
    """
    unknown = [name for name in methods if name not in METHODS]

    if unknown:
        raise UnknownMethodError(f"unknown methods {unknown}")

    columns = EXPERIMENT_COLUMNS + (["divergence"] if rank_divergence else [])

    if not methods:
        return frame([], columns)

    tasks = [
        Task(path, tuple(methods), max_rounds, timing, rank_divergence, min_hairpin)
        for path in discover_datasets(root)
    ]

    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_dataset, tasks))
    else:
        results = [run_dataset(task) for task in tasks]

    rows = [row for result in results for row in result]
    table = frame(rows, columns)

    if rank_divergence:
        table = table.sort_values(
            ["divergence", "dataset", "method", "node_height"],
            ascending=[False, True, True, True],
            kind="stable",
        )
    else:
        table = table.sort_values(["dataset", "method", "node_height"], kind="stable")

    return table.reset_index(drop=True)
