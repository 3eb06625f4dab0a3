"""Result tables as DataFrames, and writers for results and datasets."""

from __future__ import annotations

import sys
from collections.abc import Iterable, Mapping
from enum import StrEnum
from pathlib import Path

import dendropy
import pandas as pd
from pydantic import BaseModel

from .const import logger
from .phylogeny import Assignment, Phylogeny
from .structure import SecondaryStructure

DISTANCE_COLUMNS = ["id1", "id2", "metric", "value"]
MEDIAN_COLUMNS = [
    "method",
    "metric",
    "constraint",
    "dotbracket",
    "num_base_pairs",
    "mcost",
]
SMALLPARS_COLUMNS = [
    "record",
    "node_id",
    "depth",
    "height",
    "num_base_pairs",
    "dotbracket",
    "spcost",
    "spcost_per_edge",
]
EXPERIMENT_COLUMNS = [
    "dataset",
    "replicate",
    "method",
    "seed",
    "node_height",
    "mean_bp",
    "max_bp",
    "max_leaf_bp",
    "spcost_per_edge",
    "wall_ms",
]


class OutputFormat(StrEnum):
    CSV = "csv"
    JSON = "json"


def frame(rows: Iterable[Mapping[str, object]], columns: list[str]) -> pd.DataFrame:
    """
    Return a DataFrame with exactly ``columns``, in order.

    Cells keep their Python types so integers print without a decimal point
    and missing values print as empty fields.
    """
    return pd.DataFrame(list(rows), columns=columns, dtype=object)


class AssignmentExporter(BaseModel):
    """Transforms an inferred Assignment to DataFrames."""

    phylogeny: Phylogeny
    assignment: Assignment

    @property
    def nodes(self) -> pd.DataFrame:
        """Return one row per phylogeny node in pre-order."""
        depths, heights = self.phylogeny.depths, self.phylogeny.heights

        return frame(
            [
                {
                    "record": "node",
                    "node_id": node,
                    "depth": depths[node],
                    "height": heights[node],
                    "num_base_pairs": self.assignment.trees[node].num_base_pairs,
                    "dotbracket": self.assignment.trees[node].to_dotbracket(),
                    "spcost": None,
                    "spcost_per_edge": None,
                }
                for node in self.phylogeny.preorder
            ],
            SMALLPARS_COLUMNS,
        )

    @property
    def summary(self) -> pd.DataFrame:
        """Return the single row holding the total and per-edge SP cost."""
        return frame(
            [
                {
                    "record": "summary",
                    "spcost": self.assignment.sp_cost,
                    "spcost_per_edge": self.assignment.cost_per_edge(self.phylogeny),
                }
            ],
            SMALLPARS_COLUMNS,
        )

    @property
    def table(self) -> pd.DataFrame:
        return pd.concat([self.nodes, self.summary], ignore_index=True)

    @property
    def heights(self) -> pd.DataFrame:
        """Return mean and max base pair counts of the nodes at each height."""
        counts = pd.DataFrame(
            [
                {
                    "node_height": self.phylogeny.heights[node],
                    "num_base_pairs": self.assignment.trees[node].num_base_pairs,
                }
                for node in self.phylogeny.preorder
            ]
        )
        grouped = counts.groupby("node_height")["num_base_pairs"]

        return pd.DataFrame(
            {"mean_bp": grouped.mean(), "max_bp": grouped.max()}
        ).reset_index()


def render(results: pd.DataFrame, fmt: OutputFormat = OutputFormat.CSV) -> str:
    if fmt is OutputFormat.JSON:
        return results.to_json(orient="records") + "\n"

    return results.to_csv(index=False, lineterminator="\n")


def write_results(
    results: pd.DataFrame,
    out: Path | None = None,
    fmt: OutputFormat = OutputFormat.CSV,
) -> None:
    """Write results to ``out``, or to standard output when no path is given."""
    text = render(results, fmt)

    if out is None:
        sys.stdout.write(text)
        return

    out.write_text(text, encoding="utf-8")
    logger.info("Wrote %s rows to %s", len(results), out)


def write_structures(
    path: Path, records: Iterable[tuple[str, SecondaryStructure | str]]
) -> None:
    """Write records as a ``>id`` / dot-bracket structure file."""
    lines = []

    for record_id, structure in records:
        lines.extend([f">{record_id}", str(structure)])

    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def to_dendropy(phylogeny: Phylogeny) -> dendropy.Tree:
    """Return a dendropy tree with the phylogeny's shape and leaf labels."""
    namespace = dendropy.TaxonNamespace()
    tree = dendropy.Tree(taxon_namespace=namespace)
    mirror = {phylogeny.root: tree.seed_node}

    for node in phylogeny.preorder:
        if phylogeny.is_leaf(node):
            mirror[node].taxon = namespace.require_taxon(label=node)

        for child in phylogeny.child_nodes(node):
            mirror[child] = mirror[node].new_child()

    return tree


def write_newick(path: Path, phylogeny: Phylogeny) -> None:
    """Write the phylogeny as Newick without internal labels or branch lengths."""
    text = to_dendropy(phylogeny).as_string(
        schema="newick",
        suppress_rooting=True,
        suppress_internal_node_labels=True,
        suppress_edge_lengths=True,
    )
    path.write_text(text, encoding="utf-8")
