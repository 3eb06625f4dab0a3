"""Readers for structure files, Newick phylogenies and Stockholm alignments."""

from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path
from typing import NamedTuple

import dendropy
from dendropy.utility.error import DataParseError
from pydantic import BaseModel, ConfigDict

from .const import (
    CANONICAL_PAIRS,
    MARK_CLOSE,
    MARK_GAP,
    MARK_OPEN,
    MARK_UNPAIRED,
    SEQUENCE_GAP_MARKS,
    logger,
)
from .phylogeny import Phylogeny
from .structure import DotBracketError, SecondaryStructure, parse_dotbracket

STRUCTURE_ALPHABET = frozenset((MARK_OPEN, MARK_CLOSE, MARK_UNPAIRED, MARK_GAP))
WUSS_OPEN = frozenset("([{<")
WUSS_CLOSE = frozenset(")]}>")


class StructureFileError(ValueError):
    """Error raised when a structure file cannot be read as aligned records."""


class NewickError(ValueError):
    """Error raised when a Newick string does not describe a labelled tree."""


class StockholmError(ValueError):
    """Error raised when a Stockholm file lacks what ingestion needs."""


class Record(NamedTuple):
    id: str
    text: str


def read_structures(path: Path) -> list[Record]:
    """
    Return the records of a FASTA-like file of aligned dot-bracket structures.

    Each record is a ``>id`` line followed by structure text over ``().-``.
    Wrapped structure lines are joined. All records must share one length.
    """
    records: list[Record] = []
    lines: list[str] = []
    current: str | None = None

    def close(line_number: int) -> None:
        if current is None:
            return

        if not lines:
            raise StructureFileError(
                f"{path}:{line_number}: record {current!r} has no structure"
            )

        records.append(Record(current, "".join(lines)))

    text = path.read_text(encoding="utf-8")

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()

        if not line:
            continue

        if line.startswith(">"):
            close(line_number)
            words = line[1:].split()

            if not words:
                raise StructureFileError(f"{path}:{line_number}: empty record id")

            current, lines = words[0], []
            continue

        if current is None:
            raise StructureFileError(f"{path}:{line_number}: structure before any id")

        for column, mark in enumerate(line, start=1):
            if mark not in STRUCTURE_ALPHABET:
                raise StructureFileError(
                    f"{path}:{line_number}:{column}: illegal character {mark!r}"
                )

        lines.append(line)

    close(line_number=len(text.splitlines()))

    if not records:
        raise StructureFileError(f"{path}: no records")

    seen: set[str] = set()

    for record in records:
        if record.id in seen:
            raise StructureFileError(f"{path}: duplicate id {record.id!r}")

        seen.add(record.id)

    lengths = {len(record.text) for record in records}

    if len(lengths) > 1:
        raise StructureFileError(f"{path}: ragged record lengths {sorted(lengths)}")

    logger.info("Read %s structures from %s", len(records), path)

    return records


def gap_columns(records: Sequence[Record]) -> list[int]:
    """Return the 1-based columns holding a gap in any record."""
    columns = {
        column
        for record in records
        for column, mark in enumerate(record.text, start=1)
        if mark == MARK_GAP
    }

    return sorted(columns)


def degap(
    records: Sequence[Record], min_hairpin: int = 0
) -> list[tuple[str, SecondaryStructure]]:
    """
    Remove every gapped column from all records and return their structures.

    A pair that loses one endpoint leaves its partner unpaired. Pairs that
    enclose fewer than ``min_hairpin`` positions afterwards are unpaired too.
    """
    dropped = set(gap_columns(records))
    structures = []

    for record in records:
        try:
            aligned = parse_dotbracket(record.text.replace(MARK_GAP, MARK_UNPAIRED))
        except DotBracketError as error:
            raise StructureFileError(f"record {record.id!r}: {error}") from error

        kept = [
            column for column in range(1, aligned.length + 1) if column not in dropped
        ]

        if not kept:
            raise StructureFileError(f"record {record.id!r} has no gapless column")

        position = {column: index for index, column in enumerate(kept, start=1)}
        pairs = {
            (position[i], position[j])
            for i, j in aligned.pairs
            if i in position and j in position
        }
        pairs = {(i, j) for i, j in pairs if j - i - 1 >= min_hairpin}
        structures.append(
            (record.id, SecondaryStructure(length=len(kept), pairs=frozenset(pairs)))
        )

    logger.info("Dropped %s gapped columns from %s records", len(dropped), len(records))

    return structures


def _check_parentheses(text: str) -> None:
    opened: list[int] = []

    for position, mark in enumerate(text, start=1):
        if mark == "(":
            opened.append(position)
        elif mark == ")":
            if not opened:
                raise NewickError(f"unbalanced ')' at position {position}")

            opened.pop()

    if opened:
        raise NewickError(f"unbalanced '(' at position {opened[-1]}")


def parse_newick(text: str) -> Phylogeny:
    """
    Return the Phylogeny described by a Newick string.

    Branch lengths and internal labels are ignored. Internal nodes are named
    ``n1``, ``n2``, ... in level order, skipping names already used by leaves.
    """
    text = text.strip()
    _check_parentheses(text)

    try:
        tree = dendropy.Tree.get(data=text, schema="newick", preserve_underscores=True)
    except (DataParseError, ValueError) as error:
        raise NewickError(f"cannot parse Newick: {error}") from error

    nodes = list(tree.levelorder_node_iter())
    names: dict[int, str] = {}

    for node in nodes:
        if node.is_leaf():
            label = node.taxon.label if node.taxon is not None else None

            if not label:
                raise NewickError("every leaf needs a label")

            if label in names.values():
                raise NewickError(f"leaf label {label!r} is used twice")

            names[id(node)] = label

    leaf_names = set(names.values())
    counter = 0

    for node in nodes:
        if node.is_leaf():
            continue

        counter += 1

        while f"n{counter}" in leaf_names:
            counter += 1

        names[id(node)] = f"n{counter}"

    children = {
        names[id(node)]: tuple(names[id(child)] for child in node.child_nodes())
        for node in nodes
        if not node.is_leaf()
    }

    return Phylogeny(root=names[id(tree.seed_node)], children=children)


def read_newick(path: Path) -> Phylogeny:
    """Return the Phylogeny stored in a Newick file."""
    phylogeny = parse_newick(path.read_text(encoding="utf-8"))
    logger.info("Read phylogeny with %s leaves from %s", len(phylogeny.leaves), path)

    return phylogeny


class StockholmAlignment(BaseModel):
    """Aligned sequence rows of one family, with its consensus structure."""

    model_config = ConfigDict(frozen=True)

    name: str | None = None
    rows: dict[str, str]
    ss_cons: str
    newick: str | None = None


def normalize_wuss(text: str) -> str:
    """Return WUSS consensus text with every bracket type as ``()``."""
    marks = []

    for mark in text:
        if mark in WUSS_OPEN:
            marks.append(MARK_OPEN)
        elif mark in WUSS_CLOSE:
            marks.append(MARK_CLOSE)
        else:
            marks.append(MARK_UNPAIRED)

    return "".join(marks)


def read_stockholm(path: Path) -> StockholmAlignment:
    """Return the sequence rows and normalized consensus of a Stockholm file."""
    lines = path.read_text(encoding="utf-8").splitlines()

    if not lines or not lines[0].startswith("# STOCKHOLM"):
        logger.warning("%s has no Stockholm header", path)

    rows: dict[str, str] = {}
    ss_cons: list[str] = []
    newick: list[str] = []
    name = None

    for line in lines:
        line = line.strip()

        if line.startswith("//"):
            break

        if not line:
            continue

        if line.startswith("#=GC SS_cons"):
            ss_cons.append(line.split()[-1])
        elif line.startswith("#=GF ID"):
            name = line[len("#=GF ID") :].strip()
        elif line.startswith("#=GF NH"):
            newick.append(line[len("#=GF NH") :].strip())
        elif not line.startswith("#"):
            words = line.split()

            if len(words) != 2:
                raise StockholmError(f"{path}: malformed sequence row {line!r}")

            rows[words[0]] = rows.get(words[0], "") + words[1]

    if not ss_cons:
        raise StockholmError(f"{path}: no #=GC SS_cons line")

    if not rows:
        raise StockholmError(f"{path}: no sequence rows")

    consensus = normalize_wuss("".join(ss_cons))
    lengths = {len(row) for row in rows.values()} | {len(consensus)}

    if len(lengths) > 1:
        raise StockholmError(f"{path}: ragged alignment lengths {sorted(lengths)}")

    try:
        parse_dotbracket(consensus)
    except DotBracketError as error:
        raise StockholmError(f"{path}: consensus {error}") from error

    logger.info("Read %s aligned sequences from %s", len(rows), path)

    return StockholmAlignment(
        name=name, rows=rows, ss_cons=consensus, newick="".join(newick) or None
    )


def project_consensus(rows: dict[str, str], ss_cons: str) -> list[Record]:
    """
    Return one aligned structure per sequence from the consensus structure.

    A consensus pair is kept when both columns hold bases forming a canonical
    pair; gap columns become ``-`` and everything else is unpaired.
    """
    consensus = parse_dotbracket(normalize_wuss(ss_cons))
    records = []

    for row_id, row in rows.items():
        if len(row) != consensus.length:
            raise StockholmError(
                f"row {row_id!r} has length {len(row)}, consensus {consensus.length}"
            )

        bases = row.upper().replace("T", "U")
        marks = [
            MARK_GAP if base in SEQUENCE_GAP_MARKS else MARK_UNPAIRED for base in row
        ]

        for i, j in consensus.pairs:
            if bases[i - 1] + bases[j - 1] in CANONICAL_PAIRS:
                marks[i - 1], marks[j - 1] = MARK_OPEN, MARK_CLOSE

        records.append(Record(row_id, "".join(marks)))

    return records
