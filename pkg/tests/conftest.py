"""Pytest shared support logic for testing."""

import time
from collections.abc import Callable, Iterator
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest
from faker import Faker
from rnapars.const import STRUCTURES_FILE, TREE_FILE
from rnapars.oracle import enumerate_structures
from rnapars.phylogeny import Phylogeny
from rnapars.structure import parse_dotbracket
from rnapars.tree import RnaTree, to_tree

RANGE_MAX = 20

THREE_LEAF_NEWICK = "((x,y),z);"


def tree_of(text: str) -> RnaTree:
    """Return the RNA tree of a dot-bracket string."""
    return to_tree(parse_dotbracket(text))


def trees_of(*texts: str) -> list[RnaTree]:
    """Return the RNA trees of several dot-bracket strings."""
    return [tree_of(text) for text in texts]


def as_structure_file(records: dict[str, str]) -> str:
    """Return records as the text of a structure file."""
    return "".join(f">{record_id}\n{text}\n" for record_id, text in records.items())


def random_trees(
    rng: np.random.Generator, count: int, length: int
) -> Iterator[RnaTree]:
    """Yield random trees by drawing independent non-crossing pair sets."""
    for _ in range(count):
        marks: list[str] = []
        opened = 0

        for position in range(length):
            remaining = length - position
            choice = rng.integers(3)

            if opened and (choice == 0 or remaining == opened):
                marks.append(")")
                opened -= 1
            elif choice == 1 and remaining > opened + 1:
                marks.append("(")
                opened += 1
            else:
                marks.append(".")

        yield tree_of("".join(marks))


@lru_cache(maxsize=16)
def trees_of_length(length: int) -> tuple[RnaTree, ...]:
    """Return the tree of every structure of ``length``, in dot-bracket order."""
    return tuple(to_tree(structure) for structure in enumerate_structures(length))


def enumerated_trees(
    rng: np.random.Generator, count: int, length: int
) -> list[RnaTree]:
    """Return ``count`` trees drawn with replacement from every tree of ``length``."""
    pool = trees_of_length(length)

    return [pool[pick] for pick in rng.integers(len(pool), size=count)]


def best_time(func: Callable[..., object], *args: object, repeats: int = 3) -> float:
    """Return the fastest of several wall clock timings of ``func(*args)``."""
    timings = []

    for _ in range(repeats):
        start = time.perf_counter()
        func(*args)
        timings.append(time.perf_counter() - start)

    return min(timings)

def caterpillar(leaves: list[str]) -> Phylogeny:
    """Return a rooted caterpillar phylogeny over ``leaves``."""
    children: dict[str, tuple[str, ...]] = {}
    below = leaves[0]

    for position, leaf in enumerate(leaves[1:], start=1):
        node = f"c{position}"
        children[node] = (below, leaf)
        below = node

    return Phylogeny(root=below, children=children)


@pytest.fixture
def range_cap(faker: Faker) -> int:
    """Return a random upper bound for ranges in tests."""
    return faker.random_int(min=2, max=RANGE_MAX)


@pytest.fixture
def seed(faker: Faker) -> int:
    return faker.random_int(min=0, max=2**32)


@pytest.fixture
def rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


@pytest.fixture
def three_leaf_phylogeny() -> Phylogeny:
    """Return the phylogeny ((x,y),z) with internal nodes u and r."""
    return Phylogeny(root="r", children={"r": ("u", "z"), "u": ("x", "y")})


@pytest.fixture
def three_leaf_trees() -> dict[str, RnaTree]:
    return {
        "x": tree_of("((..))"),
        "y": tree_of("((..))"),
        "z": tree_of("(....)"),
    }


@pytest.fixture
def three_leaf_records() -> dict[str, str]:
    return {"x": "((..))", "y": "((..))", "z": "(....)"}


@pytest.fixture
def dataset_dir(fs, three_leaf_records: dict[str, str]) -> Path:
    """Return a dataset directory on a fake filesystem."""
    path = Path("/data/family-a")
    contents = as_structure_file(three_leaf_records)
    fs.create_file(path / STRUCTURES_FILE, contents=contents)
    fs.create_file(path / TREE_FILE, contents=THREE_LEAF_NEWICK + "\n")

    return path
