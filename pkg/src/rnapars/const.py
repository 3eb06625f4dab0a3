"""Constant values relied on throughout the package."""

import logging

from rich.console import Console
from rich.logging import RichHandler

MARK_OPEN = "("
MARK_CLOSE = ")"
MARK_UNPAIRED = "."
MARK_GAP = "-"

# Bracket characters from extended notations that would encode crossing pairs.
PSEUDOKNOT_MARKS = frozenset("[]{}<>")

# Stockholm sequence rows may use any of these for alignment gaps.
SEQUENCE_GAP_MARKS = frozenset("-._~")

CANONICAL_PAIRS = frozenset({"AU", "UA", "GC", "CG", "GU", "UG"})

DEFAULT_THETA = 3
DEFAULT_HEIGHT = 5
DEFAULT_MAX_ROUNDS = 100
DEFAULT_ORACLE_CAP = 12
DEFAULT_MAPPING_CAP = 8
DEFAULT_MAX_LENGTH = 100

ENV_THREADS = "RNAPARS_THREADS"

STRUCTURES_FILE = "structures.txt"
TREE_FILE = "tree.nwk"
META_FILE = "meta.json"

INFINITY = float("inf")

logging.basicConfig(
    level=logging.INFO,
    format="%(message)s",
    handlers=[RichHandler(console=Console(stderr=True))],
)
logger = logging.getLogger("rnapars")
