"""
Uniform random secondary structures and complete binary phylogenies.

Structures are drawn exactly uniformly among all non-crossing structures of
a given length whose hairpins hold at least ``theta`` unpaired positions, by
unranking a uniform rank against the structure counts.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .const import DEFAULT_HEIGHT, DEFAULT_THETA, logger
from .phylogeny import Phylogeny
from .structure import Pair, SecondaryStructure

MAX_SEED = 2**64 - 1


class SamplerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    length: int = Field(ge=1)
    theta: int = Field(default=DEFAULT_THETA, ge=0)
    height: int = Field(default=DEFAULT_HEIGHT, ge=1)
    seed: int = Field(default=0, ge=0, le=MAX_SEED)


@lru_cache(maxsize=64)
def _count_table(length: int, theta: int) -> tuple[int, ...]:
    counts = [1] * (length + 1)

    for m in range(1, length + 1):
        counts[m] = counts[m - 1] + sum(
            counts[k - 2] * counts[m - k] for k in range(theta + 2, m + 1)
        )

    return tuple(counts)


def count_structures(length: int, theta: int = DEFAULT_THETA) -> int:
    """
    Return the number of structures of ``length`` with hairpins of at least theta.

    The first position is either unpaired, or paired with some ``k`` whose
    enclosed region is at least ``theta`` long.
    """
    if length < 0:
        raise ValueError(f"length {length} is negative")

    return _count_table(length, theta)[length]


def _uniform_rank(count: int, rng: np.random.Generator) -> int:
    """Return an integer drawn uniformly from ``[0, count)`` by rejection."""
    bits = max(count - 1, 1).bit_length()
    width = (bits + 7) // 8
    mask = (1 << bits) - 1

    while True:
        rank = int.from_bytes(rng.bytes(width), "big") & mask

        if rank < count:
            return rank


def unrank_structure(length: int, theta: int, rank: int) -> SecondaryStructure:
    """Return the structure at ``rank`` in first-position decomposition order."""
    counts = _count_table(length, theta)

    if not 0 <= rank < counts[length]:
        raise ValueError(f"rank {rank} outside [0, {counts[length]})")

    pairs: list[Pair] = []
    pending = [(1, length, rank)]

    while pending:
        start, size, rank = pending.pop()

        while size > 0:
            if rank < counts[size - 1]:
                start, size = start + 1, size - 1
                continue

            rank -= counts[size - 1]

            for k in range(theta + 2, size + 1):
                block = counts[k - 2] * counts[size - k]

                if rank < block:
                    inner, outer = divmod(rank, counts[size - k])
                    pairs.append((start, start + k - 1))
                    pending.append((start + 1, k - 2, inner))
                    start, size, rank = start + k, size - k, outer
                    break

                rank -= block

    return SecondaryStructure(length=length, pairs=frozenset(pairs))


def sample_structure(
    config: SamplerConfig, rng: np.random.Generator | None = None
) -> SecondaryStructure:
    """Return a uniformly drawn structure; the same generator state repeats it."""
    if rng is None:
        rng = np.random.default_rng(config.seed)

    rank = _uniform_rank(count_structures(config.length, config.theta), rng)

    return unrank_structure(config.length, config.theta, rank)


def leaf_id(index: int, height: int) -> str:
    width = len(str(2**height))

    return f"leaf{index:0{width}d}"


def complete_binary_phylogeny(height: int) -> Phylogeny:
    """
    Return the complete binary phylogeny with ``2**height`` leaves.

    Nodes are numbered as in a binary heap; internal node ``k`` is ``n{k}``.
    """
    first_leaf = 2**height

    def name(position: int) -> str:
        if position >= first_leaf:
            return leaf_id(position - first_leaf + 1, height)

        return f"n{position}"

    children = {
        name(position): (name(2 * position), name(2 * position + 1))
        for position in range(1, first_leaf)
    }

    return Phylogeny(root=name(1), children=children)


def sample_phylogeny(
    config: SamplerConfig,
) -> tuple[Phylogeny, dict[str, SecondaryStructure]]:
    """Return a complete binary phylogeny with a random structure at each leaf."""
    phylogeny = complete_binary_phylogeny(config.height)
    leaves = phylogeny.leaves
    streams = np.random.SeedSequence(config.seed).spawn(len(leaves))
    structures = {
        leaf: sample_structure(config, np.random.default_rng(stream))
        for leaf, stream in zip(leaves, streams)
    }
    logger.debug(
        "Sampled %s structures of length %s with seed %s",
        len(structures),
        config.length,
        config.seed,
    )

    return phylogeny, structures


def replicate_seeds(seed: int, replicates: int) -> list[int]:
    """Return one independent 64-bit seed per replicate, derived from ``seed``."""
    streams = np.random.SeedSequence(seed).spawn(replicates)

    return [int(stream.generate_state(1, dtype=np.uint64)[0]) for stream in streams]
