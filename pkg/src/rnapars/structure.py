"""RNA secondary structures and their dot-bracket notation."""

from __future__ import annotations

from functools import cached_property

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .const import MARK_CLOSE, MARK_OPEN, MARK_UNPAIRED, PSEUDOKNOT_MARKS

Pair = tuple[int, int]


class DotBracketError(ValueError):
    """Error raised when text is not a valid dot-bracket structure."""


class SecondaryStructure(BaseModel):
    """
    A sequence length plus a set of non-crossing base pairs.

    Positions are 1-based: every pair ``(i, j)`` satisfies ``1 <= i < j <= length``.
    """

    model_config = ConfigDict(frozen=True)

    length: int = Field(ge=0)
    pairs: frozenset[Pair] = frozenset()

    @model_validator(mode="after")
    def check_pairs(self) -> SecondaryStructure:
        """Reject out-of-range, shared or crossing pairs."""
        partner: dict[int, int] = {}

        for i, j in self.pairs:
            if not 1 <= i < j <= self.length:
                raise ValueError(f"pair {(i, j)} outside [1, {self.length}]")

            for position in (i, j):
                if position in partner:
                    raise ValueError(f"position {position} is paired twice")

            partner[i] = j
            partner[j] = i

        opened: list[int] = []

        for position in sorted(partner):
            if partner[position] > position:
                opened.append(position)
            elif opened.pop() != partner[position]:
                raise ValueError(f"pair ending at {position} crosses another pair")

        return self

    def __str__(self) -> str:
        return self.dotbracket

    @cached_property
    def dotbracket(self) -> str:
        """Return the structure in dot-bracket notation."""
        marks = [MARK_UNPAIRED] * self.length

        for i, j in self.pairs:
            marks[i - 1] = MARK_OPEN
            marks[j - 1] = MARK_CLOSE

        return "".join(marks)

    @property
    def num_base_pairs(self) -> int:
        return len(self.pairs)

    def satisfies_hairpin(self, theta: int) -> bool:
        """Return True if every pair encloses at least ``theta`` positions."""
        return all(j - i - 1 >= theta for i, j in self.pairs)


def parse_dotbracket(text: str) -> SecondaryStructure:
    """Return the SecondaryStructure described by a dot-bracket string."""
    opened: list[int] = []
    pairs = set()

    for position, mark in enumerate(text, start=1):
        if mark == MARK_OPEN:
            opened.append(position)
        elif mark == MARK_CLOSE:
            if not opened:
                raise DotBracketError(f"unbalanced ')' at position {position}")

            pairs.add((opened.pop(), position))
        elif mark in PSEUDOKNOT_MARKS:
            raise DotBracketError(
                f"pseudoknot bracket {mark!r} at position {position} is not supported"
            )
        elif mark != MARK_UNPAIRED:
            raise DotBracketError(f"illegal character {mark!r} at position {position}")

    if opened:
        raise DotBracketError(f"unbalanced '(' at position {opened[-1]}")

    return SecondaryStructure(length=len(text), pairs=frozenset(pairs))
