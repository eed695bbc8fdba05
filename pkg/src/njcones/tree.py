"""Agglomerated trees: unrooted binary trees whose internal nodes carry creation steps.

The central node O is implicit: an :class:`AgglomeratedTree` stores the three
subtrees hanging off O. Every other internal node is an :class:`Inner` with the
step at which NJ created it.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Union


class StepClass(enum.Enum):
    ALPHA = "alpha"  # stem + stem
    BETA = "beta"  # bouquet + bouquet
    GAMMA = "gamma"  # stem + bouquet

    @property
    def symbol(self) -> str:
        return {"alpha": "α", "beta": "β", "gamma": "γ"}[self.value]

    @property
    def letter(self) -> str:
        return self.value[0]

    @property
    def displacement(self) -> tuple[int, int]:
        return _DISPLACEMENT[self]

    @classmethod
    def of(cls, first_is_stem: bool, second_is_stem: bool) -> "StepClass":
        if first_is_stem and second_is_stem:
            return cls.ALPHA
        if not first_is_stem and not second_is_stem:
            return cls.BETA
        return cls.GAMMA

    @classmethod
    def from_letter(cls, ch: str) -> "StepClass":
        table = {"a": cls.ALPHA, "α": cls.ALPHA, "b": cls.BETA, "β": cls.BETA,
                 "g": cls.GAMMA, "γ": cls.GAMMA}
        try:
            return table[ch]
        except KeyError:
            raise ValueError(f"unknown step letter {ch!r}") from None


_DISPLACEMENT = {
    StepClass.ALPHA: (-2, 1),
    StepClass.BETA: (0, -1),
    StepClass.GAMMA: (-1, 0),
}


def name_key(name: str):
    """Sort key for taxon names; all-digit names compare numerically and first."""
    if name.isdigit():
        return (0, int(name), name)
    return (1, 0, name)


@dataclass(frozen=True)
class Leaf:
    name: str

    @property
    def is_leaf(self) -> bool:
        return True

    def leaves(self) -> Iterator[str]:
        yield self.name


@dataclass(frozen=True)
class Inner:
    step: int
    left: "Node"
    right: "Node"

    @property
    def is_leaf(self) -> bool:
        return False

    @property
    def children(self) -> tuple["Node", "Node"]:
        return (self.left, self.right)

    def leaves(self) -> Iterator[str]:
        yield from self.left.leaves()
        yield from self.right.leaves()


Node = Union[Leaf, Inner]


def min_name(node: Node):
    return min((name_key(x) for x in node.leaves()))


@dataclass(frozen=True)
class AgglomeratedTree:
    """Three subtrees attached to the central node O (label ∞, never printed)."""

    top: tuple[Node, Node, Node]

    def __post_init__(self):
        if len(self.top) != 3:
            raise ValueError("the central node must have exactly three children")

    @property
    def n(self) -> int:
        return sum(1 for _ in self.leaves())

    def leaves(self) -> Iterator[str]:
        for item in self.top:
            yield from item.leaves()

    def inner_nodes(self) -> Iterator[Inner]:
        stack = [x for x in self.top if not x.is_leaf]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(c for c in node.children if not c.is_leaf)

    def labels(self) -> list[int]:
        return sorted(node.step for node in self.inner_nodes())

    def is_agglomeration_order(self) -> bool:
        """True if labels are 1..n-3 and strictly decrease from O towards the leaves."""
        if self.labels() != list(range(1, self.n - 2)):
            return False
        for node in self.inner_nodes():
            for child in node.children:
                if not child.is_leaf and child.step >= node.step:
                    return False
        return True

    def step_classes(self) -> list[StepClass]:
        """Class of every join, ordered by creation step."""
        nodes = sorted(self.inner_nodes(), key=lambda v: v.step)
        return [StepClass.of(v.left.is_leaf, v.right.is_leaf) for v in nodes]
