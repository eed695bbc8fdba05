"""Ordered Newick strings.

Grammar (whitespace allowed between tokens, never emitted)::

    tree := "(" item "," item "," item ")"
    item := name | "@" int "(" item "," item ")"
    name := [A-Za-z0-9_.-]+

``@r(...)`` marks the internal node created at step ``r``. The same reader
accepts plain topology strings (no ``@`` labels) through
:func:`parse_topology`.
"""
from __future__ import annotations

import re
from collections import defaultdict

from .errors import GrammarError, LabelError, OrderError
from .tree import AgglomeratedTree, Inner, Leaf, Node, min_name, name_key

_NAME = re.compile(r"[A-Za-z0-9_.\-]+")
_INT = re.compile(r"[0-9]+")


class _Reader:
    def __init__(self, text: str, labelled: bool):
        self.text = text
        self.pos = 0
        self.labelled = labelled

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            got = self.peek() or "end of input"
            raise GrammarError(f"expected {ch!r}, found {got!r}", self.pos)
        self.pos += 1

    def group(self) -> list:
        self.expect("(")
        items = [self.item()]
        while self.peek() == ",":
            self.pos += 1
            items.append(self.item())
        self.expect(")")
        return items

    def item(self):
        ch = self.peek()
        if ch == "@":
            if not self.labelled:
                raise GrammarError("order label in a plain topology string", self.pos)
            self.pos += 1
            m = _INT.match(self.text, self.pos)
            if not m:
                raise GrammarError("expected an integer after '@'", self.pos)
            self.pos = m.end()
            step = int(m.group())
            start = self.pos
            kids = self.group()
            if len(kids) != 2:
                raise GrammarError(f"inner node @{step} has {len(kids)} children, expected 2", start)
            return Inner(step, kids[0], kids[1])
        if ch == "(":
            if self.labelled:
                raise GrammarError("inner node without an order label", self.pos)
            start = self.pos
            kids = self.group()
            if len(kids) != 2:
                raise GrammarError(f"inner node has {len(kids)} children, expected 2", start)
            return (kids[0], kids[1])
        m = _NAME.match(self.text, self.pos)
        if not m:
            got = ch or "end of input"
            raise GrammarError(f"expected a taxon name, found {got!r}", self.pos)
        self.pos = m.end()
        return Leaf(m.group()) if self.labelled else m.group()

    def tree(self):
        self.skip()
        start = self.pos
        items = self.group()
        if len(items) != 3:
            raise GrammarError(f"expected 3 top-level items, found {len(items)}", start)
        if self.peek():
            raise GrammarError("trailing characters", self.pos)
        return items


def _check_leaves(names):
    seen = set()
    for name in names:
        if name in seen:
            raise GrammarError(f"taxon {name!r} appears twice")
        seen.add(name)


def parse(text: str) -> AgglomeratedTree:
    """Read an ordered Newick string, enforcing the agglomeration-order invariants."""
    tree = AgglomeratedTree(tuple(_Reader(text, True).tree()))
    _check_leaves(list(tree.leaves()))
    n = tree.n
    if tree.labels() != list(range(1, n - 2)):
        raise LabelError(f"order labels {tree.labels()} are not a permutation of 1..{n - 3}")
    for node in tree.inner_nodes():
        for child in node.children:
            if not child.is_leaf and child.step >= node.step:
                raise OrderError(
                    f"label @{child.step} sits below @{node.step}; labels must decrease away from O")
    return tree


def parse_topology(text: str) -> tuple:
    """Read an unlabeled string such as ``((d,(a,b)),c,e)`` into nested tuples."""
    items = _Reader(text, False).tree()
    _check_leaves(list(_tuple_leaves(items)))
    return tuple(items)


def _tuple_leaves(item):
    if isinstance(item, str):
        yield item
    else:
        for x in item:
            yield from _tuple_leaves(x)


# -- canonical forms ------------------------------------------------------------

def _canon(node: Node) -> Node:
    if node.is_leaf:
        return node
    left, right = _canon(node.left), _canon(node.right)
    if min_name(right) < min_name(left):
        left, right = right, left
    return Inner(node.step, left, right)


def canonicalize(tree: AgglomeratedTree) -> AgglomeratedTree:
    """Children ordered by smallest taxon name below them, at every node and at O."""
    top = sorted((_canon(x) for x in tree.top), key=min_name)
    return AgglomeratedTree(tuple(top))


def _emit(node: Node, labels: bool) -> str:
    if node.is_leaf:
        return node.name
    inner = f"({_emit(node.left, labels)},{_emit(node.right, labels)})"
    return f"@{node.step}{inner}" if labels else inner


def serialize(tree: AgglomeratedTree) -> str:
    t = canonicalize(tree)
    return "(" + ",".join(_emit(x, True) for x in t.top) + ")"


def strip_labels(tree: AgglomeratedTree) -> str:
    """Canonical Newick with order labels removed; O stays the outermost node."""
    t = canonicalize(tree)
    return "(" + ",".join(_emit(x, False) for x in t.top) + ")"


def _adjacency(top) -> dict:
    """Unrooted adjacency from O's three items (nested tuples or Nodes)."""
    adj = defaultdict(list)
    counter = [0]

    def visit(item):
        if isinstance(item, str):
            return ("leaf", item)
        if isinstance(item, Leaf):
            return ("leaf", item.name)
        counter[0] += 1
        me = ("node", counter[0])
        kids = item.children if isinstance(item, Inner) else item
        for kid in kids:
            v = visit(kid)
            adj[me].append(v)
            adj[v].append(me)
        return me

    root = ("node", 0)
    for item in top:
        v = visit(item)
        adj[root].append(v)
        adj[v].append(root)
    return adj


def _topology_key(top) -> str:
    adj = _adjacency(top)
    leaves = [v for v in adj if v[0] == "leaf"]
    anchor = min(leaves, key=lambda v: name_key(v[1]))
    hub = adj[anchor][0]

    def render(v, parent):
        if v[0] == "leaf":
            return v[1], name_key(v[1])
        parts = [render(w, v) for w in adj[v] if w != parent]
        parts.sort(key=lambda p: p[1])
        return "(" + ",".join(p[0] for p in parts) + ")", parts[0][1]

    parts = [render(w, hub) for w in adj[hub] if w != anchor]
    parts.sort(key=lambda p: p[1])
    return "(" + ",".join([anchor[1]] + [p[0] for p in parts]) + ")"


def strip_order(tree: AgglomeratedTree) -> str:
    """Key of the plain unrooted leaf-labeled topology (O is an anonymous node)."""
    return _topology_key(tree.top)


def topology_key(text: str) -> str:
    """:func:`strip_order` key for a plain or ordered Newick string."""
    if "@" in text:
        return strip_order(parse(text))
    return _topology_key(parse_topology(text))


def canonical_topology(text: str) -> str:
    """Canonical form of a plain Newick string, keeping O as the outer node."""
    def canon(item):
        if isinstance(item, str):
            return item, name_key(item)
        parts = sorted((canon(x) for x in item), key=lambda p: p[1])
        return "(" + ",".join(p[0] for p in parts) + ")", parts[0][1]

    parts = sorted((canon(x) for x in parse_topology(text)), key=lambda p: p[1])
    return "(" + ",".join(p[0] for p in parts) + ")"


def nesting_depth(text: str) -> int:
    """Deepest parenthesis nesting; the "length" of a Newick string."""
    depth = best = 0
    for ch in text:
        if ch == "(":
            depth += 1
            best = max(best, depth)
        elif ch == ")":
            depth -= 1
    return best
