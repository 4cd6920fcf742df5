"""Ordered labelled trees and a reader/writer for Penn-style bracketed text.

A tree is stored as flat tuples indexed by node id: ``labels[i]``,
``children[i]`` and ``terminal[i]``.  Terminal nodes carry the surface
token as their label and have no children.  Trees are immutable; all
transformations build new trees.

>>> t = parse_bracketed("(S (NP (NN dog)) (VP (VBD ran)))")[0]
>>> t.tokens()
('dog', 'ran')
>>> write_bracketed(t)
'(S (NP (NN dog)) (VP (VBD ran)))'
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Sequence, Union

__all__ = [
    "Node",
    "ParseError",
    "ParseTree",
    "iter_bracketed",
    "parse_bracketed",
    "read_treebank",
    "write_bracketed",
]

#: Nested form used by the transformations: a terminal is a ``str``, an
#: internal node is ``(label, [child, ...])``.
Nested = Union[str, tuple]


class ParseError(ValueError):
    """Malformed bracketed input.  Carries 1-based ``line`` and ``column``."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class Node(NamedTuple):
    label: str
    children: tuple[int, ...]
    is_terminal: bool


@dataclass(frozen=True, eq=False)
class ParseTree:
    labels: tuple[str, ...]
    children: tuple[tuple[int, ...], ...]
    terminal: tuple[bool, ...]
    root: int = 0

    def __post_init__(self):
        n = len(self.labels)
        if not (len(self.children) == len(self.terminal) == n):
            raise ValueError("labels, children and terminal differ in length")
        if not 0 <= self.root < n:
            raise ValueError("root index out of range")
        seen = [0] * n
        for i, kids in enumerate(self.children):
            if not self.labels[i]:
                raise ValueError(f"node {i} has an empty label")
            if self.terminal[i] and kids:
                raise ValueError(f"terminal node {i} has children")
            if not self.terminal[i] and not kids:
                raise ValueError(f"internal node {i} ({self.labels[i]}) has no children")
            for k in kids:
                seen[k] += 1
        if seen[self.root]:
            raise ValueError("root has a parent")
        for i in range(n):
            if i != self.root and seen[i] != 1:
                raise ValueError(f"node {i} has {seen[i]} parents")
        if len(self.preorder) != n:
            raise ValueError("tree is not connected")

    # construction -------------------------------------------------------

    @classmethod
    def from_nested(cls, nested: Nested) -> "ParseTree":
        """Build a tree from nested ``(label, [children])`` form, numbering
        nodes in preorder (root = 0)."""
        labels: list[str] = []
        children: list[list[int]] = []
        terminal: list[bool] = []
        stack = [(nested, -1)]
        while stack:
            item, parent = stack.pop()
            idx = len(labels)
            if parent >= 0:
                children[parent].append(idx)
            if isinstance(item, str):
                labels.append(item)
                children.append([])
                terminal.append(True)
            else:
                label, kids = item
                labels.append(label)
                children.append([])
                terminal.append(False)
                for kid in reversed(kids):
                    stack.append((kid, idx))
        return cls(tuple(labels), tuple(tuple(c) for c in children), tuple(terminal))

    def to_nested(self, node: int | None = None) -> Nested:
        node = self.root if node is None else node
        built: dict[int, Nested] = {}
        for i in reversed(self.subtree_preorder(node)):
            if self.terminal[i]:
                built[i] = self.labels[i]
            else:
                built[i] = (self.labels[i], [built.pop(k) for k in self.children[i]])
        return built[node]

    # structure ----------------------------------------------------------

    def __len__(self) -> int:
        return len(self.labels)

    def node(self, i: int) -> Node:
        return Node(self.labels[i], self.children[i], self.terminal[i])

    def subtree_preorder(self, node: int) -> list[int]:
        out = []
        stack = [node]
        while stack:
            i = stack.pop()
            out.append(i)
            stack.extend(reversed(self.children[i]))
        return out

    @cached_property
    def preorder(self) -> tuple[int, ...]:
        return tuple(self.subtree_preorder(self.root))

    @cached_property
    def parent(self) -> tuple[int, ...]:
        par = [-1] * len(self.labels)
        for i, kids in enumerate(self.children):
            for k in kids:
                par[k] = i
        return tuple(par)

    @cached_property
    def depth(self) -> tuple[int, ...]:
        dep = [0] * len(self.labels)
        for i in self.preorder:
            for k in self.children[i]:
                dep[k] = dep[i] + 1
        return tuple(dep)

    @cached_property
    def leaves(self) -> tuple[int, ...]:
        """Terminal node ids in surface order."""
        return tuple(i for i in self.preorder if self.terminal[i])

    def is_preterminal(self, i: int) -> bool:
        kids = self.children[i]
        return len(kids) == 1 and self.terminal[kids[0]]

    @cached_property
    def preterminals(self) -> tuple[int, ...]:
        """Preterminal (POS) node ids in surface order."""
        return tuple(i for i in self.preorder if self.is_preterminal(i))

    @cached_property
    def phrasal(self) -> tuple[int, ...]:
        """Internal nodes that are not preterminals, in preorder."""
        return tuple(i for i in self.preorder
                     if not self.terminal[i] and not self.is_preterminal(i))

    @cached_property
    def internal(self) -> tuple[int, ...]:
        return tuple(i for i in self.preorder if not self.terminal[i])

    @cached_property
    def leaf_position(self) -> dict[int, int]:
        """Map from terminal or preterminal id to its 0-based surface index."""
        pos = {leaf: k for k, leaf in enumerate(self.leaves)}
        for p in self.preterminals:
            pos[p] = pos[self.children[p][0]]
        return pos

    def tokens(self) -> tuple[str, ...]:
        return tuple(self.labels[i] for i in self.leaves)

    def relabel(self, labels: Sequence[str]) -> "ParseTree":
        return ParseTree(tuple(labels), self.children, self.terminal, self.root)

    # comparison / display ------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, ParseTree):
            return NotImplemented
        return write_bracketed(self) == write_bracketed(other)

    def __hash__(self):
        return hash(write_bracketed(self))

    def __str__(self):
        return write_bracketed(self)

    def __repr__(self):
        return f"ParseTree({write_bracketed(self)!r})"


def write_bracketed(tree: ParseTree) -> str:
    """Canonical single-space bracketed form."""
    parts: list[str] = []
    stack: list[int | None] = [tree.root]
    while stack:
        i = stack.pop()
        if i is None:
            parts.append(")")
            continue
        if parts and parts[-1] != "(":
            parts.append(" ")
        if tree.terminal[i]:
            parts.append(tree.labels[i])
        else:
            parts.append("(")
            parts.append(tree.labels[i])
            stack.append(None)
            stack.extend(reversed(tree.children[i]))
    return "".join(parts)


def _tokenize(text: str) -> Iterator[tuple[str, int, int]]:
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line, col = line + 1, 1
            i += 1
        elif ch.isspace():
            i += 1
            col += 1
        elif ch in "()":
            yield ch, line, col
            i += 1
            col += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            yield text[i:j], line, col
            col += j - i
            i = j


def iter_bracketed(text: str, strict: bool = False) -> Iterator[ParseTree]:
    """Yield trees from bracketed text.

    An outer bracket group without a label, as in ``( (S ...) )``, is a
    forest wrapper: with ``strict=False`` each of its children is yielded
    as a separate tree, with ``strict=True`` it is a parse error.
    """
    # stack entries: [label, children, line, col]; label None = not yet read
    stack: list[list] = []
    expect_label = False
    last = (1, 1)
    for tok, line, col in _tokenize(text):
        last = (line, col)
        if tok == "(":
            if expect_label:
                stack[-1][0] = ""
            stack.append([None, [], line, col])
            expect_label = True
        elif tok == ")":
            if not stack:
                raise ParseError("unbalanced ')'", line, col)
            label, kids, l0, c0 = stack.pop()
            expect_label = False
            if label is None:
                raise ParseError("empty bracket group", l0, c0)
            if not kids:
                raise ParseError(f"node {label!r} has no children", l0, c0)
            if stack:
                if label == "":
                    raise ParseError("empty label", l0, c0)
                stack[-1][1].append((label, kids))
            elif label == "":
                if strict:
                    raise ParseError("empty label on top-level group", l0, c0)
                for kid in kids:
                    if isinstance(kid, str):
                        raise ParseError(f"bare token {kid!r} inside forest wrapper", l0, c0)
                    yield ParseTree.from_nested(kid)
            else:
                yield ParseTree.from_nested((label, kids))
        else:
            if not stack:
                raise ParseError(f"token {tok!r} outside brackets", line, col)
            if expect_label:
                stack[-1][0] = tok
                expect_label = False
            else:
                stack[-1][1].append(tok)
    if stack:
        _, _, l0, c0 = stack[-1]
        raise ParseError(f"unbalanced '(' opened here, input ended at line {last[0]}",
                         l0, c0)


def parse_bracketed(text: str, strict: bool = False) -> list[ParseTree]:
    return list(iter_bracketed(text, strict=strict))


def read_treebank(paths: str | Iterable[str], strict: bool = False) -> list[ParseTree]:
    """Read every tree from one or more UTF-8 bracketed files."""
    if isinstance(paths, str):
        paths = [paths]
    trees: list[ParseTree] = []
    for path in paths:
        with open(path, encoding="utf-8") as f:
            trees.extend(iter_bracketed(f.read(), strict=strict))
    return trees
