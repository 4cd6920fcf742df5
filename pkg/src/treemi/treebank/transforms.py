"""Treebank preprocessing: null removal, binarization, unary collapse and
tag reduction.

Each transformation is a pure function from tree to tree.  ``preprocess``
chains them according to a scheme.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Literal

from .tagmap import ARTIFICIAL_MARK, TagMap, base_label
from .trees import Nested, ParseTree

__all__ = [
    "NullMarkers",
    "Scheme",
    "binarize",
    "collapse_unary",
    "preprocess",
    "preprocess_corpus",
    "reduce_tags",
    "remove_nulls",
]

Direction = Literal["left", "right"]
Scheme = Literal["binarized", "unbinarized", "phrasal_only"]
SCHEMES = ("binarized", "unbinarized", "phrasal_only")


@dataclass(frozen=True)
class NullMarkers:
    """Which leaves count as phonologically null.

    A preterminal is null when its label starts with one of ``labels``.  A
    terminal is null when its token equals one of ``tokens`` (optionally
    followed by a ``-N`` co-index) or fully matches ``token_regex``.
    """

    labels: tuple[str, ...] = ("-NONE-",)
    tokens: tuple[str, ...] = ()
    token_regex: str | None = r"\*[^\s*]*\*(?:-\d+)?"

    def matches_token(self, token: str) -> bool:
        stem = re.sub(r"-\d+$", "", token)
        if token in self.tokens or stem in self.tokens:
            return True
        return bool(self.token_regex and re.fullmatch(self.token_regex, token))

    def matches_label(self, label: str) -> bool:
        return any(label.startswith(p) for p in self.labels)


def remove_nulls(tree: ParseTree, markers: NullMarkers = NullMarkers()) -> ParseTree | None:
    """Delete null leaves and any internal node left without children.

    Returns ``None`` when nothing survives; the caller drops the sentence.
    """

    def prune(item: Nested) -> Nested | None:
        if isinstance(item, str):
            return None if markers.matches_token(item) else item
        label, kids = item
        if markers.matches_label(label) and all(isinstance(k, str) for k in kids):
            return None
        kept = [k for k in (prune(k) for k in kids) if k is not None]
        return (label, kept) if kept else None

    pruned = prune(tree.to_nested())
    return None if pruned is None else ParseTree.from_nested(pruned)


def _head(item: Nested) -> str:
    return item if isinstance(item, str) else item[0]


def binarize(tree: ParseTree, direction: Direction = "right") -> ParseTree:
    """Replace every node with more than two children by a chain of binary
    nodes.

    ``right`` groups children from the right, ``(S A B C) -> (S A (S|<B-C> B C))``;
    ``left`` mirrors it.  Introduced nodes are labelled ``base|<children>``.
    """
    if direction not in ("left", "right"):
        raise ValueError(f"direction must be 'left' or 'right', not {direction!r}")

    def artificial(base: str, kids: list[Nested]) -> str:
        return f"{base}{ARTIFICIAL_MARK}<{'-'.join(_head(k) for k in kids)}>"

    def walk(item: Nested) -> Nested:
        if isinstance(item, str):
            return item
        label, kids = item
        kids = [walk(k) for k in kids]
        if len(kids) <= 2:
            return (label, kids)
        base = label.split(ARTIFICIAL_MARK, 1)[0]
        if direction == "right":
            node = (artificial(base, kids[-2:]), kids[-2:])
            for k in range(len(kids) - 3, 0, -1):
                node = (artificial(base, kids[k:]), [kids[k], node])
            return (label, [kids[0], node])
        node = (artificial(base, kids[:2]), kids[:2])
        for k in range(2, len(kids) - 1):
            node = (artificial(base, kids[:k + 1]), [node, kids[k]])
        return (label, [node, kids[-1]])

    return ParseTree.from_nested(walk(tree.to_nested()))


def collapse_unary(tree: ParseTree) -> ParseTree:
    """Collapse every chain of single-child internal nodes into its topmost
    node, which keeps its label and adopts the bottom node's children.

    ``(S (VP (VB run)))`` becomes ``(S run)``.
    """

    def walk(item: Nested) -> Nested:
        if isinstance(item, str):
            return item
        label, kids = item
        while len(kids) == 1 and not isinstance(kids[0], str):
            kids = kids[0][1]
        return (label, [walk(k) for k in kids])

    return ParseTree.from_nested(walk(tree.to_nested()))


def reduce_tags(tree: ParseTree, tagmap: TagMap, unmapped: Counter | None = None) -> ParseTree:
    """Map every non-terminal label through ``tagmap`` after :func:`base_label`.

    Unmapped tags become ``tagmap.default_category`` and are tallied into
    ``unmapped`` when given.
    """
    labels = [
        lab if term else tagmap(base_label(lab), unmapped)
        for lab, term in zip(tree.labels, tree.terminal)
    ]
    return tree.relabel(labels)


def preprocess(
    tree: ParseTree,
    tagmap: TagMap | None = None,
    *,
    scheme: Scheme = "binarized",
    direction: Direction = "right",
    markers: NullMarkers | None = NullMarkers(),
    max_length: int | None = 40,
    unmapped: Counter | None = None,
) -> ParseTree | None:
    """Run the full preprocessing chain on one tree.

    Returns ``None`` when the sentence is dropped (empty after null removal
    or longer than ``max_length`` tokens).
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if markers is not None:
        tree = remove_nulls(tree, markers)
        if tree is None:
            return None
    if max_length is not None and len(tree.leaves) > max_length:
        return None
    if scheme != "unbinarized":
        tree = binarize(tree, direction)
    tree = collapse_unary(tree)
    if tagmap is not None:
        tree = reduce_tags(tree, tagmap, unmapped)
    return tree


def preprocess_corpus(trees: Iterable[ParseTree], tagmap: TagMap | None = None,
                      **kwargs) -> Iterator[ParseTree]:
    for tree in trees:
        out = preprocess(tree, tagmap, **kwargs)
        if out is not None:
            yield out
