"""Tree builders and brute-force oracles shared by the test modules."""
from __future__ import annotations

from collections import deque

import numpy as np
from hypothesis import strategies as st

from treemi.treebank import ParseTree

LABELS = ("S", "NP", "VP", "PP", "DT", "NN")
WORDS = ("a", "b", "c", "d")


def tree(text: str) -> ParseTree:
    from treemi.treebank import parse_bracketed

    (t,) = parse_bracketed(text)
    return t


def random_nested(rng: np.random.Generator, max_nodes: int = 12, labels=LABELS, words=WORDS):
    """Random nested tree with at most ``max_nodes`` nodes (terminals included)."""
    budget = [max_nodes - 1]

    def grow(depth):
        label = str(rng.choice(labels))
        # preterminal when the budget is tight or by chance
        if budget[0] < 3 or depth > 4 or rng.random() < 0.35:
            budget[0] -= 1
            return (label, [str(rng.choice(words))])
        n_kids = int(rng.integers(1, 4))
        kids = []
        for _ in range(n_kids):
            if budget[0] < 2:
                break
            budget[0] -= 1
            kids.append(grow(depth + 1))
        if not kids:
            budget[0] -= 1
            return (label, [str(rng.choice(words))])
        return (label, kids)

    return grow(0)


def random_tree(rng: np.random.Generator, max_nodes: int = 12, **kw) -> ParseTree:
    return ParseTree.from_nested(random_nested(rng, max_nodes, **kw))


@st.composite
def trees(draw, max_nodes: int = 20):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_tree(np.random.default_rng(seed), max_nodes)


def bfs_distances(t: ParseTree) -> np.ndarray:
    """All-pairs path lengths by breadth-first search on the undirected tree."""
    n = len(t.labels)
    adj = [[] for _ in range(n)]
    for p, kids in enumerate(t.children):
        for k in kids:
            adj[p].append(k)
            adj[k].append(p)
    out = np.full((n, n), -1, dtype=np.int64)
    for s in range(n):
        out[s, s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for v in adj[u]:
                if out[s, v] < 0:
                    out[s, v] = out[s, u] + 1
                    q.append(v)
    return out


def complete_binary(depth: int, label: str = "X", pos: str = "P") -> ParseTree:
    """Complete binary tree whose preterminals sit ``depth`` levels below the root."""

    def build(d):
        if d == depth:
            return (pos, ["w"])
        return (label, [build(d + 1), build(d + 1)])

    return ParseTree.from_nested(build(0))


def right_chain(n_leaves: int, label: str = "X", pos: str = "P") -> ParseTree:
    """Maximally right-branching binary tree over ``n_leaves`` preterminals."""
    node = (pos, ["w"])
    for _ in range(n_leaves - 1):
        node = (label, [(pos, ["w"]), node])
    return ParseTree.from_nested(node)
