"""Sequential and structural distances between tree nodes, pair enumeration
and sampling at a fixed distance, and the joint distance histogram.

Pairs are ordered, never span two trees, and are enumerated tree by tree;
within a tree the first node runs over the selected nodes in surface
(preorder) order and the second node likewise.

Two routes exist for the same populations: the generator functions
(``enumerate_pairs_seq``/``enumerate_pairs_str`` + ``sample_pairs``) and the
vectorised :class:`PairIndex`.  They enumerate in the same order and draw
samples identically, so a sample taken either way is the same sample.
"""
from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Literal, Sequence

import numpy as np

from ._rng import as_rng
from .treebank.trees import ParseTree

__all__ = [
    "NODE_KINDS",
    "CorpusIndex",
    "DistanceHistogram",
    "NodePair",
    "PairIndex",
    "PairSample",
    "distance_joint_histogram",
    "enumerate_pairs_seq",
    "enumerate_pairs_str",
    "nested_mask",
    "path_lengths",
    "mean_seq_distance",
    "pair_children",
    "sample_pairs",
    "select_nodes",
    "sequential_distance",
    "structural_distance",
    "structural_matrix",
]

NodeKind = Literal["pos_only", "pos_and_phrasal", "phrasal_only"]
NODE_KINDS = ("pos_only", "pos_and_phrasal", "phrasal_only")


@dataclass(frozen=True)
class NodePair:
    tree: int
    a: int
    b: int
    x0: str
    x1: str


def sequential_distance(tree: ParseTree, a: int, b: int) -> int:
    pos = tree.leaf_position
    for n in (a, b):
        if not tree.is_preterminal(n):
            raise ValueError(f"node {n} ({tree.labels[n]!r}) is not a preterminal")
    return abs(pos[a] - pos[b])


def structural_distance(tree: ParseTree, a: int, b: int) -> int:
    """Number of edges on the path between ``a`` and ``b``."""
    n = len(tree)
    if not (0 <= a < n and 0 <= b < n):
        raise ValueError(f"nodes ({a}, {b}) are not both in this {n}-node tree")
    par, dep = tree.parent, tree.depth
    steps = 0
    while dep[a] > dep[b]:
        a, steps = par[a], steps + 1
    while dep[b] > dep[a]:
        b, steps = par[b], steps + 1
    while a != b:
        a, b, steps = par[a], par[b], steps + 2
    return steps


def select_nodes(tree: ParseTree, node_kind: NodeKind) -> tuple[int, ...]:
    if node_kind == "pos_only":
        return tree.preterminals
    if node_kind == "pos_and_phrasal":
        return tree.internal
    if node_kind == "phrasal_only":
        return tree.phrasal
    raise ValueError(f"unknown node kind {node_kind!r}")


def _up_paths(tree: ParseTree, sel: np.ndarray) -> np.ndarray:
    """Row k marks every node on the path from ``sel[k]`` up to the root."""
    par = np.asarray(tree.parent, dtype=np.intp)
    a = np.zeros((sel.size, len(par)), dtype=np.float32)
    rows = np.arange(sel.size)
    cur = sel
    while rows.size:
        a[rows, cur] = 1.0
        cur = par[cur]
        keep = cur >= 0
        rows, cur = rows[keep], cur[keep]
    return a


def path_lengths(tree: ParseTree, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
    """Path lengths from each node of ``rows`` to each node of ``cols``,
    via common-ancestor counts."""
    r = np.asarray(rows, dtype=np.intp)
    c = np.asarray(cols, dtype=np.intp)
    common = (_up_paths(tree, r) @ _up_paths(tree, c).T).astype(np.int64)
    dep = np.asarray(tree.depth, dtype=np.int64)
    return dep[r][:, None] + dep[c][None, :] - 2 * (common - 1)


def structural_matrix(tree: ParseTree, nodes: Sequence[int]) -> np.ndarray:
    """All-pairs path lengths among ``nodes``."""
    return path_lengths(tree, nodes, nodes)


def nested_mask(tree: ParseTree, rows: Sequence[int], dist: np.ndarray,
                cols: Sequence[int] | None = None) -> np.ndarray:
    """True where one node of the pair dominates the other.

    ``dist`` holds the path lengths from ``rows`` to ``cols`` (default: to
    ``rows`` again).  On a tree the path between two nodes is as short as
    their depth difference exactly when one lies above the other.
    """
    dep = np.asarray(tree.depth, dtype=np.int64)
    dr = dep[np.asarray(rows, dtype=np.intp)]
    dc = dr if cols is None else dep[np.asarray(cols, dtype=np.intp)]
    return dist == np.abs(dr[:, None] - dc[None, :])


def _seq_matrix(tree: ParseTree) -> tuple[tuple[int, ...], np.ndarray]:
    nodes = tree.preterminals
    pos = np.fromiter((tree.leaf_position[p] for p in nodes), dtype=np.int64, count=len(nodes))
    return nodes, np.abs(pos[:, None] - pos[None, :])


def enumerate_pairs_seq(trees: Sequence[ParseTree], r_seq: int) -> Iterator[NodePair]:
    """Every ordered pair of preterminals exactly ``r_seq`` tokens apart."""
    if r_seq < 1:
        raise ValueError("r_seq must be >= 1")
    for t, tree in enumerate(trees):
        pts = tree.preterminals
        for i, a in enumerate(pts):
            for j in (i - r_seq, i + r_seq):
                if 0 <= j < len(pts):
                    b = pts[j]
                    yield NodePair(t, a, b, tree.labels[a], tree.labels[b])


def enumerate_pairs_str(trees: Sequence[ParseTree], r_str: int,
                        node_kind: NodeKind = "pos_and_phrasal",
                        nested: bool = True) -> Iterator[NodePair]:
    """Every ordered pair of selected nodes exactly ``r_str`` edges apart.

    With ``nested=False`` pairs where one node dominates the other are
    skipped, leaving pairs whose subtrees are disjoint.
    """
    if r_str < 1:
        raise ValueError("r_str must be >= 1")
    for t, tree in enumerate(trees):
        nodes = select_nodes(tree, node_kind)
        if len(nodes) < 2:
            continue
        dist = structural_matrix(tree, nodes)
        hit = dist == r_str
        if not nested:
            hit &= ~nested_mask(tree, nodes, dist)
        for i, j in zip(*np.nonzero(hit)):
            a, b = nodes[i], nodes[j]
            yield NodePair(t, a, b, tree.labels[a], tree.labels[b])


@dataclass
class PairSample:
    pairs: list
    requested: int
    available: int

    @property
    def shortfall(self) -> int:
        return max(0, self.requested - self.available)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


def _draw(available: int, n_data: int, rng: np.random.Generator) -> np.ndarray:
    return rng.choice(available, size=min(n_data, available), replace=False)


def sample_pairs(stream: Iterable, n_data: int, seed, distance: int | None = None) -> PairSample:
    """Uniform sample without replacement of ``n_data`` items from ``stream``.

    When the stream holds fewer items the whole population is returned (in
    sampled order) and ``shortfall`` reports the gap.
    """
    if n_data < 1:
        raise ValueError("n_data must be >= 1")
    population = list(stream)
    if not population:
        where = "" if distance is None else f" at distance {distance}"
        raise ValueError(f"no pairs{where} to sample from")
    idx = _draw(len(population), n_data, as_rng(seed))
    return PairSample([population[i] for i in idx], n_data, len(population))


def pair_children(trees: Sequence[ParseTree], pairs: Iterable[NodePair]):
    """Child label pairs ``((y0, z0), (y1, z1))`` for each node pair."""
    out = []
    for p in pairs:
        tree = trees[p.tree]
        kids = []
        for n in (p.a, p.b):
            ch = tree.children[n]
            if len(ch) != 2:
                raise ValueError(
                    f"node {n} ({tree.labels[n]}) of tree {p.tree} has {len(ch)} children; "
                    "CFIB needs a binarized corpus")
            kids.append((tree.labels[ch[0]], tree.labels[ch[1]]))
        out.append(tuple(kids))
    return out


class CorpusIndex:
    """Flat per-node arrays over a whole corpus.

    Global node id ``offsets[t] + i`` is node ``i`` of tree ``t``.  Every
    label (terminal tokens included) gets an integer code in ``vocab``.
    """

    def __init__(self, trees: Sequence[ParseTree]):
        self.trees = list(trees)
        sizes = np.fromiter((len(t) for t in self.trees), dtype=np.int64, count=len(self.trees))
        self.offsets = np.concatenate([[0], np.cumsum(sizes)])
        offs = self.offsets[:-1].tolist()
        vocab: dict[str, int] = {}
        codes = np.array([vocab.setdefault(lab, len(vocab))
                          for t in self.trees for lab in t.labels], dtype=np.int32)
        n_kids = np.array([len(k) for t in self.trees for k in t.children], dtype=np.int32)
        kids = np.array([c + off for t, off in zip(self.trees, offs)
                         for k in t.children for c in k], dtype=np.int64)
        terminal = np.array([x for t in self.trees for x in t.terminal], dtype=bool)
        n = codes.size

        # children of node g sit at kids[first[g]:first[g] + n_kids[g]]
        first = np.cumsum(n_kids, dtype=np.int64) - n_kids
        owner = np.repeat(np.arange(n, dtype=np.int64), n_kids)
        parent = np.full(n, -1, dtype=np.int64)
        parent[kids] = owner
        two = np.flatnonzero(n_kids == 2)
        left = np.full(n, -1, dtype=np.int32)
        right = np.full(n, -1, dtype=np.int32)
        left[two] = codes[kids[first[two]]]
        right[two] = codes[kids[first[two] + 1]]
        preterminal = np.zeros(n, dtype=bool)
        one = np.flatnonzero(n_kids == 1)
        preterminal[one] = terminal[kids[first[one]]]

        depth = np.zeros(n, dtype=np.int64)
        cur = np.flatnonzero(parent >= 0)
        up = parent[cur]
        while cur.size:
            depth[cur] += 1
            up = parent[up]
            keep = up >= 0
            cur, up = cur[keep], up[keep]

        # preorder rank inside each tree from subtree sizes
        levels = [np.flatnonzero(depth == d) for d in range(int(depth.max(initial=0)) + 1)]
        size = np.ones(n, dtype=np.int64)
        for nodes in reversed(levels[1:]):
            np.add.at(size, parent[nodes], size[nodes])
        kid_size = size[kids]
        before = np.cumsum(kid_size) - kid_size
        before -= np.repeat(before[first[n_kids > 0]], n_kids[n_kids > 0])
        rank = np.zeros(n, dtype=np.int64)
        skip = np.zeros(n, dtype=np.int64)
        skip[kids] = before
        for nodes in levels[1:]:
            rank[nodes] = rank[parent[nodes]] + 1 + skip[nodes]
        tree_of = np.repeat(np.arange(len(self.trees)), sizes)

        self.vocab = vocab
        self.labels = list(vocab)
        self.codes = codes
        self.left = left
        self.right = right
        self.n_children = n_kids
        self.parent = parent
        self.depth = depth
        # position of each node in a corpus-wide preorder walk
        self.key = self.offsets[tree_of] + rank
        self.tree_of = tree_of
        self.terminal = terminal
        self.preterminal = preterminal

    def kind_mask(self, node_kind: NodeKind) -> np.ndarray:
        """Boolean mask of the nodes that ``select_nodes`` would pick."""
        if node_kind == "pos_only":
            return self.preterminal.copy()
        if node_kind == "pos_and_phrasal":
            return ~self.terminal
        if node_kind == "phrasal_only":
            return ~self.terminal & ~self.preterminal
        raise ValueError(f"unknown node kind {node_kind!r}")

    def code(self, label: str) -> int:
        try:
            return self.vocab[label]
        except KeyError:
            raise KeyError(f"label {label!r} does not occur in the corpus") from None

    def locate(self, g: int) -> tuple[int, int]:
        t = int(np.searchsorted(self.offsets, g, side="right") - 1)
        return t, int(g - self.offsets[t])

    def to_node_pairs(self, a: np.ndarray, b: np.ndarray) -> list[NodePair]:
        out = []
        for ga, gb in zip(a.tolist(), b.tolist()):
            t, la = self.locate(ga)
            _, lb = self.locate(gb)
            out.append(NodePair(t, la, lb, self.labels[self.codes[ga]], self.labels[self.codes[gb]]))
        return out


def _seq_pairs(corpus: CorpusIndex, rows: np.ndarray, cols: np.ndarray,
               distances: list[int]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Preterminal pairs ``r`` positions apart, both orders."""
    pts = np.flatnonzero(corpus.preterminal)
    pts = pts[np.argsort(corpus.key[pts], kind="stable")]
    tree = corpus.tree_of[pts]
    a_parts, b_parts, d_parts = [], [], []
    for r in distances:
        if r >= pts.size:
            continue
        lo, hi = pts[:-r], pts[r:]
        same = tree[:-r] == tree[r:]
        lo, hi = lo[same], hi[same]
        for x, y in ((lo, hi), (hi, lo)):
            keep = rows[x] & cols[y]
            a_parts.append(x[keep])
            b_parts.append(y[keep])
            d_parts.append(np.full(int(keep.sum()), r, dtype=np.int64))
    if not a_parts:
        z = np.zeros(0, dtype=np.int64)
        return z, z, z
    return np.concatenate(a_parts), np.concatenate(b_parts), np.concatenate(d_parts)


def _walk_up(parent: np.ndarray, nodes: np.ndarray, steps: int):
    """Yield ``(k, idx, ancestor, child_on_path)`` for k = 0..steps.

    ``idx`` indexes ``nodes`` whose k-th ancestor exists; ``child_on_path``
    is the (k-1)-th ancestor, or -1 at k = 0.
    """
    idx = np.arange(nodes.size)
    cur = nodes.astype(np.int64)
    prev = np.full(nodes.size, -1, dtype=np.int64)
    for k in range(steps + 1):
        yield k, idx, cur, prev
        up = parent[cur]
        ok = up >= 0
        idx, prev, cur = idx[ok], cur[ok], up[ok]
        if not idx.size:
            return


def _str_pairs(corpus: CorpusIndex, rows: np.ndarray, cols: np.ndarray, wanted: np.ndarray,
               nested: bool, chunk: int = 1 << 18) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Node pairs at the wanted path lengths, found by meeting at the lowest
    common ancestor: ``a`` climbs ``k`` steps, ``b`` climbs ``m`` steps, and
    the two climbs end at the same node through different children."""
    dmax = wanted.size - 1
    span = dmax + 1
    # every column node's climbs, sorted by (ancestor, steps)
    recs = [(np.full(idx.size, k), cols[idx], anc, child)
            for k, idx, anc, child in _walk_up(corpus.parent, cols, dmax)]
    m = np.concatenate([r[0] for r in recs])
    b_all = np.concatenate([r[1] for r in recs])
    u_all = np.concatenate([r[2] for r in recs])
    c_all = np.concatenate([r[3] for r in recs])
    rkey = u_all * span + m
    order = np.argsort(rkey, kind="stable")
    rkey, m, b_all, c_all = rkey[order], m[order], b_all[order], c_all[order]

    a_parts, b_parts, d_parts = [], [], []
    for start in range(0, rows.size, chunk):
        block = rows[start:start + chunk]
        for k, idx, anc, child in _walk_up(corpus.parent, block, dmax):
            lo = np.searchsorted(rkey, anc * span, side="left")
            hi = np.searchsorted(rkey, anc * span + (dmax - k), side="right")
            n = hi - lo
            total = int(n.sum())
            if not total:
                continue
            li = np.repeat(np.arange(idx.size), n)
            ri = np.repeat(lo - np.cumsum(n) + n, n) + np.arange(total)
            mm = m[ri]
            d = k + mm
            keep = wanted[d]
            if k > 0:
                keep &= (mm == 0) | (child[li] != c_all[ri])
            if not nested:
                keep &= (mm > 0) & (k > 0)
            a_parts.append(block[idx[li[keep]]])
            b_parts.append(b_all[ri[keep]])
            d_parts.append(d[keep])
    if not a_parts:
        z = np.zeros(0, dtype=np.int64)
        return z, z, z
    return np.concatenate(a_parts), np.concatenate(b_parts), np.concatenate(d_parts)


class PairIndex:
    """All ordered pairs of one kind, grouped by distance.

    ``mode`` is ``"seq"`` (preterminals, surface distance) or ``"str"``
    (nodes of ``node_kind``, path distance).  ``first``/``second`` restrict
    the label of the first/second node of each pair, and ``nested=False``
    drops pairs where one node dominates the other.
    """

    def __init__(self, corpus: CorpusIndex, mode: str, distances: Iterable[int],
                 node_kind: NodeKind = "pos_and_phrasal",
                 first: str | None = None, second: str | None = None, nested: bool = True):
        if mode not in ("seq", "str"):
            raise ValueError(f"mode must be 'seq' or 'str', not {mode!r}")
        self.corpus = corpus
        self.mode = mode
        self.node_kind = "pos_only" if mode == "seq" else node_kind
        self.distances = sorted(set(int(r) for r in distances))
        if not self.distances or self.distances[0] < 1:
            raise ValueError("distances must be positive")
        wanted = np.zeros(self.distances[-1] + 1, dtype=bool)
        wanted[self.distances] = True
        c_first = None if first is None else corpus.vocab.get(first, -2)
        c_second = None if second is None else corpus.vocab.get(second, -2)

        sel = corpus.kind_mask(self.node_kind)
        rows = sel if c_first is None else sel & (corpus.codes == c_first)
        cols = sel if c_second is None else sel & (corpus.codes == c_second)
        if mode == "seq":
            a, b, d = _seq_pairs(corpus, rows, cols, self.distances)
        else:
            a, b, d = _str_pairs(corpus, np.flatnonzero(rows), np.flatnonzero(cols),
                                 wanted, nested)
        # enumeration order: by distance, then first node, then second node
        order = np.lexsort((corpus.key[b], corpus.key[a], d))
        self._a, self._b, d = a[order], b[order], d[order]
        edges = np.searchsorted(d, self.distances + [self.distances[-1] + 1])
        self._span = {r: (int(edges[k]), int(edges[k + 1])) for k, r in enumerate(self.distances)}

    def count(self, r: int) -> int:
        lo, hi = self._span.get(r, (0, 0))
        return hi - lo

    def pairs(self, r: int) -> tuple[np.ndarray, np.ndarray]:
        if r not in self._span:
            raise KeyError(f"distance {r} was not indexed")
        lo, hi = self._span[r]
        return self._a[lo:hi], self._b[lo:hi]

    def sample(self, r: int, n_data: int, seed) -> tuple[np.ndarray, np.ndarray, int]:
        """Same draw as :func:`sample_pairs` on the equivalent stream.

        Returns first-node ids, second-node ids and the population size.
        """
        if n_data < 1:
            raise ValueError("n_data must be >= 1")
        a, b = self.pairs(r)
        if a.size == 0:
            raise ValueError(f"no pairs at distance {r}")
        idx = _draw(a.size, n_data, as_rng(seed))
        return a[idx], b[idx], int(a.size)

    def labels(self, r: int) -> tuple[np.ndarray, np.ndarray]:
        a, b = self.pairs(r)
        return self.corpus.codes[a], self.corpus.codes[b]


@dataclass
class DistanceHistogram:
    """Counts of ordered preterminal pairs by ``(r_str, r_seq)``."""

    counts: Counter = field(default_factory=Counter)

    def __add__(self, other: "DistanceHistogram") -> "DistanceHistogram":
        return DistanceHistogram(self.counts + other.counts)

    def __bool__(self):
        return bool(self.counts)

    def marginal_str(self) -> dict[int, int]:
        out: Counter = Counter()
        for (rs, _), c in self.counts.items():
            out[rs] += c
        return dict(sorted(out.items()))

    def rows(self) -> list[tuple[int, int, int]]:
        return [(rs, rq, c) for (rs, rq), c in sorted(self.counts.items())]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r_str", "r_seq", "count"])
        w.writerows(self.rows())
        return buf.getvalue()


def distance_joint_histogram(trees: Iterable[ParseTree]) -> DistanceHistogram:
    keys: list[np.ndarray] = []
    hist: Counter = Counter()
    pending = 0
    scale = 1 << 20

    def flush():
        if keys:
            u, c = np.unique(np.concatenate(keys), return_counts=True)
            for k, n in zip(u.tolist(), c.tolist()):
                hist[(k // scale, k % scale)] += n
            keys.clear()

    for tree in trees:
        nodes, seq = _seq_matrix(tree)
        if len(nodes) < 2:
            continue
        rstr = structural_matrix(tree, nodes)
        off = ~np.eye(len(nodes), dtype=bool)
        keys.append(rstr[off] * scale + seq[off])
        pending += keys[-1].size
        if pending > 5_000_000:
            flush()
            pending = 0
    flush()
    return DistanceHistogram(hist)


def mean_seq_distance(hist: DistanceHistogram) -> dict[int, float]:
    """Count-weighted mean ``r_seq`` at each ``r_str``."""
    tot: Counter = Counter()
    wsum: Counter = Counter()
    for (rs, rq), c in hist.counts.items():
        tot[rs] += c
        wsum[rs] += c * rq
    return {rs: wsum[rs] / tot[rs] for rs in sorted(tot) if tot[rs] > 0}
