from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .trees import ParseTree

__all__ = ["TreeStats", "tree_stats"]


@dataclass(frozen=True)
class TreeStats:
    """Shape statistics of a corpus of unpreprocessed trees.

    Depth is averaged over trees.  Branching and the unary proportion are
    taken over internal nodes, excluding preterminal-to-terminal
    productions; they are ``None`` when no such node exists.  Standard
    deviations are population (ddof=0) values.
    """

    n_trees: int
    mean_depth: float
    depth_sd: float
    mean_branching: float | None
    branching_sd: float | None
    prop_unary: float | None

    def as_row(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def tree_stats(trees: Iterable[ParseTree]) -> TreeStats:
    depths: list[int] = []
    branching: list[int] = []
    for tree in trees:
        depths.append(max(tree.depth))
        branching.extend(len(tree.children[i]) for i in tree.phrasal)
    if not depths:
        raise ValueError("tree_stats needs at least one tree")
    d = np.asarray(depths, dtype=float)
    if branching:
        b = np.asarray(branching, dtype=float)
        mean_b, sd_b = float(b.mean()), float(b.std())
        unary = float(np.count_nonzero(b == 1) / b.size)
    else:
        mean_b = sd_b = unary = None
    return TreeStats(len(depths), float(d.mean()), float(d.std()), mean_b, sd_b, unary)
