"""Entropy, mutual information and CFIB estimation from discrete samples.

All quantities are in nats.  Every entropy estimator takes a count table
(a :class:`CountTable`, any mapping of symbol -> count, or an array of
counts) and only looks at the non-zero counts.

Mutual information is assembled from three entropies,
``I = S(first) + S(second) - S(first, second)``, with the same estimator
applied to each.  CFIB is the same quantity where the "symbols" are the
ordered child pairs of two nodes whose labels are held fixed.
"""
from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "ESTIMATORS",
    "CfibEstimate",
    "CountTable",
    "MiEstimate",
    "UnreliableEstimateWarning",
    "cfib",
    "chao_shen_entropy",
    "digamma",
    "entropy",
    "grassberger_entropy",
    "horvitz_thompson_entropy",
    "is_unreliable",
    "mi_from_joint",
    "miller_madow_entropy",
    "mutual_information",
    "plugin_entropy",
    "zahl_jackknife_entropy",
]


class UnreliableEstimateWarning(RuntimeWarning):
    pass


class CountTable(Counter):
    """Frequency table over symbols (or symbol tuples).

    Tables merge with ``+`` and compare equal regardless of zero entries.
    """

    @classmethod
    def from_samples(cls, samples: Iterable) -> "CountTable":
        return cls(samples)

    def __add__(self, other):
        return CountTable(super().__add__(other))

    @property
    def N(self) -> int:
        return sum(self.values())

    def array(self) -> np.ndarray:
        return np.fromiter((c for c in self.values() if c > 0), dtype=np.int64)


# -- digamma ---------------------------------------------------------------

_RECURRENCE_FLOOR = 10.0


def digamma(x):
    """Digamma function for positive real arguments.

    Shifts the argument up to at least 10 with psi(x) = psi(x + 1) - 1/x and
    then applies the asymptotic expansion through the x**-10 term.
    """
    arr = np.array(x, dtype=np.float64, ndmin=1)
    if np.any(~(arr > 0)):
        raise ValueError("digamma is only implemented for positive arguments")
    shift = np.zeros_like(arr)
    while True:
        small = arr < _RECURRENCE_FLOOR
        if not small.any():
            break
        shift[small] -= 1.0 / arr[small]
        arr[small] += 1.0
    inv2 = 1.0 / (arr * arr)
    tail = inv2 * (1 / 12 - inv2 * (1 / 120 - inv2 * (1 / 252 - inv2 * (1 / 240 - inv2 / 132))))
    out = shift + np.log(arr) - 0.5 / arr - tail
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


# -- count handling --------------------------------------------------------

def _counts(table) -> np.ndarray:
    if isinstance(table, CountTable):
        c = table.array()
    elif isinstance(table, Mapping):
        c = np.fromiter(table.values(), dtype=np.int64)
    else:
        c = np.asarray(table)
        if c.dtype.kind == "f":
            if np.any(c != np.round(c)):
                raise ValueError("counts must be integers")
            c = c.astype(np.int64)
        c = c.ravel().astype(np.int64, copy=False)
    if np.any(c < 0):
        raise ValueError("counts must be non-negative")
    c = c[c > 0]
    if c.size == 0:
        raise ValueError("entropy of an empty table (N = 0) is undefined")
    return c


def _xlogx(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=np.float64)
    return np.where(c > 0, c * np.log(np.where(c > 0, c, 1.0)), 0.0)


# -- estimators ------------------------------------------------------------

def plugin_entropy(table) -> float:
    c = _counts(table)
    n = c.sum()
    p = c / n
    return float(-(p * np.log(p)).sum())


def grassberger_entropy(table) -> float:
    """psi(N) - (1/N) sum_i n_i psi(n_i)."""
    c = _counts(table)
    n = c.sum()
    return float(digamma(float(n)) - np.dot(c, digamma(c.astype(np.float64))) / n)


def miller_madow_entropy(table) -> float:
    c = _counts(table)
    return plugin_entropy(c) + (c.size - 1) / (2.0 * c.sum())


def zahl_jackknife_entropy(table) -> float:
    """Delete-one jackknife of the plug-in estimate.

    Leave-one-out entropies are computed once per distinct symbol and
    weighted by its count.
    """
    c = _counts(table)
    n = int(c.sum())
    h = plugin_entropy(c)
    if n == 1:
        return h
    s = float(_xlogx(c).sum())
    s_minus = s - _xlogx(c) + _xlogx(c - 1)
    h_minus = math.log(n - 1) - s_minus / (n - 1)
    return float(n * h - (n - 1) / n * np.dot(c, h_minus))


def horvitz_thompson_entropy(table) -> float:
    c = _counts(table)
    n = c.sum()
    p = c / n
    return float(-(p * np.log(p) / (1.0 - (1.0 - p) ** n)).sum())


def _chao_shen(c: np.ndarray) -> tuple[float, bool]:
    n = int(c.sum())
    f1 = int(np.count_nonzero(c == 1))
    degenerate = f1 == n
    if degenerate:
        f1 = n - 1
    coverage = 1.0 - f1 / n
    pa = coverage * c / n
    return float(-(pa * np.log(pa) / (1.0 - (1.0 - pa) ** n)).sum()), degenerate


def chao_shen_entropy(table) -> float:
    """Coverage-adjusted Horvitz-Thompson estimate.

    When every observation is a singleton the coverage estimate is zero;
    the singleton count is then taken as ``N - 1`` and an
    :class:`UnreliableEstimateWarning` is issued.
    """
    value, degenerate = _chao_shen(_counts(table))
    if degenerate:
        warnings.warn("all observations are singletons; Chao-Shen coverage is zero",
                      UnreliableEstimateWarning, stacklevel=2)
    return value


ESTIMATORS: dict[str, Callable] = {
    "plugin": plugin_entropy,
    "grassberger": grassberger_entropy,
    "miller_madow": miller_madow_entropy,
    "zahl": zahl_jackknife_entropy,
    "chao_shen": chao_shen_entropy,
    "horvitz_thompson": horvitz_thompson_entropy,
}
_ALIASES = {"PI": "plugin", "ML": "plugin", "GR": "grassberger", "MM": "miller_madow",
            "ZA": "zahl", "CS": "chao_shen", "HT": "horvitz_thompson"}


def resolve_estimator(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in ESTIMATORS:
        raise ValueError(f"unknown estimator {name!r}; choose from {sorted(ESTIMATORS)}")
    return name


def entropy(table, estimator: str = "grassberger") -> float:
    name = resolve_estimator(estimator)
    if name == "chao_shen":
        return _chao_shen(_counts(table))[0]
    return ESTIMATORS[name](table)


def is_unreliable(table, estimator: str) -> bool:
    if resolve_estimator(estimator) != "chao_shen":
        return False
    c = _counts(table)
    return bool(np.all(c == 1))


# -- mutual information ----------------------------------------------------

@dataclass(frozen=True)
class MiEstimate:
    value: float
    estimator: str
    n_data: int
    distance: int | None = None
    distance_kind: str | None = None
    unreliable: bool = False


@dataclass(frozen=True)
class CfibEstimate:
    value: float
    estimator: str
    n_data: int
    x0: str | None = None
    x1: str | None = None
    r_str: int | None = None
    unreliable: bool = False


def _codes(values) -> tuple[np.ndarray, int]:
    """Dense integer codes ``0..k-1`` for a sequence of hashable labels."""
    arr = values if isinstance(values, np.ndarray) else np.asarray(values)
    if arr.ndim == 1 and arr.dtype.kind in "iub":
        if arr.size == 0:
            return arr.astype(np.int64), 0
        lo, hi = int(arr.min()), int(arr.max())
        if lo >= 0 and hi < 4 * arr.size + 64:
            return arr.astype(np.int64, copy=False), hi + 1
    if arr.ndim == 1 and arr.dtype.kind != "O":
        _, inv = np.unique(arr, return_inverse=True)
        return inv.astype(np.int64).ravel(), int(inv.max()) + 1 if inv.size else 0
    lookup: dict = {}
    inv = np.fromiter((lookup.setdefault(v, len(lookup)) for v in values), dtype=np.int64)
    return inv, len(lookup)


def _mi_from_codes(c0: np.ndarray, c1: np.ndarray, k1: int, estimator: str) -> tuple[float, bool]:
    if c0.size != c1.size:
        raise ValueError("first and second samples differ in length")
    rows = np.bincount(c0)
    cols = np.bincount(c1)
    _, cells = np.unique(c0 * k1 + c1, return_counts=True)
    value = entropy(rows, estimator) + entropy(cols, estimator) - entropy(cells, estimator)
    flag = any(is_unreliable(t, estimator) for t in (rows, cols, cells))
    return float(value), flag


def mi_from_joint(joint, estimator: str = "grassberger") -> float:
    """MI (nats) from a 2-D joint count matrix."""
    joint = np.asarray(joint, dtype=np.int64)
    if joint.ndim != 2:
        raise ValueError("joint table must be two-dimensional")
    rows, cols, cells = joint.sum(axis=1), joint.sum(axis=0), joint.ravel()
    return entropy(rows, estimator) + entropy(cols, estimator) - entropy(cells, estimator)


def _split_pairs(pairs) -> tuple[list, list]:
    first, second = [], []
    for p in pairs:
        if hasattr(p, "x0"):
            first.append(p.x0)
            second.append(p.x1)
        else:
            a, b = p
            first.append(a)
            second.append(b)
    return first, second


def mutual_information(first, second=None, *, estimator: str = "grassberger",
                       distance: int | None = None,
                       distance_kind: str | None = None) -> MiEstimate:
    """Estimate the MI between the first and second labels of sampled pairs.

    Pass either a collection of pairs (``NodePair`` objects or 2-tuples) or
    two equal-length label sequences.
    """
    if second is None:
        first, second = _split_pairs(first)
    c0, _ = _codes(first)
    c1, k1 = _codes(second)
    if c0.size < 2:
        raise ValueError("mutual information needs at least two pairs")
    value, flag = _mi_from_codes(c0, c1, k1, estimator)
    return MiEstimate(value, resolve_estimator(estimator), int(c0.size), distance,
                      distance_kind, flag)


def _composite(children) -> np.ndarray:
    arr = np.asarray(children)
    if arr.dtype.kind in "iu" and arr.ndim == 2:
        if arr.shape[1] != 2 or np.any(arr < 0):
            raise ValueError("every conditioned node needs exactly two children "
                             "(is the corpus binarized?)")
        k = int(arr.max()) + 1
        return arr[:, 0].astype(np.int64) * k + arr[:, 1]
    out = []
    for kids in children:
        if len(kids) != 2:
            raise ValueError(f"conditioned node has {len(kids)} children; "
                             "CFIB needs a binarized corpus")
        out.append(tuple(kids))
    return _codes(out)[0]


def cfib(first_children, second_children=None, *, estimator: str = "grassberger",
         x0: str | None = None, x1: str | None = None,
         r_str: int | None = None) -> CfibEstimate:
    """Estimate context-free independence breaking for a fixed label pair.

    ``first_children[i]`` is the ``(left, right)`` child-label pair of the
    first node of sample ``i``, ``second_children[i]`` that of the second.
    A single argument of ``((y0, z0), (y1, z1))`` items is also accepted.
    Conditioning on the parents' labels is the caller's job: every sample
    must come from nodes labelled ``(x0, x1)``.
    """
    if second_children is None:
        items = list(first_children)
        first_children = [i[0] for i in items]
        second_children = [i[1] for i in items]
    y0z0, _ = _codes(_composite(first_children))
    y1z1, k1 = _codes(_composite(second_children))
    if y0z0.size < 2:
        raise ValueError("CFIB needs at least two pairs")
    value, flag = _mi_from_codes(y0z0, y1z1, k1, estimator)
    return CfibEstimate(value, resolve_estimator(estimator), int(y0z0.size), x0, x1, r_str, flag)
