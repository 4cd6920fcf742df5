"""Two-symbol pair models whose mutual information is known exactly.

``X`` and ``Y`` are uniform bits with ``P(X = Y) = (1 + delta) / 2``.  The
correlation ``delta`` decays with distance either exponentially,
``exp(-lambda r / 2)``, or as a power law, ``r**(-alpha / 2)``, which makes
the MI decay as ``exp(-lambda r)`` or ``r**-alpha`` for small ``delta``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import derive_rng

__all__ = ["SyntheticModel", "exact_mi", "joint_probs", "mi_of_delta", "sample_synthetic_pairs"]

KINDS = ("exponential", "power_law")
_SYNTH_STREAM = 7  # spawn-key tag keeping synthetic streams apart from corpus sampling


@dataclass(frozen=True)
class SyntheticModel:
    kind: str
    parameter: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.parameter > 0:
            raise ValueError("model parameter must be positive")

    def delta(self, r) -> float | np.ndarray:
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr < 1):
            raise ValueError("distance must be >= 1")
        if self.kind == "exponential":
            d = np.exp(-self.parameter * r_arr / 2)
        else:
            d = r_arr ** (-self.parameter / 2)
        return float(d) if d.ndim == 0 else d


def joint_probs(m: SyntheticModel, r) -> np.ndarray:
    """2x2 table ``P[x, y]``."""
    d = m.delta(r)
    same, diff = (1 + d) / 4, (1 - d) / 4
    return np.array([[same, diff], [diff, same]])


def _xlog(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)


def mi_of_delta(delta):
    d = np.asarray(delta, dtype=float)
    out = 0.5 * (_xlog(1 + d) + _xlog(1 - d))
    return float(out) if out.ndim == 0 else out


def exact_mi(m: SyntheticModel, r):
    """MI in nats at distance ``r``; ``0 ln 0`` is taken as 0 so ``delta = 1``
    gives ``ln 2``."""
    return mi_of_delta(m.delta(r))


def sample_synthetic_pairs(m: SyntheticModel, r: int, n_data: int, seed: int = 0
                           ) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n_data`` i.i.d. ``(X, Y)`` pairs; returns the two int8 columns.

    The stream is derived from ``(seed, r, n_data)`` so each distance and
    sample size is reproducible on its own.
    """
    if n_data < 1:
        raise ValueError("n_data must be >= 1")
    p = joint_probs(m, r).ravel()
    rng = derive_rng(seed, _SYNTH_STREAM, int(r), int(n_data))
    cells = rng.choice(4, size=int(n_data), p=p / p.sum())
    return (cells >> 1).astype(np.int8), (cells & 1).astype(np.int8)
