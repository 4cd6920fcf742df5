"""Exponential and power-law fits with reduced chi-square model selection.

Decay curves (MI, CFIB) are fitted after taking logs: ``ln y`` is linear in
``r`` for ``A exp(-lambda r)`` and linear in ``ln r`` for ``B r**-alpha``, so
the fit is ordinary least squares.  Growth curves are fitted on the raw
scale as ``C exp(mu r)`` and ``D r**beta`` by damped nonlinear least squares
started from the log-linear solution.  Every residual has unit weight.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

__all__ = [
    "FitReport",
    "FitResult",
    "ModelSelection",
    "Series",
    "fit_both",
    "fit_exponential",
    "fit_power_law",
    "fit_report",
    "positive_part",
    "select_model",
]

MODELS = ("exponential", "power_law")
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class Series:
    """Points ``(r, y)`` with ``r`` strictly increasing."""

    r: tuple[float, ...]
    y: tuple[float, ...]
    log_scaled: bool = True
    name: str = ""

    def __post_init__(self):
        r = tuple(float(v) for v in self.r)
        y = tuple(float(v) for v in self.y)
        if len(r) != len(y):
            raise ValueError("r and y differ in length")
        if any(b <= a for a, b in zip(r, r[1:])):
            raise ValueError("r must be strictly increasing")
        if any(v <= 0 for v in r):
            raise ValueError("r must be positive")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return len(self.r)

    def restrict(self, lo: float | None = None, hi: float | None = None) -> "Series":
        keep = [i for i, v in enumerate(self.r)
                if (lo is None or v >= lo) and (hi is None or v <= hi)]
        return Series(tuple(self.r[i] for i in keep), tuple(self.y[i] for i in keep),
                      self.log_scaled, self.name)


@dataclass(frozen=True)
class FitResult:
    """``amplitude`` is A, B, C or D; ``rate`` is lambda, alpha, mu or beta.

    In log mode the models are ``A exp(-rate r)`` and ``B r**-rate``; in
    linear (growth) mode ``C exp(rate r)`` and ``D r**rate``.
    """

    model: str
    amplitude: float
    rate: float
    chi2_nu: float
    n_points: int
    r: tuple[float, ...]
    log_scaled: bool
    n_params: int = 2

    @property
    def params(self) -> dict[str, float]:
        names = {
            ("exponential", True): ("A", "lambda"),
            ("power_law", True): ("B", "alpha"),
            ("exponential", False): ("C", "mu"),
            ("power_law", False): ("D", "beta"),
        }[self.model, self.log_scaled]
        return {names[0]: self.amplitude, names[1]: self.rate}

    def predict(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        sign = -1.0 if self.log_scaled else 1.0
        if self.model == "exponential":
            return self.amplitude * np.exp(sign * self.rate * r)
        return self.amplitude * r ** (sign * self.rate)


def _check(s: Series):
    if len(s) < 3:
        raise ValueError(f"a two-parameter fit needs at least 3 points, got {len(s)}")
    if s.log_scaled:
        bad = [(r, y) for r, y in zip(s.r, s.y) if not y > 0]
        if bad:
            raise ValueError(f"log-scaled fit needs y > 0; offending points (r, y): {bad}")


def _ols(x: np.ndarray, z: np.ndarray) -> tuple[float, float, float]:
    """Intercept, slope and residual sum of squares of ``z ~ a + b x``."""
    xm, zm = x.mean(), z.mean()
    sxx = float(((x - xm) ** 2).sum())
    if sxx == 0:
        raise ValueError("degenerate fit: all abscissae are equal")
    b = float(((x - xm) * (z - zm)).sum()) / sxx
    a = zm - b * xm
    rss = float(((z - a - b * x) ** 2).sum())
    return float(a), b, rss


def _fit(s: Series, model: str) -> FitResult:
    _check(s)
    r = np.asarray(s.r)
    y = np.asarray(s.y)
    x = r if model == "exponential" else np.log(r)
    n = len(s)
    if s.log_scaled:
        a, b, rss = _ols(x, np.log(y))
        return FitResult(model, math.exp(a), -b, rss / (n - 2), n, s.r, True)

    # growth mode: seed from the log-linear fit on the positive points
    pos = y > 0
    if pos.sum() >= 2 and np.ptp(x[pos]) > 0:
        a0, b0, _ = _ols(x[pos], np.log(y[pos]))
        p0 = np.array([math.exp(a0), b0])
    else:
        if np.ptp(x) == 0:
            raise ValueError("degenerate fit: all abscissae are equal")
        p0 = np.array([float(y.mean()) or 1.0, 0.0])

    def resid(p):
        return p[0] * np.exp(p[1] * x) - y

    def jac(p):
        e = np.exp(p[1] * x)
        return np.column_stack([e, p[0] * x * e])

    sol = least_squares(resid, p0, jac=jac, method="lm", xtol=1e-10, ftol=1e-15,
                        gtol=1e-15, max_nfev=200 * (len(p0) + 1))
    rss = float((sol.fun ** 2).sum())
    return FitResult(model, float(sol.x[0]), float(sol.x[1]), rss / (n - 2), n, s.r, False)


def fit_exponential(s: Series) -> FitResult:
    return _fit(s, "exponential")


def fit_power_law(s: Series) -> FitResult:
    return _fit(s, "power_law")


@dataclass(frozen=True)
class ModelSelection:
    model: str  # "exponential", "power_law" or "inconclusive"
    chi2_exponential: float
    chi2_power_law: float

    @property
    def ratio(self) -> float:
        """Loser's chi2_nu over the winner's."""
        lo, hi = sorted((self.chi2_exponential, self.chi2_power_law))
        return math.inf if lo == 0 else hi / lo


def select_model(exp_fit: FitResult, pow_fit: FitResult) -> ModelSelection:
    """Pick the smaller reduced chi-square; near-equal values are a tie."""
    if exp_fit.r != pow_fit.r or exp_fit.log_scaled != pow_fit.log_scaled:
        raise ValueError("fits were made on different point sets")
    ce, cp = exp_fit.chi2_nu, pow_fit.chi2_nu
    if abs(ce - cp) <= TIE_RTOL * max(abs(ce), abs(cp)):
        model = "inconclusive"
    else:
        model = "exponential" if ce < cp else "power_law"
    return ModelSelection(model, ce, cp)


def positive_part(s: Series) -> tuple[Series, list[tuple[float, float]]]:
    """Drop points with ``y <= 0`` and return them separately."""
    keep = [i for i, v in enumerate(s.y) if v > 0]
    dropped = [(s.r[i], s.y[i]) for i in range(len(s)) if s.y[i] <= 0]
    return Series(tuple(s.r[i] for i in keep), tuple(s.y[i] for i in keep),
                  s.log_scaled, s.name), dropped


@dataclass
class FitReport:
    series: str
    fit_range: tuple[float | None, float | None]
    excluded_points: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    selection: ModelSelection | None = None
    error: str | None = None

    def as_dict(self) -> dict:
        out = {
            "series": self.series,
            "range": list(self.fit_range),
            "excluded_points": [list(p) for p in self.excluded_points],
        }
        for name, f in self.fits.items():
            out[name] = {"model": f.model, "params": f.params, "chi2_nu": f.chi2_nu,
                         "n_points": f.n_points, "log_scaled": f.log_scaled}
        if self.selection is not None:
            out["selected"] = self.selection.model
        if self.error is not None:
            out["error"] = self.error
        return out


def fit_both(s: Series, lo: float | None = None, hi: float | None = None,
             exclude: Sequence[float] = ()) -> FitReport:
    """Fit both models on ``s`` restricted to ``[lo, hi]``.

    Points in ``exclude`` (by ``r``) and, in log mode, non-positive points
    are dropped and listed in the report.  Too few points leave an error
    message in the report instead of raising.
    """
    s = s.restrict(lo, hi)
    excluded = [(r, y) for r, y in zip(s.r, s.y) if r in set(exclude)]
    keep = [i for i, r in enumerate(s.r) if r not in set(exclude)]
    s = Series(tuple(s.r[i] for i in keep), tuple(s.y[i] for i in keep), s.log_scaled, s.name)
    if s.log_scaled:
        s, dropped = positive_part(s)
        excluded += dropped
    report = FitReport(s.name, (lo, hi), sorted(excluded))
    try:
        e, p = fit_exponential(s), fit_power_law(s)
    except ValueError as exc:
        report.error = str(exc)
        return report
    report.fits = {"exponential": e, "power_law": p}
    report.selection = select_model(e, p)
    return report


def fit_report(reports: Sequence[FitReport]) -> list[dict]:
    return [r.as_dict() for r in reports]
