"""Parameter estimation from firm records and interest-rate series.

The tail exponents come from ordinary least squares on log-log empirical
CDFs: ``P[X > x]`` of EBIT/BL above ``exp(-1.5)`` gives mu, ``P[X < x]`` of
EBTDA/FC below ``exp(3)`` gives beta. The rate bounds and the inter-scale
coefficients are calibrated against an observed rate series.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .dynamics import Regime
from .errors import (
    InsufficientDataError,
    NonConvergenceError,
    UnderdeterminedError,
    UndefinedRatioError,
    ValidationError,
)
from .firm_model import FirmRecord

log = logging.getLogger(__name__)

MU_LOG_CUTOFF = -1.5
BETA_LOG_CUTOFF = 3.0
MIN_FIT_POINTS = 3


class Tail(str, Enum):
    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    n_points: int
    cutoff: float = math.nan
    bound_rate: float = math.nan
    n_excluded: int = 0

    def __post_init__(self):
        if self.n_points < MIN_FIT_POINTS:
            raise InsufficientDataError(f"fit needs >= {MIN_FIT_POINTS} points, got {self.n_points}")
        if not 0.0 <= self.r_squared <= 1.0:
            raise ValidationError(f"r_squared out of [0,1]: {self.r_squared}")

    def with_bound(self, bound_rate: float) -> "FitResult":
        return replace(self, bound_rate=float(bound_rate))


def ols(x, y) -> tuple[float, float, float]:
    """Least-squares line ``y = slope * x + intercept``; returns (slope, intercept, R^2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("x and y must be 1-d arrays of equal length")
    if len(x) < MIN_FIT_POINTS:
        raise InsufficientDataError(f"need >= {MIN_FIT_POINTS} points, got {len(x)}")
    xm, ym = x.mean(), y.mean()
    dx, dy = x - xm, y - ym
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise UnderdeterminedError("regressor is constant; slope undefined")
    slope = float(dx @ dy) / sxx
    intercept = ym - slope * xm
    resid = y - (slope * x + intercept)
    ss_tot = float(dy @ dy)
    ss_res = float(resid @ resid)
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return slope, float(intercept), min(1.0, max(0.0, r2))


def empirical_cdf(values, tail: Union[Tail, str] = Tail.UPPER) -> tuple[np.ndarray, np.ndarray]:
    """Distinct sorted values and their strict tail probabilities.

    Upper: ``p(x) = #{v > x} / n``; lower: ``p(x) = #{v < x} / n``.
    Points with p equal to 0 or 1 are dropped so both columns can be logged.
    """
    tail = Tail(tail)
    v = np.sort(np.asarray(values, dtype=float))
    if v.ndim != 1 or len(v) < MIN_FIT_POINTS:
        raise InsufficientDataError(f"empirical CDF needs >= {MIN_FIT_POINTS} values")
    if not np.all(np.isfinite(v)) or v[0] <= 0:
        raise ValidationError("empirical CDF values must be finite and positive")
    n = len(v)
    xs = np.unique(v)
    if tail is Tail.UPPER:
        p = (n - np.searchsorted(v, xs, side="right")) / n
    else:
        p = np.searchsorted(v, xs, side="left") / n
    keep = (p > 0) & (p < 1)
    return xs[keep], p[keep]


def fit_tail(values, tail: Union[Tail, str], log_cutoff: float) -> FitResult:
    """OLS of ln p on ln x over the window beyond ``log_cutoff``.

    The window is ``ln x > cutoff`` for the upper tail and ``ln x < cutoff``
    for the lower tail.
    """
    tail = Tail(tail)
    xs, p = empirical_cdf(values, tail)
    lx = np.log(xs)
    window = lx > log_cutoff if tail is Tail.UPPER else lx < log_cutoff
    if window.sum() < MIN_FIT_POINTS:
        raise InsufficientDataError(
            f"{int(window.sum())} CDF points in the fit window (ln x "
            f"{'>' if tail is Tail.UPPER else '<'} {log_cutoff}); need {MIN_FIT_POINTS}"
        )
    slope, intercept, r2 = ols(lx[window], np.log(p[window]))
    return FitResult(slope, intercept, r2, int(window.sum()), cutoff=log_cutoff)


def _positive_ratios(records: Iterable[FirmRecord], num: str, den: str) -> tuple[np.ndarray, int]:
    ratios, excluded = [], 0
    for r in records:
        a, b = getattr(r, num), getattr(r, den)
        if a is None or b is None or not (a > 0 and b > 0):
            excluded += 1
            continue
        q = a / b
        if not math.isfinite(q):
            excluded += 1
            continue
        ratios.append(q)
    return np.asarray(ratios, dtype=float), excluded


def fit_mu(records: Sequence[FirmRecord], log_cutoff: float = MU_LOG_CUTOFF) -> FitResult:
    """Resilience exponent from the upper tail of EBIT/BL (expected negative).

    Records with a non-positive or missing EBIT or BL are skipped and counted
    in ``n_excluded``. The bound ``i_min`` is not read off the intercept; see
    :func:`calibrate_bound`.
    """
    ratios, excluded = _positive_ratios(records, "ebit", "bank_loans")
    if excluded:
        log.info("fit_mu: excluded %d records with non-positive EBIT or BL", excluded)
    fit = fit_tail(ratios, Tail.UPPER, log_cutoff)
    return replace(fit, n_excluded=excluded)


def fit_beta(records: Sequence[FirmRecord], log_cutoff: float = BETA_LOG_CUTOFF) -> FitResult:
    """Ponziness exponent from the lower tail of EBTDA/FC (expected positive)."""
    ratios, excluded = _positive_ratios(records, "ebtda", "financial_costs")
    if excluded:
        log.info("fit_beta: excluded %d records with non-positive EBTDA or FC", excluded)
    fit = fit_tail(ratios, Tail.LOWER, log_cutoff)
    return replace(fit, n_excluded=excluded)


# -- rate series ---------------------------------------------------------------

Period = Union[int, str]


def period_key(period: Period) -> tuple[int, int]:
    """(year, month) for ``2004``, ``"2004"`` or ``"2004-03"``; yearly periods get month 0."""
    if isinstance(period, (int, np.integer)):
        return int(period), 0
    text = str(period).strip()
    try:
        if "-" in text:
            y, m = text.split("-", 1)
            month = int(m)
            if not 1 <= month <= 12:
                raise ValueError
            return int(y), month
        return int(text), 0
    except ValueError:
        raise ValidationError(f"unrecognised period {period!r}; use YYYY or YYYY-MM") from None


@dataclass(frozen=True)
class RateSeries:
    periods: tuple
    rates: tuple

    def __post_init__(self):
        if len(self.periods) != len(self.rates):
            raise ValidationError("periods and rates differ in length")
        keys = [period_key(p) for p in self.periods]
        for a, b in zip(keys, keys[1:]):
            if not b > a:
                raise ValidationError(f"periods must be strictly increasing ({a} then {b})")
        for p, r in zip(self.periods, self.rates):
            if not (r > 0 and math.isfinite(r)):
                raise ValidationError(f"rate must be positive, got {r!r} at {p}")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Period, float]]) -> "RateSeries":
        pairs = list(pairs)
        return cls(tuple(p for p, _ in pairs), tuple(float(r) for _, r in pairs))

    def __len__(self) -> int:
        return len(self.rates)

    def years(self) -> list[int]:
        return [period_key(p)[0] for p in self.periods]


def _as_series(observed) -> RateSeries:
    return observed if isinstance(observed, RateSeries) else RateSeries.from_pairs(observed)


def calibrate_alpha(
    observed,
    fractions: Sequence[float],
    bound: float,
    yearly: bool = True,
) -> list[tuple[Period, float]]:
    """Inter-scale coefficient from ``i_t = bound * f_{t-1} ** alpha``.

    ``fractions[k]`` is the fraction in force before ``observed[k]``. With
    ``yearly=True`` the observations of each calendar year share one alpha,
    the zero-intercept least-squares slope of ``ln(i / bound)`` on ``ln f``;
    otherwise every observation gets its own exact inversion.
    """
    series = _as_series(observed)
    if len(series) == 0:
        raise InsufficientDataError("empty rate series")
    if len(fractions) != len(series):
        raise ValidationError("fractions and observed rates differ in length")
    if not bound > 0:
        raise ValidationError(f"bound must be positive, got {bound!r}")
    for f in fractions:
        if not 0.0 < f <= 1.0:
            raise ValidationError(f"fraction must lie in (0, 1], got {f!r}")

    x = np.log(np.asarray(fractions, dtype=float))
    y = np.log(np.asarray(series.rates, dtype=float) / bound)
    if yearly:
        groups: dict[int, list[int]] = {}
        for k, year in enumerate(series.years()):
            groups.setdefault(year, []).append(k)
        labelled = [(year, idx) for year, idx in groups.items()]
    else:
        labelled = [(p, [k]) for k, p in enumerate(series.periods)]

    out = []
    for label, idx in labelled:
        sxx = float(x[idx] @ x[idx])
        if sxx == 0.0:
            raise UndefinedRatioError(f"alpha undefined for {label}: fraction equals 1")
        out.append((label, float(x[idx] @ y[idx]) / sxx))
    return out


@dataclass(frozen=True)
class BoundCalibration:
    bound: float
    alpha: float
    sse: float
    sweeps: int


def calibrate_bound_alpha(
    rates: Sequence[float],
    fractions: Sequence[float],
    tol: float = 1e-9,
    max_sweeps: int = 200,
) -> BoundCalibration:
    """Jointly fit ``bound`` and ``alpha`` in ``rate = bound * fraction ** alpha``.

    Minimises the squared rate error, starting from the log-space
    least-squares solution. Each sweep golden-searches alpha with the bound
    profiled out (it is linear given alpha), then polishes the bound with its
    own golden search.
    """
    i = np.asarray(rates, dtype=float)
    d = np.asarray(fractions, dtype=float)
    if i.shape != d.shape:
        raise ValidationError("rates and fractions differ in length")
    if len(i) < 2:
        raise UnderdeterminedError("one observation cannot identify both bound and alpha")
    if np.any(~(d > 0)) or np.any(~(d < 1)):
        raise ValidationError("fractions must lie strictly inside (0, 1)")
    if np.any(~(i > 0)):
        raise ValidationError("rates must be positive")
    ld = np.log(d)
    if np.ptp(ld) == 0.0:
        raise UnderdeterminedError("all fractions equal: bound and alpha are confounded")

    def sse(b: float, a: float) -> float:
        r = b * np.exp(a * ld) - i
        return float(r @ r)

    def best_bound(a: float) -> float:
        # linear least squares in the bound for fixed alpha
        g = np.exp(a * ld)
        return float(g @ i) / float(g @ g)

    # exact in log space when the data follow the law exactly
    slope, intercept, _ = ols(ld, np.log(i)) if len(i) >= 3 else _two_point(ld, np.log(i))
    b, a = math.exp(intercept), slope
    current = sse(b, a)
    for sweep in range(1, max_sweeps + 1):
        a_new = _golden(lambda v: sse(best_bound(v), v), a, tol)
        b_new = _golden(lambda v: sse(v, a_new), best_bound(a_new), tol)
        new = sse(b_new, a_new)
        step = max(abs(b_new - b) / max(abs(b), 1.0), abs(a_new - a))
        b, a = b_new, a_new
        if step < tol or current - new <= tol * max(current, 1e-300):
            return BoundCalibration(b, a, new, sweep)
        current = new
    raise NonConvergenceError(f"bound/alpha calibration did not converge in {max_sweeps} sweeps")


def _two_point(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope = (y[1] - y[0]) / (x[1] - x[0])
    return float(slope), float(y[0] - slope * x[0]), 1.0


def _golden(f, x0: float, tol: float) -> float:
    width = max(abs(x0) * 1e-3, 1e-6)
    res = minimize_scalar(f, bracket=(x0 - width, x0 + width), method="golden", tol=tol)
    return float(res.x) if res.fun <= f(x0) else x0


def calibrate_bound(
    fit: FitResult,
    observed,
    densities: Sequence[float],
    regime: Union[Regime, str],
    tol: float = 1e-9,
    max_sweeps: int = 200,
) -> float:
    """Rate bound (i_min for loans, i_max for crisis) matching the observed rates.

    ``densities[k]`` is the loans fraction or ponzi density preceding
    ``observed[k]``. The exponent fit only fixes the expected regime; its
    slope must have the sign that regime requires.
    """
    regime = Regime.parse(regime)
    if regime is Regime.LOANS and fit.slope >= 0:
        raise ValidationError("loans regime expects a negative exponent fit")
    if regime is Regime.CRISIS and fit.slope <= 0:
        raise ValidationError("crisis regime expects a positive exponent fit")
    series = _as_series(observed)
    if len(series) == 0:
        raise InsufficientDataError("empty rate series")
    if len(densities) != len(series):
        raise ValidationError("densities and observed rates differ in length")
    return calibrate_bound_alpha(series.rates, densities, tol, max_sweeps).bound
