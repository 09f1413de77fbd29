"""Two-regime cobweb dynamics between the interest rate and firm fractions.

Loans accelerator: the rate sets the share of firms taking loans,
``(i / i_min) ** mu``, and that share sets next month's rate,
``i_min * share ** alpha1``.

Crisis accelerator: the rate sets the ponzi density, ``(i / i_max) ** beta``,
and the density sets next month's rate, ``i_max * density ** alpha2``.

In log space both compositions are linear maps, ``y' = (alpha * exponent) * y``
with ``y = ln(i / bound)``, which is what the stability classes describe.
Rates are in percent per year; one step is one month.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

from .errors import NonConvergenceError, ValidationError

STEPS_PER_YEAR = 12
DEFAULT_EPSILON = 0.01


class Regime(str, Enum):
    LOANS = "loans"
    CRISIS = "crisis"

    @classmethod
    def parse(cls, value: "str | Regime") -> "Regime":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        aliases = {
            "loans": cls.LOANS,
            "loansaccelerator": cls.LOANS,
            "regime1": cls.LOANS,
            "crisis": cls.CRISIS,
            "crisisaccelerator": cls.CRISIS,
            "regime2": cls.CRISIS,
        }
        if key not in aliases:
            raise ValidationError(f"unknown regime {value!r}")
        return aliases[key]


class Stability(str, Enum):
    CONVERGENT = "convergent"
    MARGINAL = "marginal"
    DIVERGENT = "divergent"


@dataclass(frozen=True)
class StabilityClass:
    label: Stability
    product: float
    epsilon: float = DEFAULT_EPSILON


@dataclass(frozen=True)
class ModelParams:
    mu: float
    beta: float
    alpha1: float
    alpha2: float
    i_min: float
    i_max: float

    def __post_init__(self):
        if not self.mu < 0:
            raise ValidationError(f"mu must be negative, got {self.mu}")
        if not self.beta > 0:
            raise ValidationError(f"beta must be positive, got {self.beta}")
        if not 0 < self.i_min < self.i_max:
            raise ValidationError(
                f"need 0 < i_min < i_max, got i_min={self.i_min}, i_max={self.i_max}"
            )
        for name in ("alpha1", "alpha2"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")

    @property
    def loans_product(self) -> float:
        return self.alpha1 * self.mu

    @property
    def crisis_product(self) -> float:
        return self.alpha2 * self.beta

    def product(self, regime: Regime) -> float:
        return self.loans_product if Regime.parse(regime) is Regime.LOANS else self.crisis_product

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("mu", "beta", "alpha1", "alpha2", "i_min", "i_max")}


@dataclass(frozen=True)
class SystemState:
    t: int
    rate: float
    n_tot: int
    n_loans: int
    n_ponzi: int
    n_hedge: int
    loans_fraction: float
    ponzi_density: float
    regime: Optional[Regime] = None
    clamped: bool = False

    def __post_init__(self):
        if not 0.0 <= self.ponzi_density <= 1.0:
            raise ValidationError(f"ponzi_density out of [0,1]: {self.ponzi_density}")
        if not 0.0 <= self.loans_fraction <= 1.0:
            raise ValidationError(f"loans_fraction out of [0,1]: {self.loans_fraction}")
        if min(self.n_tot, self.n_loans, self.n_ponzi, self.n_hedge) < 0:
            raise ValidationError("counts must be non-negative")
        if self.n_ponzi + self.n_hedge > self.n_tot:
            raise ValidationError("n_ponzi + n_hedge exceeds n_tot")


def _check_rate(rate: float) -> None:
    if not (rate > 0 and math.isfinite(rate)):
        raise ValidationError(f"rate must be positive and finite, got {rate!r}")


def _clamp01(value: float) -> tuple[float, bool]:
    if value > 1.0:
        return 1.0, True
    if value < 0.0:
        return 0.0, True
    return value, False


def raw_loans_fraction(rate: float, params: ModelParams) -> float:
    _check_rate(rate)
    return (rate / params.i_min) ** params.mu


def raw_ponzi_fraction(rate: float, params: ModelParams) -> float:
    _check_rate(rate)
    return (rate / params.i_max) ** params.beta


def loans_fraction(rate: float, params: ModelParams) -> float:
    """Share of firms taking loans at ``rate``, clamped to [0, 1]."""
    return _clamp01(raw_loans_fraction(rate, params))[0]


def ponzi_fraction(rate: float, params: ModelParams) -> float:
    """Ponzi density at ``rate``, clamped to [0, 1]."""
    return _clamp01(raw_ponzi_fraction(rate, params))[0]


def _check_fraction(value: float, name: str) -> None:
    if not 0.0 < value <= 1.0:
        raise ValidationError(f"{name} must lie in (0, 1], got {value!r}")


def rate_from_loans(fraction: float, params: ModelParams) -> float:
    _check_fraction(fraction, "loans fraction")
    return params.i_min * fraction ** params.alpha1


def rate_from_ponzi(density: float, params: ModelParams) -> float:
    _check_fraction(density, "ponzi density")
    return params.i_max * density ** params.alpha2


def rate_for_density(density: float, params: ModelParams) -> float:
    """Rate at which the ponzi density equals ``density`` (inverse of ponzi_fraction)."""
    _check_fraction(density, "ponzi density")
    return params.i_max * density ** (1.0 / params.beta)


def rate_for_loans_fraction(fraction: float, params: ModelParams) -> float:
    _check_fraction(fraction, "loans fraction")
    return params.i_min * fraction ** (1.0 / params.mu)


def log_distance(rate: float, params: ModelParams, regime: Regime) -> float:
    """``ln(rate / bound)`` with the bound of the regime's fixed point."""
    _check_rate(rate)
    bound = params.i_min if Regime.parse(regime) is Regime.LOANS else params.i_max
    return math.log(rate / bound)


def fixed_rate(params: ModelParams, regime: Regime) -> float:
    """Interior fixed point of the composed map: i_min (loans) or i_max (crisis)."""
    return params.i_min if Regime.parse(regime) is Regime.LOANS else params.i_max


def classify_stability(product: float, epsilon: float = DEFAULT_EPSILON) -> StabilityClass:
    """Convergent if |product| < 1 - eps, divergent if |product| > 1 + eps."""
    if not epsilon >= 0:
        raise ValidationError(f"epsilon must be >= 0, got {epsilon!r}")
    magnitude = abs(product)
    if magnitude < 1.0 - epsilon:
        label = Stability.CONVERGENT
    elif magnitude > 1.0 + epsilon:
        label = Stability.DIVERGENT
    else:
        label = Stability.MARGINAL
    return StabilityClass(label, product, epsilon)


def make_state(
    t: int,
    rate: float,
    params: ModelParams,
    n_tot: int,
    regime: Optional[Regime] = None,
    clamped: bool = False,
) -> SystemState:
    """State at ``rate`` with both fractions and the derived counts.

    Counts are ``fraction * n_tot`` rounded half-to-even. The hedge share is
    only proportional to the loans fraction, so the hedge count is the loans
    count capped by the non-ponzi population.
    """
    loans, c1 = _clamp01(raw_loans_fraction(rate, params))
    density, c2 = _clamp01(raw_ponzi_fraction(rate, params))
    n_loans = round(loans * n_tot)
    n_ponzi = round(density * n_tot)
    n_hedge = min(n_loans, n_tot - n_ponzi)
    return SystemState(
        t=t,
        rate=rate,
        n_tot=n_tot,
        n_loans=n_loans,
        n_ponzi=n_ponzi,
        n_hedge=n_hedge,
        loans_fraction=loans,
        ponzi_density=density,
        regime=regime,
        clamped=clamped or c1 or c2,
    )


def state_from_density(density: float, params: ModelParams, n_tot: int, t: int = 0) -> SystemState:
    """Initial state whose rate reproduces ``density`` through the crisis map."""
    return make_state(t, rate_for_density(density, params), params, n_tot)


def step(state: SystemState, regime: Regime, params: ModelParams) -> SystemState:
    """Advance one month.

    The fraction driving the bank's response is recomputed from the current
    rate (so the step depends on the rate only), the next rate follows from
    it, and the returned state reports the fractions at the new rate. A
    divergent map that leaves the floating-point range raises
    :class:`NonConvergenceError`.
    """
    regime = Regime.parse(regime)
    loans = regime is Regime.LOANS
    try:
        raw = raw_loans_fraction(state.rate, params) if loans else raw_ponzi_fraction(state.rate, params)
        driver, clamped = _clamp01(raw)
        if driver == 0.0:
            raise NonConvergenceError(f"t={state.t + 1}: driving fraction underflowed to 0 at rate {state.rate!r}")
        new_rate = rate_from_loans(driver, params) if loans else rate_from_ponzi(driver, params)
    except OverflowError:
        new_rate = math.inf
    if not (math.isfinite(new_rate) and new_rate > 0):
        raise NonConvergenceError(f"t={state.t + 1}: rate left the floating-point range ({new_rate!r})")
    return make_state(state.t + 1, new_rate, params, state.n_tot, regime, clamped)


@dataclass(frozen=True)
class SchedulePeriod:
    """One block of the regime schedule; ``steps=None`` uses the run default."""

    period: Union[int, str]
    regime: Regime
    params: ModelParams
    steps: Optional[int] = None
    n_tot: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime.parse(self.regime))
        if self.steps is not None and self.steps < 0:
            raise ValidationError(f"period {self.period}: steps must be >= 0")
        if self.n_tot is not None and self.n_tot < 0:
            raise ValidationError(f"period {self.period}: n_tot must be >= 0")


def _as_period(entry) -> SchedulePeriod:
    if isinstance(entry, SchedulePeriod):
        return entry
    return SchedulePeriod(*entry)


def validate_schedule(schedule: Iterable) -> list[SchedulePeriod]:
    periods = [_as_period(e) for e in schedule]
    if not periods:
        raise ValidationError("schedule is empty")
    labels = [p.period for p in periods]
    if len(set(labels)) != len(labels):
        raise ValidationError(f"duplicate periods in schedule: {labels}")
    if all(isinstance(x, int) for x in labels):
        for a, b in zip(labels, labels[1:]):
            if b != a + 1:
                raise ValidationError(f"periods not contiguous: {a} then {b}")
    return periods


def run_trajectory(
    initial: SystemState,
    schedule: Sequence,
    steps_per_period: int = STEPS_PER_YEAR,
) -> list[SystemState]:
    """Iterate the schedule; parameters stay fixed within each period.

    Returns the initial state followed by one state per step.
    """
    if steps_per_period < 0:
        raise ValidationError("steps_per_period must be >= 0")
    periods = validate_schedule(schedule)
    states = [initial]
    state = initial
    for block in periods:
        if block.n_tot is not None and block.n_tot != state.n_tot:
            state = make_state(state.t, state.rate, block.params, block.n_tot,
                               state.regime, state.clamped)
        steps = steps_per_period if block.steps is None else block.steps
        for _ in range(steps):
            state = step(state, block.regime, block.params)
            states.append(state)
    return states


TRAJECTORY_COLUMNS = (
    "t", "regime", "rate", "loans_fraction", "ponzi_density",
    "n_tot", "n_loans", "n_ponzi", "clamped",
)


def trajectory_rows(states: Sequence[SystemState]) -> list[dict]:
    return [
        {
            "t": s.t,
            "regime": s.regime.value if s.regime else "",
            "rate": repr(s.rate),
            "loans_fraction": repr(s.loans_fraction),
            "ponzi_density": repr(s.ponzi_density),
            "n_tot": s.n_tot,
            "n_loans": s.n_loans,
            "n_ponzi": s.n_ponzi,
            "clamped": int(s.clamped),
        }
        for s in states
    ]
