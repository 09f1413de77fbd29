"""Scenario runs: config parsing, synthetic data and the yearly fit-then-simulate loop."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ._rng import rng_for
from .dynamics import (
    DEFAULT_EPSILON,
    STEPS_PER_YEAR,
    ModelParams,
    Regime,
    SchedulePeriod,
    SystemState,
    classify_stability,
    make_state,
    rate_for_density,
    rate_for_loans_fraction,
    run_trajectory,
    trajectory_rows,
)
from .errors import MinskyError, NumericError, ValidationError
from .estimation import fit_beta, fit_mu
from .firm_model import FirmRecord
from .io import read_firms

SECTOR = "Manufacturing"


def generate_synthetic_population(
    n: int,
    mu: float,
    beta: float,
    rate: float,
    params: ModelParams,
    seed: int,
    year: int = 2006,
    upper_share: float = 0.6,
    sector: str = SECTOR,
) -> list[FirmRecord]:
    """Synthetic firm-year records with prescribed resilience tails.

    Each firm gets a resilience quantile ``u``; both ratios are increasing in
    ``u`` so weak firms are weak on both measures.

    * EBIT/BL: for the top ``upper_share`` of firms ``P[X > x] =
      upper_share * (x / e**-1.5) ** mu`` above ``e**-1.5``; the rest are
      log-uniform over three e-folds below that.
    * EBTDA/FC ``= (i_max / rate) * u ** (1 / beta)``, so ``P[X < x] =
      (x * rate / i_max) ** beta`` and the share with EBTDA < FC, which is
      the ponzi share, equals ``(rate / i_max) ** beta``.
    """
    if n < 100:
        raise ValidationError("synthetic population needs n >= 100")
    if not mu < 0:
        raise ValidationError(f"mu must be negative, got {mu}")
    if not beta > 0:
        raise ValidationError(f"beta must be positive, got {beta}")
    if not 0 < rate:
        raise ValidationError("rate must be positive")
    if not 0 < upper_share < 1:
        raise ValidationError("upper_share must lie in (0, 1)")
    rng = rng_for(seed, "population")
    u = rng.random(n)
    x0 = math.exp(-1.5)
    lower = u < 1.0 - upper_share
    with np.errstate(divide="ignore", invalid="ignore"):
        ebit_bl = np.where(
            lower,
            x0 * np.exp(-3.0 * (1.0 - u / (1.0 - upper_share))),
            x0 * ((1.0 - u) / upper_share) ** (1.0 / mu),
        )
    ebtda_fc = (params.i_max / rate) * u ** (1.0 / beta)

    bank_loans = np.exp(rng.normal(math.log(1e5), 1.0, n))
    financial_costs = bank_loans * (rate / 100.0) * np.exp(rng.normal(0.0, 0.25, n))
    sales = np.exp(rng.normal(math.log(5e5), 1.2, n))
    purchases = sales * rng.uniform(0.3, 0.8, n)
    records = []
    for k in range(n):
        records.append(FirmRecord(
            firm_id=f"F{k:06d}",
            year=year,
            ebit=float(ebit_bl[k] * bank_loans[k]),
            bank_loans=float(bank_loans[k]),
            ebtda=float(ebtda_fc[k] * financial_costs[k]),
            financial_costs=float(financial_costs[k]),
            sales=float(sales[k]),
            purchases=float(purchases[k]),
            sector=sector,
        ))
    return records


# -- config ------------------------------------------------------------------------


@dataclass(frozen=True)
class FitSource:
    """Fit mu and beta from a firm dataset; the remaining parameters are given.

    Either ``dataset`` (a firm CSV, optionally restricted to ``year``) or
    ``synthetic`` (keyword arguments for the synthetic generator, drawn from
    the scenario seed) must be set.
    """

    i_min: float
    i_max: float
    alpha1: float
    alpha2: float
    dataset: Optional[str] = None
    year: Optional[int] = None
    synthetic: Optional[dict] = None


@dataclass(frozen=True)
class PeriodConfig:
    label: Union[int, str]
    regime: Regime
    steps: int = STEPS_PER_YEAR
    params: Optional[ModelParams] = None
    fit: Optional[FitSource] = None
    n_tot: Optional[int] = None


@dataclass(frozen=True)
class InitialConfig:
    n_tot: int
    rate: Optional[float] = None
    loans_fraction: Optional[float] = None
    ponzi_density: Optional[float] = None


@dataclass(frozen=True)
class ScenarioConfig:
    periods: tuple
    initial: InitialConfig
    seed: int
    epsilon: float = DEFAULT_EPSILON
    outputs: dict = field(default_factory=dict)
    base_dir: str = "."

    def __post_init__(self):
        if not self.periods:
            raise ValidationError("scenario needs at least one period")
        if self.seed is None:
            raise ValidationError("scenario seed is mandatory")


def _params(d: dict) -> ModelParams:
    try:
        return ModelParams(**{k: float(d[k]) for k in ("mu", "beta", "alpha1", "alpha2", "i_min", "i_max")})
    except KeyError as exc:
        raise ValidationError(f"params missing {exc.args[0]!r}") from None


def parse_config(doc: dict, base_dir: Union[str, Path] = ".") -> ScenarioConfig:
    """Build a :class:`ScenarioConfig` from its JSON form.

    Example::

        {"seed": 7,
         "initial": {"n_tot": 469893, "loans_fraction": 0.53},
         "periods": [{"label": 2003, "regime": "loans", "steps": 12,
                      "params": {"mu": -0.79, "beta": 1.29, "alpha1": -1.235,
                                 "alpha2": 0.78, "i_min": 2.42, "i_max": 49}}]}
    """
    if not isinstance(doc, dict):
        raise ValidationError("scenario config must be a JSON object")
    if "seed" not in doc:
        raise ValidationError("scenario config needs a 'seed'")
    periods = []
    for k, p in enumerate(doc.get("periods", [])):
        label = p.get("label", k)
        try:
            source = p.get("params_source", p)
            params = _params(source["params"]) if "params" in source else None
            fit = FitSource(**source["fit"]) if "fit" in source else None
            if (params is None) == (fit is None):
                raise ValidationError("give exactly one of 'params' or 'fit'")
            periods.append(PeriodConfig(
                label=label,
                regime=Regime.parse(p["regime"]),
                steps=int(p.get("steps", STEPS_PER_YEAR)),
                params=params,
                fit=fit,
                n_tot=p.get("n_tot"),
            ))
        except KeyError as exc:
            raise ValidationError(f"period {label}: missing {exc.args[0]!r}") from None
        except (TypeError, ValidationError) as exc:
            raise ValidationError(f"period {label}: {exc}") from None
        if periods[-1].steps < 0:
            raise ValidationError(f"period {label}: steps must be >= 0")
    init = doc.get("initial", {})
    given = [k for k in ("rate", "loans_fraction", "ponzi_density") if init.get(k) is not None]
    if len(given) != 1 or "n_tot" not in init:
        raise ValidationError("initial needs n_tot and exactly one of rate, loans_fraction, ponzi_density")
    initial = InitialConfig(**{k: init[k] for k in ("n_tot", *given)})
    return ScenarioConfig(
        periods=tuple(periods),
        initial=initial,
        seed=int(doc["seed"]),
        epsilon=float(doc.get("epsilon", DEFAULT_EPSILON)),
        outputs=dict(doc.get("outputs", {})),
        base_dir=str(base_dir),
    )


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ValidationError(f"{path}: config not found") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    return parse_config(doc, path.parent)


# -- run ---------------------------------------------------------------------------


@dataclass
class PeriodResult:
    label: Union[int, str]
    regime: Regime
    params: ModelParams
    loans_product: float
    crisis_product: float
    loans_stability: str
    crisis_stability: str
    active_stability: str
    end_rate: float
    end_loans_fraction: float
    end_ponzi_density: float
    fit: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "regime": self.regime.value,
            "params": self.params.to_dict(),
            "alpha1_mu": self.loans_product,
            "alpha2_beta": self.crisis_product,
            "loans_stability": self.loans_stability,
            "crisis_stability": self.crisis_stability,
            "active_stability": self.active_stability,
            "end_rate": self.end_rate,
            "end_loans_fraction": self.end_loans_fraction,
            "end_ponzi_density": self.end_ponzi_density,
            "fit": self.fit,
        }


@dataclass
class ScenarioReport:
    seed: int
    epsilon: float
    periods: list
    trajectory: list

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "epsilon": self.epsilon,
            "periods": [p.to_dict() for p in self.periods],
            "initial": trajectory_rows(self.trajectory[:1])[0],
            "final": trajectory_rows(self.trajectory[-1:])[0],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _resolve_params(period: PeriodConfig, config: ScenarioConfig) -> tuple[ModelParams, Optional[dict]]:
    if period.params is not None:
        return period.params, None
    src = period.fit
    if src.dataset is not None:
        path = Path(config.base_dir) / src.dataset
        records = read_firms(path)
        if src.year is not None:
            records = [r for r in records if r.year == src.year]
    elif src.synthetic is not None:
        kw = dict(src.synthetic)
        kw.setdefault("seed", config.seed)
        # only i_max enters the generator; the exponents come from kw
        scale = ModelParams(mu=-1.0, beta=1.0, alpha1=src.alpha1, alpha2=src.alpha2,
                            i_min=src.i_min, i_max=src.i_max)
        records = generate_synthetic_population(params=scale, **kw)
    else:
        raise ValidationError("fit source needs 'dataset' or 'synthetic'")
    mu_fit = fit_mu(records)
    beta_fit = fit_beta(records)
    params = ModelParams(mu=mu_fit.slope, beta=beta_fit.slope, alpha1=src.alpha1,
                         alpha2=src.alpha2, i_min=src.i_min, i_max=src.i_max)
    info = {"mu": mu_fit.slope, "r2_mu": mu_fit.r_squared, "beta": beta_fit.slope,
            "r2_beta": beta_fit.r_squared, "n_records": len(records),
            "n_excluded": mu_fit.n_excluded + beta_fit.n_excluded}
    return params, info


def _initial_state(init: InitialConfig, params: ModelParams) -> SystemState:
    if init.rate is not None:
        rate = float(init.rate)
    elif init.loans_fraction is not None:
        rate = rate_for_loans_fraction(float(init.loans_fraction), params)
    else:
        rate = rate_for_density(float(init.ponzi_density), params)
    return make_state(0, rate, params, int(init.n_tot))


def run_scenario(config: ScenarioConfig) -> ScenarioReport:
    """Run the periods in order, each starting from the previous end state."""
    results = []
    trajectory: list[SystemState] = []
    state = None
    for period in config.periods:
        try:
            params, fit_info = _resolve_params(period, config)
            if state is None:
                state = _initial_state(config.initial, params)
                trajectory.append(state)
            block = SchedulePeriod(period.label, period.regime, params, period.steps, period.n_tot)
            states = run_trajectory(state, [block])
        except NumericError as exc:
            raise NumericError(f"period {period.label}: {exc}") from exc
        except MinskyError as exc:
            raise ValidationError(f"period {period.label}: {exc}") from exc
        trajectory.extend(states[1:])
        state = states[-1]
        loans = classify_stability(params.loans_product, config.epsilon)
        crisis = classify_stability(params.crisis_product, config.epsilon)
        active = loans if period.regime is Regime.LOANS else crisis
        results.append(PeriodResult(
            label=period.label,
            regime=period.regime,
            params=params,
            loans_product=params.loans_product,
            crisis_product=params.crisis_product,
            loans_stability=loans.label.value,
            crisis_stability=crisis.label.value,
            active_stability=active.label.value,
            end_rate=state.rate,
            end_loans_fraction=state.loans_fraction,
            end_ponzi_density=state.ponzi_density,
            fit=fit_info,
        ))
    return ScenarioReport(config.seed, config.epsilon, results, trajectory)
