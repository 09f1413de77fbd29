"""Command-line interface.

Subcommands: ``fit``, ``classify``, ``simulate``, ``network gen``,
``contagion run``, ``analyze growth``, ``scenario run``, ``generate population``.
Exit codes: 0 success, 2 validation error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from pathlib import Path

from . import io
from .dynamics import (
    ModelParams,
    SchedulePeriod,
    TRAJECTORY_COLUMNS,
    make_state,
    rate_for_density,
    run_trajectory,
    trajectory_rows,
)
from .errors import NumericError, ValidationError
from .estimation import (
    RateSeries,
    calibrate_bound_alpha,
    fit_beta,
    fit_mu,
)
from .firm_model import MinskyStatus, classify, statuses_by_firm
from .growth import (
    HEDGE_TO_HEDGE,
    HEDGE_TO_NON_HEDGE,
    build_growth_pairs,
    exclusion_counts,
    fit_growth_correlation,
    quadrant_counts,
    select_suppliers,
    transition_histogram,
)
from .network import (
    DegreeModel,
    ThresholdMode,
    bootstrap_cascade,
    failure_cascade,
    generate_network,
    plant_statuses,
)
from .scenario import generate_synthetic_population, load_config, run_scenario

log = logging.getLogger("minsky")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3


def _emit(args, name: str, columns, rows) -> Path:
    out = Path(args.out)
    rows = list(rows)
    if args.format == "json":
        path = out / f"{name}.json"
        io.write_json(path, [{c: r.get(c) for c in columns} for r in rows])
    else:
        path = out / f"{name}.csv"
        io.write_csv(path, columns, rows)
    print(path)
    return path


def _params_from_args(args) -> ModelParams:
    missing = [k for k in ("mu", "beta", "alpha1", "alpha2", "i_min", "i_max") if getattr(args, k) is None]
    if missing:
        raise ValidationError(f"missing model parameters: {', '.join(missing)}")
    return ModelParams(args.mu, args.beta, args.alpha1, args.alpha2, args.i_min, args.i_max)


# -- fit -----------------------------------------------------------------------------

FIT_COLUMNS = ("year", "mu", "i_min", "beta", "i_max", "r2_mu", "r2_beta", "n_excluded")


def _excluded(records) -> int:
    def bad(a, b):
        return a is None or b is None or not (a > 0 and b > 0)
    return sum(bad(r.ebit, r.bank_loans) or bad(r.ebtda, r.financial_costs) for r in records)


def cmd_fit(args) -> int:
    records = io.read_firms(args.firms, args.max_invalid)
    years = sorted({r.year for r in records})
    if args.year is not None:
        years = [y for y in years if y == args.year]
    if not years:
        raise ValidationError("no firm records for the requested year(s)")
    by_year = {y: [r for r in records if r.year == y] for y in years}
    i_min, i_max = args.i_min, args.i_max
    if args.rates:
        i_min, i_max = _calibrate_bounds(io.read_rates(args.rates, args.max_invalid), by_year)
    rows = []
    for y in years:
        mu = fit_mu(by_year[y])
        beta = fit_beta(by_year[y])
        rows.append({"year": y, "mu": mu.slope, "i_min": i_min, "beta": beta.slope, "i_max": i_max,
                     "r2_mu": mu.r_squared, "r2_beta": beta.r_squared,
                     "n_excluded": _excluded(by_year[y])})
    _emit(args, "params", FIT_COLUMNS, rows)
    return EXIT_OK


def _calibrate_bounds(rates: RateSeries, by_year: dict) -> tuple[float, float]:
    """Yearly calibration: rate of year t against fractions of year t-1.

    The hedge share stands in for the loans fraction.
    """
    rate_of = dict(zip(rates.years(), rates.rates))
    loans, ponzi, observed = [], [], []
    for y, recs in sorted(by_year.items()):
        if y + 1 not in rate_of:
            continue
        counts = Counter(classify(r) for r in recs)
        n = sum(counts.values())
        loans.append(counts[MinskyStatus.HEDGE] / n)
        ponzi.append(counts[MinskyStatus.PONZI] / n)
        observed.append(rate_of[y + 1])
    if len(observed) < 2:
        raise ValidationError("bound calibration needs rates for at least two following years")
    return (calibrate_bound_alpha(observed, loans).bound,
            calibrate_bound_alpha(observed, ponzi).bound)


# -- classify ------------------------------------------------------------------------


def cmd_classify(args) -> int:
    records = io.read_firms(args.firms, args.max_invalid)
    rows, summary = [], {}
    for r in records:
        status = classify(r)
        rows.append({"firm_id": r.firm_id, "year": r.year, "status": status.value})
        summary.setdefault(r.year, Counter())[status.value] += 1
    _emit(args, "statuses", ("firm_id", "year", "status"), rows)
    table = []
    for year, c in sorted(summary.items()):
        n = sum(c.values())
        table.append({"year": year, "n_tot": n, "n_hedge": c["hedge"], "n_speculative": c["speculative"],
                      "n_ponzi": c["ponzi"], "hedge_density": c["hedge"] / n, "ponzi_density": c["ponzi"] / n})
    _emit(args, "population", ("year", "n_tot", "n_hedge", "n_speculative", "n_ponzi",
                               "hedge_density", "ponzi_density"), table)
    return EXIT_OK


# -- simulate ------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    params = _params_from_args(args)
    if (args.rate is None) == (args.density is None):
        raise ValidationError("give exactly one of --rate or --density")
    rate = args.rate if args.rate is not None else rate_for_density(args.density, params)
    initial = make_state(0, rate, params, args.n_tot)
    states = run_trajectory(initial, [SchedulePeriod(args.period, args.regime, params, args.steps)])
    _emit(args, "trajectory", TRAJECTORY_COLUMNS, trajectory_rows(states))
    return EXIT_OK


# -- network -------------------------------------------------------------------------


def cmd_network_gen(args) -> int:
    model = DegreeModel(args.pareto_exponent, args.mean_degree, args.max_degree)
    net = generate_network(args.n, model, args.seed)
    rows = [{"buyer_id": b, "supplier_id": s, "weight": w} for b, s, w in net.edges()]
    _emit(args, "edges", io.EDGE_COLUMNS, rows)
    return EXIT_OK


def _load_statuses(args, net) -> dict:
    if args.statuses:
        data = {}
        with open(args.statuses, encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            if header[:2] != ["firm_id", "status"]:
                raise ValidationError("status CSV header must start with firm_id,status")
            for line in fh:
                if line.strip():
                    firm, status = line.strip().split(",")[:2]
                    data[firm] = MinskyStatus.parse(status)
        return data
    if args.firms:
        if args.year is None:
            raise ValidationError("--year is required with --firms")
        return statuses_by_firm(io.read_firms(args.firms, args.max_invalid), args.year)
    if args.plant_density is not None:
        return plant_statuses(net, args.plant_density, args.seed)
    raise ValidationError("give --statuses, --firms or --plant-density")


def cmd_contagion(args) -> int:
    net = io.read_network(args.edges, args.max_invalid)
    statuses = {k: v for k, v in _load_statuses(args, net).items() if k in net}
    if args.mode == "failure":
        if not args.initial:
            raise ValidationError("failure cascade needs --initial")
        report = failure_cascade(net, statuses, args.initial.split(","))
    else:
        report = bootstrap_cascade(net, statuses, args.threshold, ThresholdMode.parse(args.threshold_mode),
                                   args.max_rounds)
    _emit(args, "cascade", ("round", "new_failures", "cumulative_failures"), report.rows())
    return EXIT_OK


# -- growth --------------------------------------------------------------------------

GROWTH_COLUMNS = ("supplier_id", "estimated", "realized", "status_from", "status_to", "ponzi_buyer_ratio")


def cmd_growth(args) -> int:
    records = io.read_firms(args.firms, args.max_invalid)
    net = io.read_network(args.edges, args.max_invalid)
    net_next = io.read_network(args.edges_next, args.max_invalid) if args.edges_next else None
    rec_t = [r for r in records if r.year == args.year_from]
    rec_t1 = [r for r in records if r.year == args.year_to]
    sector = None if args.no_sector_filter else args.sector
    selections = select_suppliers(rec_t, rec_t1, net, net_next, sector)
    pairs, skipped = build_growth_pairs(
        rec_t, rec_t1, net, selections,
        statuses_by_firm(rec_t, args.year_from), statuses_by_firm(rec_t1, args.year_to),
        normalize=not args.unnormalized,
    )
    rows = [{"supplier_id": p.supplier_id, "estimated": p.estimated, "realized": p.realized,
             "status_from": p.status_from.value, "status_to": p.status_to.value,
             "ponzi_buyer_ratio": p.ponzi_buyer_ratio} for p in pairs]
    _emit(args, "growth", GROWTH_COLUMNS, rows)

    hedge_pairs = [p for p in pairs if p.status_from is MinskyStatus.HEDGE]
    summary = {"selection": exclusion_counts(selections), "skipped": skipped,
               "n_pairs": len(pairs), "normalized": not args.unnormalized}
    fits = {}
    for name, group in (("hedge_to_hedge", HEDGE_TO_HEDGE), ("hedge_to_non_hedge", HEDGE_TO_NON_HEDGE)):
        try:
            f = fit_growth_correlation(pairs, group)
            fits[name] = {"slope": f.slope, "intercept": f.intercept, "r_squared": f.r_squared, "n": f.n_points}
        except ValidationError as exc:
            fits[name] = {"error": str(exc)}
    summary["fits"] = fits
    if hedge_pairs:
        h = transition_histogram(
            [(p.ponzi_buyer_ratio, p.status_to is MinskyStatus.HEDGE) for p in hedge_pairs], args.bin_width)
        summary["histogram"] = {
            "centers": h.centers.tolist(),
            "stayers": None if h.stayers is None else h.stayers.tolist(),
            "leavers": None if h.leavers is None else h.leavers.tolist(),
            "crossing": h.crossing,
        }
    summary["quadrants"] = {
        "hedge_to_hedge": quadrant_counts(p for p in hedge_pairs if p.status_to is MinskyStatus.HEDGE),
        "hedge_to_non_hedge": quadrant_counts(p for p in hedge_pairs if p.status_to is not MinskyStatus.HEDGE),
    }
    path = Path(args.out) / "growth_summary.json"
    io.write_json(path, summary)
    print(path)
    return EXIT_OK


# -- scenario / population -----------------------------------------------------------


def cmd_scenario(args) -> int:
    if not args.config:
        raise ValidationError("scenario run needs --config")
    config = load_config(args.config)
    report = run_scenario(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    print(out / "report.json")
    _emit(args, "trajectory", TRAJECTORY_COLUMNS, trajectory_rows(report.trajectory))
    return EXIT_OK


def cmd_population(args) -> int:
    scale = ModelParams(mu=args.mu, beta=args.beta, alpha1=0.0, alpha2=0.0,
                        i_min=min(args.i_min, args.i_max / 2), i_max=args.i_max)
    records = generate_synthetic_population(args.n, args.mu, args.beta, args.rate, scale,
                                            args.seed, year=args.year)
    _emit(args, "firms", io.FIRM_COLUMNS, io.firm_rows(records))
    return EXIT_OK


# -- parser --------------------------------------------------------------------------


def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=d(0), help="master seed (u64)")
    parser.add_argument("--config", default=d(None), help="JSON file of option defaults or scenario")
    parser.add_argument("--out", default=d("."), help="output directory")
    parser.add_argument("--format", choices=("csv", "json"), default=d("csv"))
    parser.add_argument("--max-invalid", type=float, default=d(io.DEFAULT_MAX_INVALID),
                        help="hard-fail fraction of invalid input rows")
    parser.add_argument("-v", "--verbose", action="store_true", default=d(False))


def _model_args(p: argparse.ArgumentParser) -> None:
    for name in ("mu", "beta", "alpha1", "alpha2"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--i-min", dest="i_min", type=float)
    p.add_argument("--i-max", dest="i_max", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="minsky", description=__doc__.splitlines()[0])
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, parent=sub):
        p = parent.add_parser(name, help=help_)
        _common(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("fit", cmd_fit, "fit mu and beta per year from a firm CSV")
    p.add_argument("--firms", required=True)
    p.add_argument("--rates", help="rate series CSV (period,rate) for bound calibration")
    p.add_argument("--year", type=int)
    p.add_argument("--i-min", dest="i_min", type=float)
    p.add_argument("--i-max", dest="i_max", type=float)

    p = add("classify", cmd_classify, "classify firm records hedge/speculative/ponzi")
    p.add_argument("--firms", required=True)

    p = add("simulate", cmd_simulate, "iterate one regime from an initial rate or density")
    _model_args(p)
    p.add_argument("--regime", default="crisis")
    p.add_argument("--steps", type=int, default=12)
    p.add_argument("--rate", type=float)
    p.add_argument("--density", type=float)
    p.add_argument("--n-tot", dest="n_tot", type=int, default=100000)
    p.add_argument("--period", default="run")

    net = sub.add_parser("network", help="trade network tools")
    netsub = net.add_subparsers(dest="network_command", required=True)
    p = add("gen", cmd_network_gen, "generate a configuration-model trade network", netsub)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--pareto-exponent", type=float, default=1.3)
    p.add_argument("--mean-degree", type=float, default=35.5)
    p.add_argument("--max-degree", type=int)

    cont = sub.add_parser("contagion", help="contagion cascades")
    contsub = cont.add_subparsers(dest="contagion_command", required=True)
    p = add("run", cmd_contagion, "run a failure or bootstrap cascade", contsub)
    p.add_argument("--edges", required=True)
    p.add_argument("--mode", choices=("failure", "bootstrap"), default="bootstrap")
    p.add_argument("--statuses", help="CSV firm_id,status")
    p.add_argument("--firms", help="firm CSV; statuses by classification")
    p.add_argument("--year", type=int)
    p.add_argument("--plant-density", type=float, help="plant random ponzi statuses")
    p.add_argument("--initial", help="comma-separated initially failed firm ids")
    p.add_argument("--threshold", type=float, default=0.15)
    p.add_argument("--threshold-mode", default="fraction", choices=("fraction", "count"))
    p.add_argument("--max-rounds", type=int, help="stop the bootstrap cascade after this many rounds")

    ana = sub.add_parser("analyze", help="empirical analyses")
    anasub = ana.add_subparsers(dest="analyze_command", required=True)
    p = add("growth", cmd_growth, "estimated vs realised supplier growth", anasub)
    p.add_argument("--firms", required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--edges-next", help="second-year edges for coverage")
    p.add_argument("--year-from", type=int, required=True)
    p.add_argument("--year-to", type=int, required=True)
    p.add_argument("--sector", default="Manufacturing")
    p.add_argument("--no-sector-filter", action="store_true")
    p.add_argument("--unnormalized", action="store_true")
    p.add_argument("--bin-width", type=float, default=0.05)

    scen = sub.add_parser("scenario", help="scenario runs")
    scensub = scen.add_subparsers(dest="scenario_command", required=True)
    add("run", cmd_scenario, "run a JSON scenario config", scensub)

    gen = sub.add_parser("generate", help="synthetic data")
    gensub = gen.add_subparsers(dest="generate_command", required=True)
    p = add("population", cmd_population, "synthetic firm records", gensub)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--i-max", dest="i_max", type=float, default=49.0)
    p.add_argument("--i-min", dest="i_min", type=float, default=2.42)
    p.add_argument("--year", type=int, default=2006)
    return parser


def _apply_config_defaults(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if args.config and getattr(args, "func", None) is not cmd_scenario:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise ValidationError("config must be a JSON object")
        explicit = vars(args)
        for key, value in doc.items():
            key = key.replace("-", "_")
            if explicit.get(key) is None:
                setattr(args, key, value)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config_defaults(parser, argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
