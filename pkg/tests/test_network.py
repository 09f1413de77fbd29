from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _oracles import brute_bootstrap, brute_failure
from minsky.dynamics import ModelParams
from minsky.errors import SupercriticalError, UndefinedRatioError, ValidationError
from minsky.estimation import fit_tail
from minsky.firm_model import MinskyStatus
from minsky.network import (
    DegreeModel,
    InfeasibleDegreeError,
    PercolationParams,
    ThresholdMode,
    TradeNetwork,
    bootstrap_cascade,
    critical_density_from_rate,
    critical_rate,
    expected_failures,
    failure_cascade,
    fit_percolation,
    generate_network,
    plant_statuses,
    ponzi_buyer_ratio,
    random_network,
)

H, S, P = MinskyStatus.HEDGE, MinskyStatus.SPECULATIVE, MinskyStatus.PONZI


def test_trade_network_basics():
    net = TradeNetwork(edges=[("a", "b", 2.0), ("a", "b", 3.0), ("c", "b", 1.0)])
    assert net.weight("a", "b") == 5.0
    assert set(net.buyers("b")) == {"a", "c"}
    assert net.suppliers("a") == ("b",)
    assert net.invoice_total("b") == 6.0
    assert net.in_degree("b") == 2 and net.out_degree("b") == 0
    assert net.partners("b") == {"a", "c"}


@pytest.mark.parametrize("edge", [("a", "a", 1.0), ("a", "b", 0.0), ("a", "b", math.inf)])
def test_trade_network_rejects_bad_edges(edge):
    with pytest.raises(ValidationError):
        TradeNetwork(edges=[edge])


def test_generated_degrees_follow_pareto_tail():
    net = generate_network(10_000, DegreeModel(1.3, 35.5), seed=1)
    k = net.in_degrees()
    assert abs(k.mean() - 35.5) <= 3.55
    fit = fit_tail(k[k > 0], "upper", math.log(10))
    assert abs(fit.slope + 1.3) <= 0.15


def test_generation_is_seeded():
    a = generate_network(300, DegreeModel(1.5, 6.0), seed=4)
    b = generate_network(300, DegreeModel(1.5, 6.0), seed=4)
    c = generate_network(300, DegreeModel(1.5, 6.0), seed=5)
    assert a.edges() == b.edges()
    assert a.edges() != c.edges()


def test_explicit_degrees_are_realised_without_self_loops():
    degrees = [0, 1, 2, 3, 4, 5, 9, 9, 9, 9]
    net = generate_network(10, seed=2, in_degrees=degrees)
    assert net.in_degrees().tolist() == degrees
    assert all(b != s for b, s, _ in net.edges())
    w = np.array([w for _, _, w in net.edges()])
    assert np.all((w >= 1) & (w <= 1e4))


def test_infeasible_degrees():
    with pytest.raises(InfeasibleDegreeError):
        generate_network(5, seed=0, in_degrees=[5, 0, 0, 0, 0])
    with pytest.raises(InfeasibleDegreeError):
        generate_network(1000, DegreeModel(1.3, 0.5), seed=0)


def test_random_network_edge_count():
    net = random_network(500, 4, seed=3)
    assert net.n_edges == 2000


# -- percolation law -----------------------------------------------------------


def test_expected_failures_closed_form():
    p = PercolationParams(rho_c=0.18, gamma=1.5, s=2.0)
    exact = mpmath.mpf(2) * (1 - mpmath.mpf("0.09") / mpmath.mpf("0.18")) ** mpmath.mpf("-1.5")
    assert expected_failures(0.09, p) == pytest.approx(float(exact), rel=1e-12)
    assert expected_failures(0.0, p) == 2.0


def test_supercritical_signal():
    p = PercolationParams(0.18, 1.0, 1.0)
    with pytest.raises(SupercriticalError) as info:
        expected_failures(0.19, p)
    assert info.value.density == 0.19 and info.value.critical == 0.18
    with pytest.raises(SupercriticalError):
        expected_failures(0.18, p)


def test_critical_rate_round_trip():
    params = ModelParams(-0.76, 1.27, -1.325, 0.85, 2.42, 49.0)
    rate = critical_rate(0.18, params)
    assert rate == pytest.approx(12.6997881898523, rel=1e-12)
    assert critical_density_from_rate(rate, params) == pytest.approx(0.18, rel=1e-12)


def test_fit_percolation_exact_law():
    truth = PercolationParams(0.2, 1.3, 1.5)
    rho = np.linspace(0.02, 0.17, 8)
    fitted = fit_percolation(rho, [expected_failures(r, truth) for r in rho])
    assert fitted.rho_c == pytest.approx(0.2, rel=1e-4)
    assert fitted.gamma == pytest.approx(1.3, rel=1e-3)


def _mean_failures(seeds, rhos, n=500, mean_degree=4):
    out = []
    for rho in rhos:
        sizes = []
        for s in seeds:
            net = random_network(n, mean_degree, s)
            statuses = plant_statuses(net, rho, s)
            sizes += [len(failure_cascade(net, statuses, [v]).failed) for v in net.nodes]
        out.append(np.mean(sizes))
    return np.array(out)


@pytest.mark.slow
def test_failure_sweep_fit_is_self_consistent():
    # every node in turn is the initial failure; two independent graph ensembles
    full = np.array([0.05, 0.10, 0.15, 0.25, 0.4, 0.6])
    sweep = _mean_failures(range(1, 6), full)
    assert np.all(np.diff(sweep) > 0)
    # knee: growth per unit density past 0.15 dwarfs growth below 0.10
    slopes = np.diff(sweep) / np.diff(full)
    assert slopes[2] > 10 * slopes[0]

    rhos = np.array([0.04, 0.06, 0.08, 0.10, 0.12, 0.14, 0.16])
    first = _mean_failures(range(1, 41), rhos)
    second = _mean_failures(range(101, 141), rhos)
    fit_a, fit_b = fit_percolation(rhos, first), fit_percolation(rhos, second)
    predicted = np.array([expected_failures(r, fit_a) for r in rhos])
    assert np.max(np.abs(predicted / second - 1)) < 0.15
    assert fit_b.rho_c == pytest.approx(fit_a.rho_c, rel=0.15)
    assert fit_b.gamma == pytest.approx(fit_a.gamma, rel=0.15)


# -- cascades ------------------------------------------------------------------


def test_failure_without_ponzi_is_initial_only():
    net = TradeNetwork(edges=[("a", "b", 1), ("b", "c", 1)])
    report = failure_cascade(net, {"a": H, "b": H, "c": S}, {"a"})
    assert report.failed == {"a"} and report.rounds == ()


def test_failure_chain():
    net = TradeNetwork(edges=[("A", "B", 1), ("B", "C", 1)])
    report = failure_cascade(net, {"A": H, "B": P, "C": P}, {"A"})
    assert report.rounds == (frozenset({"B"}), frozenset({"C"}))
    assert report.failed == {"A", "B", "C"}
    assert [r["cumulative_failures"] for r in report.rows()] == [1, 2, 3]


def test_failure_spreads_against_edge_direction():
    net = TradeNetwork(edges=[("B", "A", 1)])
    assert failure_cascade(net, {"B": P}, {"A"}).failed == {"A", "B"}


def test_unknown_ids_rejected():
    net = TradeNetwork(edges=[("a", "b", 1)])
    with pytest.raises(ValidationError):
        failure_cascade(net, {}, {"zzz"})
    with pytest.raises(ValidationError):
        bootstrap_cascade(net, {"zzz": P}, 0.15)


def test_bootstrap_converts_at_ratio_above_threshold():
    edges = [(f"b{k}", "s", 1) for k in range(10)]
    statuses = {f"b{k}": (P if k < 2 else H) for k in range(10)}
    statuses["s"] = H
    report = bootstrap_cascade(TradeNetwork(edges=edges), statuses, 0.15)
    assert report.rounds == (frozenset({"s"}),)


def test_bootstrap_without_ponzi_is_fixed_point():
    net = random_network(50, 3, seed=1)
    report = bootstrap_cascade(net, {v: H for v in net.nodes}, 0.15)
    assert report.rounds == () and report.failed == frozenset()


@pytest.mark.parametrize("threshold, converts", [(5, True), (6, False)])
def test_bootstrap_count_threshold_on_star(threshold, converts):
    edges = [(f"leaf{k}", "hub", 1) for k in range(6)]
    statuses = {f"leaf{k}": (P if k < 5 else H) for k in range(6)}
    statuses["hub"] = H
    report = bootstrap_cascade(TradeNetwork(edges=edges), statuses, threshold, ThresholdMode.ABSOLUTE_COUNT)
    assert ("hub" in report.failed) is converts


def test_bootstrap_speculative_firms_neither_convert_nor_spread():
    edges = [("p", "s", 1), ("s", "h", 1)]
    report = bootstrap_cascade(TradeNetwork(edges=edges), {"p": P, "s": S, "h": H}, 0.5)
    assert report.failed == {"p"}


@pytest.mark.parametrize("threshold, mode", [(0.0, "fraction"), (1.5, "fraction"), (-1, "count")])
def test_bootstrap_invalid_threshold(threshold, mode):
    with pytest.raises(ValidationError):
        bootstrap_cascade(TradeNetwork(edges=[("a", "b", 1)]), {}, threshold, mode)


def test_ponzi_buyer_ratio():
    net = TradeNetwork(edges=[("a", "s", 1), ("b", "s", 1), ("c", "s", 1), ("d", "s", 1)])
    assert ponzi_buyer_ratio(net, {"a": P, "b": H}, "s") == 0.25
    with pytest.raises(UndefinedRatioError):
        ponzi_buyer_ratio(net, {}, "a")


status_strategy = st.sampled_from([H, S, P])


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    n=st.integers(2, 40),
    degree=st.floats(0.2, 4.0),
    threshold=st.sampled_from([0.1, 0.15, 0.25, 0.5, 1.0]),
    data=st.data(),
)
def test_cascades_match_brute_force(seed, n, degree, threshold, data):
    net = random_network(n, min(degree, n - 1), seed)
    statuses = {v: data.draw(status_strategy) for v in net.nodes}
    plain = {v: s.value for v, s in statuses.items()}
    edges = net.edges()

    boot = bootstrap_cascade(net, statuses, threshold)
    rounds, final = brute_bootstrap(net.nodes, edges, plain, threshold, "fraction")
    assert [set(r) for r in boot.rounds] == rounds and boot.failed == final

    initial = {net.nodes[0]}
    fail = failure_cascade(net, statuses, initial)
    rounds, final = brute_failure(edges, plain, initial)
    assert [set(r) for r in fail.rounds] == rounds and fail.failed == final


def test_bootstrap_max_rounds_truncates_cascade():
    # chain p -> a -> b -> c: one conversion per round
    net = TradeNetwork(edges=[("p", "a", 1), ("a", "b", 1), ("b", "c", 1)])
    statuses = {"p": P, "a": H, "b": H, "c": H}
    assert len(bootstrap_cascade(net, statuses, 0.5).rounds) == 3
    assert bootstrap_cascade(net, statuses, 0.5, max_rounds=1).failed == {"p", "a"}
    assert bootstrap_cascade(net, statuses, 0.5, max_rounds=0).rounds == ()
    with pytest.raises(ValidationError):
        bootstrap_cascade(net, statuses, 0.5, max_rounds=-1)
