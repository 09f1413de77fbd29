from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from minsky.errors import InsufficientDataError, UndefinedRatioError, ValidationError
from minsky.firm_model import FirmRecord, MinskyStatus
from minsky.growth import (
    HEDGE_TO_HEDGE,
    HEDGE_TO_NON_HEDGE,
    GrowthPair,
    build_growth_pairs,
    estimated_growth,
    exclusion_counts,
    fit_growth_correlation,
    quadrant_counts,
    realized_growth,
    select_suppliers,
    transition_histogram,
)
from minsky.network import TradeNetwork

H, S, P = MinskyStatus.HEDGE, MinskyStatus.SPECULATIVE, MinskyStatus.PONZI


def firm(fid, year, sales=100.0, purchases=50.0, sector="Manufacturing", **kw):
    base = dict(ebit=10.0, bank_loans=5.0, ebtda=10.0, financial_costs=1.0)
    base.update(kw)
    return FirmRecord(fid, year, sales=sales, purchases=purchases, sector=sector, **base)


def star(weights):
    return TradeNetwork(edges=[(f"b{k}", "s", w) for k, w in enumerate(weights)])


weights_st = st.lists(st.floats(1.0, 1e4), min_size=1, max_size=12)


@given(weights_st)
def test_unchanged_purchases_give_unit_growth(weights):
    net = star(weights)
    p = {f"b{k}": 10.0 + k for k in range(len(weights))}
    assert estimated_growth(net, p, p, "s") == pytest.approx(1.0, abs=1e-12)


@given(weights_st, st.floats(0.1, 10.0))
def test_uniform_growth_is_returned(weights, g):
    net = star(weights)
    p0 = {f"b{k}": 3.0 + k for k in range(len(weights))}
    p1 = {b: v * g for b, v in p0.items()}
    assert estimated_growth(net, p0, p1, "s") == pytest.approx(g, rel=1e-12)


@settings(deadline=None)
@given(weights_st, st.lists(st.floats(0.2, 5.0), min_size=12, max_size=12), st.floats(1e-3, 1e3))
def test_weight_scale_invariance(weights, growth, scale):
    p0 = {f"b{k}": 1.0 for k in range(len(weights))}
    p1 = {f"b{k}": growth[k] for k in range(len(weights))}
    a = estimated_growth(star(weights), p0, p1, "s")
    b = estimated_growth(star([w * scale for w in weights]), p0, p1, "s")
    assert b == pytest.approx(a, rel=1e-12)


def test_unnormalised_growth_is_weighted_sum():
    net = star([2.0, 3.0])
    value = estimated_growth(net, {"b0": 1.0, "b1": 2.0}, {"b0": 2.0, "b1": 1.0}, "s", normalize=False)
    assert value == pytest.approx(2.0 * 2.0 + 3.0 * 0.5)


def test_buyers_without_prior_purchases_are_skipped():
    net = star([1.0, 1.0])
    assert estimated_growth(net, {"b0": 1.0, "b1": 0.0}, {"b0": 3.0, "b1": 5.0}, "s") == 3.0
    with pytest.raises(InsufficientDataError):
        estimated_growth(net, {}, {}, "s")


def test_realized_growth():
    assert realized_growth(firm("s", 1, sales=80.0), firm("s", 2, sales=100.0)) == 1.25
    with pytest.raises(UndefinedRatioError):
        realized_growth(firm("s", 1, sales=0.0), firm("s", 2))


def test_supplier_selection_reasons():
    net = TradeNetwork(edges=[
        ("x", "ok", 80.0), ("x", "over", 130.0), ("x", "gone", 80.0),
        ("x", "retail", 80.0), ("x", "nodata", 80.0),
    ])
    year1 = [firm(s, 2006) for s in ("ok", "over", "gone")] + [firm("retail", 2006, sector="Retail")]
    year2 = [firm(s, 2007) for s in ("ok", "over", "retail")]
    picks = {s.supplier_id: s for s in select_suppliers(year1, year2, net)}
    assert picks["ok"].included and picks["ok"].coverage == 0.8
    assert picks["over"].reason == "coverage" and picks["over"].coverage == 1.3
    assert picks["gone"].reason == "disappeared"
    assert picks["retail"].reason == "sector"
    assert picks["nodata"].reason == "missing"
    assert "x" not in picks  # no buyers, not a supplier
    assert exclusion_counts(picks.values()) == {
        "coverage": 1, "disappeared": 1, "included": 1, "missing": 1, "sector": 1,
    }
    # the sector filter can be switched off
    assert {s.supplier_id for s in select_suppliers(year1, year2, net, sector_filter=None) if s.included} == {
        "ok", "retail"
    }


def test_coverage_checked_in_second_year():
    net1 = TradeNetwork(edges=[("x", "s", 80.0)])
    net2 = TradeNetwork(edges=[("x", "s", 40.0)])
    [sel] = select_suppliers([firm("s", 1)], [firm("s", 2)], net1, net2)
    assert sel.reason == "coverage" and sel.coverage_next == 0.4


def test_correlation_fit_on_exact_pairs():
    xs = np.linspace(0.5, 2.0, 20)
    pairs = [GrowthPair(f"s{k}", x, x, H, H) for k, x in enumerate(xs)]
    fit = fit_growth_correlation(pairs, HEDGE_TO_HEDGE)
    assert fit.slope == pytest.approx(1.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_correlation_groups_and_minimum_size():
    pairs = [GrowthPair("a", 1.1, 1.2, H, H), GrowthPair("b", 0.9, 1.2, H, P), GrowthPair("c", 1.2, 0.8, H, S)]
    with pytest.raises(InsufficientDataError):
        fit_growth_correlation(pairs, HEDGE_TO_NON_HEDGE)
    with pytest.raises(ValidationError):
        GrowthPair("bad", -1.0, 1.0, H, H)


def _correlated(n, noise, seed):
    rng = np.random.default_rng(seed)
    lx = rng.normal(0.0, 0.3, n)
    ly = lx + rng.normal(0.0, noise, n)
    return lx, ly


def test_shuffled_pairs_have_no_correlation():
    lx, ly = _correlated(500, 0.05, seed=1)
    ly = np.random.default_rng(2).permutation(ly)
    pairs = [GrowthPair(k, math.exp(a), math.exp(b), H, H) for k, (a, b) in enumerate(zip(lx, ly))]
    assert fit_growth_correlation(pairs).r_squared < 0.05


def test_noise_tuned_to_target_r2_is_recovered():
    target, sx = 0.42, 0.3
    noise = sx * math.sqrt(1.0 / target - 1.0)  # R^2 = var(x) / (var(x) + var(noise)) at slope 1
    lx, ly = _correlated(2000, noise, seed=3)
    pairs = [GrowthPair(k, math.exp(a), math.exp(b), H, P) for k, (a, b) in enumerate(zip(lx, ly))]
    assert fit_growth_correlation(pairs, HEDGE_TO_NON_HEDGE).r_squared == pytest.approx(target, abs=0.05)


def test_transition_histogram_crossing():
    rng = np.random.default_rng(4)
    stayers = np.clip(rng.normal(0.04, 0.03, 400), 0, 1)
    leavers = np.clip(rng.normal(0.25, 0.08, 300), 0, 1)
    data = [(r, True) for r in stayers] + [(r, False) for r in leavers]
    h = transition_histogram(data, 0.05)
    assert 0.10 <= h.crossing <= 0.15
    assert h.stayers.sum() == pytest.approx(1.0) and h.leavers.sum() == pytest.approx(1.0)
    assert h.n_stayers == 400 and h.n_leavers == 300


def test_transition_histogram_bins_are_centred():
    h = transition_histogram([(0.0, True), (0.024, True), (0.026, False), (1.0, False)], 0.05)
    assert h.centers[0] == 0.0 and h.centers[-1] == pytest.approx(1.0)
    assert h.stayers[0] == 1.0
    assert h.leavers[1] == 0.5 and h.leavers[-1] == 0.5
    assert h.crossing == pytest.approx(0.05)


def test_transition_histogram_edge_cases():
    only_stayers = transition_histogram([(0.1, True), (0.2, True)])
    assert only_stayers.leavers is None and only_stayers.crossing is None
    with pytest.raises(InsufficientDataError):
        transition_histogram([])
    with pytest.raises(ValidationError):
        transition_histogram([(1.2, True)])


def test_quadrant_counts():
    pairs = [
        GrowthPair("a", 1.2, 1.1, H, H), GrowthPair("b", 0.8, 1.1, H, H),
        GrowthPair("c", 0.8, 0.9, H, H), GrowthPair("d", 1.2, 0.9, H, H),
        GrowthPair("e", 1.0, 0.9, H, H), GrowthPair("f", 0.7, 1.3, H, P),
    ]
    assert quadrant_counts(pairs) == {"I": 1, "II": 2, "III": 1, "IV": 1, "axis": 1}


def test_build_growth_pairs_end_to_end():
    net = TradeNetwork(edges=[("b1", "s", 40.0), ("b2", "s", 40.0), ("b1", "t", 90.0)])
    year1 = [
        firm("s", 2006, sales=100.0), firm("t", 2006, sales=100.0),
        firm("b1", 2006, purchases=100.0), firm("b2", 2006, purchases=100.0, ebit=1.0, ebtda=0.5),
    ]
    year2 = [
        firm("s", 2007, sales=120.0, ebit=1.0, ebtda=0.5), firm("t", 2007, sales=90.0),
        firm("b1", 2007, purchases=150.0), firm("b2", 2007, purchases=50.0),
    ]
    from minsky.firm_model import statuses_by_firm

    selections = select_suppliers(year1, year2, net)
    pairs, skipped = build_growth_pairs(
        year1, year2, net, selections, statuses_by_firm(year1, 2006), statuses_by_firm(year2, 2007)
    )
    assert skipped == {}
    by_id = {p.supplier_id: p for p in pairs}
    assert by_id["s"].estimated == pytest.approx(1.0)
    assert by_id["s"].realized == pytest.approx(1.2)
    assert by_id["s"].status_from is H and by_id["s"].status_to is P
    assert by_id["s"].ponzi_buyer_ratio == 0.5
    assert by_id["t"].estimated == pytest.approx(1.5)
