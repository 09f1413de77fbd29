"""Supplier growth analyses on the trade network.

Compares each supplier's sales growth with the growth implied by its
buyers' purchases, tabulates status transitions against the share of ponzi
buyers, and fits power-law growth correlations per transition group.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import InsufficientDataError, UndefinedRatioError, ValidationError
from .estimation import FitResult, ols
from .firm_model import FirmRecord, MinskyStatus, NON_HEDGE
from .network import Node, TradeNetwork

COVERAGE_MIN = 0.5
COVERAGE_MAX = 1.2
DEFAULT_SECTOR = "Manufacturing"


@dataclass(frozen=True)
class SupplierSelection:
    supplier_id: Node
    coverage: float
    coverage_next: float
    included: bool
    reason: str = ""


def _coverage(invoices: float, record: Optional[FirmRecord]) -> float:
    if record is None or record.sales is None or not record.sales > 0:
        return math.nan
    return invoices / record.sales


def select_suppliers(
    records_t: Iterable[FirmRecord],
    records_t1: Iterable[FirmRecord],
    net: TradeNetwork,
    net_t1: Optional[TradeNetwork] = None,
    sector_filter: Optional[str] = DEFAULT_SECTOR,
) -> list[SupplierSelection]:
    """Apply the 50%-120% invoice-coverage rule in both years and the sector filter.

    Coverage is the supplier's known invoice total divided by its annual
    sales. ``net_t1`` holds the second year's invoices; without it the first
    year's network is reused. Exclusion reasons, checked in order:
    ``missing`` (no usable first-year record), ``disappeared`` (no second-year
    record), ``coverage`` and ``sector``.
    """
    by_id_t = {r.firm_id: r for r in records_t}
    by_id_t1 = {r.firm_id: r for r in records_t1}
    net_t1 = net if net_t1 is None else net_t1
    out = []
    for supplier in net.nodes:
        if net.in_degree(supplier) == 0:
            continue
        rec_t = by_id_t.get(supplier)
        rec_t1 = by_id_t1.get(supplier)
        cov = _coverage(net.invoice_total(supplier), rec_t)
        cov1 = math.nan
        if rec_t1 is not None and supplier in net_t1:
            cov1 = _coverage(net_t1.invoice_total(supplier), rec_t1)
        if math.isnan(cov):
            reason = "missing"
        elif rec_t1 is None:
            reason = "disappeared"
        elif not all(COVERAGE_MIN <= c <= COVERAGE_MAX for c in (cov, cov1)):
            reason = "coverage"
        elif sector_filter is not None and rec_t.sector != sector_filter:
            reason = "sector"
        else:
            reason = ""
        out.append(SupplierSelection(supplier, cov, cov1, reason == "", reason))
    return out


def exclusion_counts(selections: Iterable[SupplierSelection]) -> dict[str, int]:
    counts = Counter(s.reason or "included" for s in selections)
    return dict(sorted(counts.items()))


def buyer_growth_terms(
    net: TradeNetwork,
    purchases_t: Mapping[Node, float],
    purchases_t1: Mapping[Node, float],
    supplier: Node,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Link weights and purchase growth of a supplier's eligible buyers.

    Buyers without positive prior purchases, or without a second-year value,
    are skipped; the third element counts them.
    """
    net.require(supplier)
    weights, growth, skipped = [], [], 0
    for b in net.buyers(supplier):
        p0, p1 = purchases_t.get(b), purchases_t1.get(b)
        if p0 is None or p1 is None or not p0 > 0:
            skipped += 1
            continue
        weights.append(net.weight(b, supplier))
        growth.append(p1 / p0)
    return np.asarray(weights, dtype=float), np.asarray(growth, dtype=float), skipped


def estimated_growth(
    net: TradeNetwork,
    purchases_t: Mapping[Node, float],
    purchases_t1: Mapping[Node, float],
    supplier: Node,
    normalize: bool = True,
) -> float:
    """Trade-credit weighted growth of the buyers' purchases.

    Unnormalised this is ``sum_j TC_ji * P_j(t+1) / P_j(t)`` in currency
    units; normalised it is divided by the total weight, so a supplier whose
    buyers all doubled their purchases scores exactly 2.
    """
    w, g, _ = buyer_growth_terms(net, purchases_t, purchases_t1, supplier)
    if len(w) == 0:
        raise InsufficientDataError(f"supplier {supplier!r} has no buyer with prior purchases")
    total = float(w @ g)
    return total / float(w.sum()) if normalize else total


def realized_growth(record_t: FirmRecord, record_t1: FirmRecord) -> float:
    if record_t.sales is None or not record_t.sales > 0:
        raise UndefinedRatioError(f"prior sales of {record_t.firm_id!r} not positive")
    if record_t1.sales is None:
        raise UndefinedRatioError(f"missing sales for {record_t1.firm_id!r}")
    return record_t1.sales / record_t.sales


@dataclass(frozen=True)
class GrowthPair:
    supplier_id: Node
    estimated: float
    realized: float
    status_from: MinskyStatus
    status_to: MinskyStatus
    ponzi_buyer_ratio: float = math.nan

    def __post_init__(self):
        if not (self.estimated > 0 and self.realized > 0):
            raise ValidationError(f"growth ratios must be positive for {self.supplier_id!r}")


StatusSet = Union[MinskyStatus, Iterable[MinskyStatus], None]


def _as_set(value: StatusSet) -> Optional[frozenset]:
    if value is None:
        return None
    if isinstance(value, (MinskyStatus, str)):
        return frozenset({MinskyStatus.parse(value)})
    return frozenset(MinskyStatus.parse(v) for v in value)


def in_group(pair: GrowthPair, group: tuple[StatusSet, StatusSet]) -> bool:
    src, dst = (_as_set(g) for g in group)
    return (src is None or pair.status_from in src) and (dst is None or pair.status_to in dst)


HEDGE_TO_HEDGE = (MinskyStatus.HEDGE, MinskyStatus.HEDGE)
HEDGE_TO_NON_HEDGE = (MinskyStatus.HEDGE, NON_HEDGE)


def fit_growth_correlation(pairs: Sequence[GrowthPair], group=(None, None)) -> FitResult:
    """Power-law fit ``ln(realized) = slope * ln(estimated) + c`` within a group.

    ``group`` is ``(status_from, status_to)``; either side may be a status,
    a set of statuses, or ``None`` for any.
    """
    chosen = [p for p in pairs if in_group(p, group)]
    if len(chosen) < 3:
        raise InsufficientDataError(f"growth fit needs >= 3 pairs, got {len(chosen)}")
    x = np.log([p.estimated for p in chosen])
    y = np.log([p.realized for p in chosen])
    slope, intercept, r2 = ols(x, y)
    return FitResult(slope, intercept, r2, len(chosen))


@dataclass(frozen=True)
class TransitionHistogram:
    centers: np.ndarray
    stayers: Optional[np.ndarray]
    leavers: Optional[np.ndarray]
    crossing: Optional[float]
    n_stayers: int
    n_leavers: int


def transition_histogram(
    ratios: Sequence[tuple[float, bool]], bin_width: float = 0.05
) -> TransitionHistogram:
    """Normalised histograms of ponzi-buyer ratios for stayers and leavers.

    Bins are centred on multiples of ``bin_width`` (0, 0.05, 0.10, ...).
    The crossing is the centre of the first bin where the leavers' frequency
    exceeds the stayers'; it is ``None`` if that never happens or a group is
    empty, in which case that group's histogram is ``None`` as well.
    """
    if not 0 < bin_width <= 1:
        raise ValidationError("bin_width must lie in (0, 1]")
    if len(ratios) == 0:
        raise InsufficientDataError("no ratios to histogram")
    values = np.asarray([r for r, _ in ratios], dtype=float)
    stayed = np.asarray([bool(s) for _, s in ratios])
    if np.any((values < 0) | (values > 1)):
        raise ValidationError("ponzi-buyer ratios must lie in [0, 1]")
    n_bins = int(math.floor(1.0 / bin_width + 1e-9)) + 1
    # rounded so centres print and compare as the multiples they are
    centers = np.round(np.arange(n_bins) * bin_width, 12)
    idx = np.minimum(np.floor(values / bin_width + 0.5 + 1e-12).astype(int), n_bins - 1)

    def hist(mask) -> Optional[np.ndarray]:
        if not mask.any():
            return None
        counts = np.bincount(idx[mask], minlength=n_bins).astype(float)
        return counts / counts.sum()

    h_stay, h_leave = hist(stayed), hist(~stayed)
    crossing = None
    if h_stay is not None and h_leave is not None:
        above = np.flatnonzero(h_leave > h_stay)
        if len(above):
            crossing = float(centers[above[0]])
    return TransitionHistogram(centers, h_stay, h_leave, crossing, int(stayed.sum()), int((~stayed).sum()))


def quadrant_counts(pairs: Iterable[GrowthPair]) -> dict[str, int]:
    """Counts by sign of growth (ratio above or below 1) on both axes.

    Quadrant II is shrinking estimated growth with growing sales, the
    signature of suppliers that found new buyers. Pairs with a ratio of
    exactly 1 on either axis go to ``axis``.
    """
    counts = {"I": 0, "II": 0, "III": 0, "IV": 0, "axis": 0}
    for p in pairs:
        ex, ry = p.estimated - 1.0, p.realized - 1.0
        if ex == 0 or ry == 0:
            counts["axis"] += 1
        elif ex > 0 and ry > 0:
            counts["I"] += 1
        elif ex < 0 < ry:
            counts["II"] += 1
        elif ex < 0 and ry < 0:
            counts["III"] += 1
        else:
            counts["IV"] += 1
    return counts


def build_growth_pairs(
    records_t: Iterable[FirmRecord],
    records_t1: Iterable[FirmRecord],
    net: TradeNetwork,
    selections: Iterable[SupplierSelection],
    statuses_t: Mapping[Node, MinskyStatus],
    statuses_t1: Mapping[Node, MinskyStatus],
    normalize: bool = True,
) -> tuple[list[GrowthPair], dict[str, int]]:
    """Growth pairs for every included supplier with both statuses known.

    Returns the pairs and a count of suppliers skipped, by reason.
    """
    records_t = list(records_t)
    records_t1 = list(records_t1)
    by_t = {r.firm_id: r for r in records_t}
    by_t1 = {r.firm_id: r for r in records_t1}
    p_t = {r.firm_id: r.purchases for r in records_t if r.purchases is not None}
    p_t1 = {r.firm_id: r.purchases for r in records_t1 if r.purchases is not None}
    pairs, skipped = [], Counter()
    for sel in selections:
        if not sel.included:
            continue
        s = sel.supplier_id
        if s not in statuses_t or s not in statuses_t1:
            skipped["status"] += 1
            continue
        try:
            est = estimated_growth(net, p_t, p_t1, s, normalize)
            real = realized_growth(by_t[s], by_t1[s])
        except (InsufficientDataError, UndefinedRatioError):
            skipped["growth"] += 1
            continue
        if not (est > 0 and real > 0):
            skipped["non_positive"] += 1
            continue
        buyers = net.buyers(s)
        ratio = sum(statuses_t.get(b) is MinskyStatus.PONZI for b in buyers) / len(buyers)
        pairs.append(GrowthPair(s, est, real, statuses_t[s], statuses_t1[s], ratio))
    return pairs, dict(skipped)
