"""Trade-credit network: generation, contagion cascades and the percolation law.

Edges point from the trade debtor (buyer) to the trade creditor (supplier),
so a supplier's in-neighbours are its buyers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Hashable, Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import curve_fit

from ._rng import rng_for
from .dynamics import ModelParams
from .errors import (
    InsufficientDataError,
    SupercriticalError,
    UndefinedRatioError,
    ValidationError,
)
from .firm_model import MinskyStatus

Node = Hashable


class TradeNetwork:
    """Immutable directed weighted graph; parallel edges are merged by summing weights."""

    def __init__(self, nodes: Iterable[Node] = (), edges: Iterable[tuple] = ()):
        self._nodes: dict[Node, None] = dict.fromkeys(nodes)
        weights: dict[tuple[Node, Node], float] = {}
        for edge in edges:
            buyer, supplier, weight = edge
            if buyer == supplier:
                raise ValidationError(f"self-loop on {buyer!r}")
            weight = float(weight)
            if not (weight > 0 and math.isfinite(weight)):
                raise ValidationError(f"edge weight must be positive: {buyer!r}->{supplier!r} {weight!r}")
            self._nodes.setdefault(buyer, None)
            self._nodes.setdefault(supplier, None)
            weights[(buyer, supplier)] = weights.get((buyer, supplier), 0.0) + weight
        self._weights = weights
        buyers: dict[Node, list] = {n: [] for n in self._nodes}
        suppliers: dict[Node, list] = {n: [] for n in self._nodes}
        for b, s in weights:
            buyers[s].append(b)
            suppliers[b].append(s)
        self._buyers = {n: tuple(v) for n, v in buyers.items()}
        self._suppliers = {n: tuple(v) for n, v in suppliers.items()}

    @property
    def nodes(self) -> tuple:
        return tuple(self._nodes)

    def __contains__(self, node: Node) -> bool:
        return node in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    @property
    def n_edges(self) -> int:
        return len(self._weights)

    def edges(self) -> list[tuple[Node, Node, float]]:
        return [(b, s, w) for (b, s), w in self._weights.items()]

    def weight(self, buyer: Node, supplier: Node) -> float:
        return self._weights[(buyer, supplier)]

    def buyers(self, supplier: Node) -> tuple:
        """In-neighbours: firms owing trade credit to ``supplier``."""
        return self._buyers[supplier]

    def suppliers(self, buyer: Node) -> tuple:
        return self._suppliers[buyer]

    def partners(self, node: Node) -> set:
        return set(self._buyers[node]) | set(self._suppliers[node])

    def in_degree(self, node: Node) -> int:
        return len(self._buyers[node])

    def out_degree(self, node: Node) -> int:
        return len(self._suppliers[node])

    def in_degrees(self) -> np.ndarray:
        return np.array([len(self._buyers[n]) for n in self._nodes], dtype=int)

    def out_degrees(self) -> np.ndarray:
        return np.array([len(self._suppliers[n]) for n in self._nodes], dtype=int)

    def invoice_total(self, supplier: Node) -> float:
        """Total trade credit owed to ``supplier`` by its buyers."""
        return sum(self._weights[(b, supplier)] for b in self._buyers[supplier])

    def require(self, node: Node) -> None:
        if node not in self._nodes:
            raise ValidationError(f"unknown firm id {node!r}")


# -- generation ------------------------------------------------------------------


@dataclass(frozen=True)
class DegreeModel:
    """Heavy-tailed in-degree law ``P[K >= k] ~ k ** -pareto_exponent``.

    ``max_degree=None`` means ``n - 1``. A low cap bends the upper CDF
    downwards near the cap, steepening any log-log slope fitted across it.
    """

    pareto_exponent: float = 1.3
    mean_degree: float = 35.5
    max_degree: Optional[int] = None

    def __post_init__(self):
        if not self.pareto_exponent > 1:
            raise ValidationError("pareto_exponent must exceed 1")
        if not self.mean_degree > 0:
            raise ValidationError("mean_degree must be positive")
        if self.max_degree is not None and self.max_degree < 1:
            raise ValidationError("max_degree must be >= 1")


class InfeasibleDegreeError(ValidationError):
    pass


def _pareto_in_degrees(n: int, model: DegreeModel, rng: np.random.Generator) -> np.ndarray:
    cap = n - 1 if model.max_degree is None else min(model.max_degree, n - 1)
    a = model.pareto_exponent
    # stratified uniforms keep the sampled tail close to the target law
    u = rng.permutation((np.arange(n) + rng.random(n)) / n)

    def degrees(scale: float) -> np.ndarray:
        upper = cap + 1.0
        frac = 1.0 - (upper / scale) ** (-a) if upper > scale else 0.0
        x = scale * (1.0 - u * frac) ** (-1.0 / a)
        return np.minimum(np.floor(x), cap).astype(np.int64)

    lo, hi = 1.0, float(cap + 1)
    if degrees(lo).mean() > model.mean_degree * 1.1:
        raise InfeasibleDegreeError(
            f"mean degree {model.mean_degree} too small for exponent {a}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if degrees(mid).mean() < model.mean_degree:
            lo = mid
        else:
            hi = mid
    k = degrees(hi)
    if abs(k.mean() - model.mean_degree) > 0.1 * model.mean_degree:
        raise InfeasibleDegreeError(
            f"realised mean in-degree {k.mean():.2f} not within 10% of {model.mean_degree}"
        )
    return k


def _draw_buyers(in_degrees: np.ndarray, rng: np.random.Generator, max_retries: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform buyer for every in-stub, no self-loops, no repeated pairs."""
    n = len(in_degrees)
    dense = in_degrees > (n - 1) // 4
    sup_parts, buy_parts = [], []
    for s in np.flatnonzero(dense):
        picks = rng.choice(n - 1, size=int(in_degrees[s]), replace=False)
        sup_parts.append(np.full(len(picks), s, dtype=np.int64))
        buy_parts.append(picks + (picks >= s))

    sparse_k = np.where(dense, 0, in_degrees)
    sup = np.repeat(np.arange(n, dtype=np.int64), sparse_k)
    buy = np.empty(len(sup), dtype=np.int64)
    todo = np.arange(len(sup))
    for _ in range(max_retries):
        if len(todo) == 0:
            break
        draw = rng.integers(0, n - 1, size=len(todo))
        buy[todo] = draw + (draw >= sup[todo])
        code = sup * n + buy
        _, first = np.unique(code, return_index=True)
        keep = np.zeros(len(code), dtype=bool)
        keep[first] = True
        todo = np.flatnonzero(~keep)
    else:
        if len(todo):
            raise InfeasibleDegreeError(f"could not place {len(todo)} stubs after {max_retries} retries")
    order = np.lexsort((np.arange(len(sup)), sup))
    sup_parts.append(sup[order])
    buy_parts.append(buy[order])
    sup_all = np.concatenate(sup_parts) if sup_parts else np.empty(0, dtype=np.int64)
    buy_all = np.concatenate(buy_parts) if buy_parts else np.empty(0, dtype=np.int64)
    return buy_all, sup_all


def generate_network(
    n: int,
    model: DegreeModel = DegreeModel(),
    seed: int = 0,
    in_degrees: Optional[Sequence[int]] = None,
    max_retries: int = 1000,
) -> TradeNetwork:
    """Configuration-model trade network with a Pareto in-degree tail.

    In-degrees follow ``model`` unless given explicitly. Each in-stub gets a
    buyer drawn uniformly from the other nodes, redrawing self-loops and
    repeated pairs, so out-degrees come out close to Poisson with the same
    mean. Weights are log-uniform on [1, 1e4].
    """
    if n < 2:
        raise ValidationError("network needs at least 2 nodes")
    rng = rng_for(seed, "network")
    if in_degrees is None:
        k = _pareto_in_degrees(n, model, rng)
    else:
        k = np.asarray(in_degrees, dtype=np.int64)
        if k.shape != (n,) or np.any(k < 0):
            raise ValidationError("in_degrees must be n non-negative integers")
    if np.any(k > n - 1):
        raise InfeasibleDegreeError("an in-degree exceeds n - 1")
    buyers, suppliers = _draw_buyers(k, rng, max_retries)
    weights = np.exp(rng.uniform(0.0, math.log(1e4), size=len(buyers)))
    return TradeNetwork(
        range(n),
        zip(buyers.tolist(), suppliers.tolist(), weights.tolist()),
    )


def random_network(n: int, mean_degree: float, seed: int = 0) -> TradeNetwork:
    """Uniform random digraph with ``round(n * mean_degree)`` distinct edges."""
    if n < 2:
        raise ValidationError("network needs at least 2 nodes")
    m = int(round(n * mean_degree))
    if not 0 <= m <= n * (n - 1):
        raise ValidationError("mean_degree out of range")
    rng = rng_for(seed, "random_network")
    codes = np.sort(rng.choice(n * (n - 1), size=m, replace=False))
    buyers = codes // (n - 1)
    rest = codes % (n - 1)
    suppliers = rest + (rest >= buyers)
    weights = np.exp(rng.uniform(0.0, math.log(1e4), size=m))
    return TradeNetwork(range(n), zip(buyers.tolist(), suppliers.tolist(), weights.tolist()))


def plant_statuses(
    net: TradeNetwork, ponzi_density: float, seed: int, stream: str = "statuses"
) -> dict[Node, MinskyStatus]:
    """Mark each node ponzi with probability ``ponzi_density``, hedge otherwise."""
    rng = rng_for(seed, stream)
    draws = rng.random(len(net))
    return {
        node: MinskyStatus.PONZI if u < ponzi_density else MinskyStatus.HEDGE
        for node, u in zip(net.nodes, draws)
    }


# -- percolation law ---------------------------------------------------------------


@dataclass(frozen=True)
class PercolationParams:
    rho_c: float
    gamma: float
    s: float

    def __post_init__(self):
        if not 0 < self.rho_c <= 1:
            raise ValidationError("rho_c must lie in (0, 1]")
        if not self.gamma > 0:
            raise ValidationError("gamma must be positive")
        if not self.s > 0:
            raise ValidationError("s must be positive")


def expected_failures(density: float, params: PercolationParams) -> float:
    """``S * (1 - rho / rho_c) ** -gamma`` below the critical density."""
    if density < 0:
        raise ValidationError(f"density must be >= 0, got {density!r}")
    if density >= params.rho_c:
        raise SupercriticalError(density, params.rho_c)
    return params.s * (1.0 - density / params.rho_c) ** (-params.gamma)


def critical_density_from_rate(rate_c: float, params: ModelParams) -> float:
    """Ponzi density reached at the critical rate, ``(rate_c / i_max) ** beta``."""
    if not 0 < rate_c <= params.i_max:
        raise ValidationError(f"critical rate must lie in (0, i_max], got {rate_c!r}")
    return (rate_c / params.i_max) ** params.beta


def critical_rate(rho_c: float, params: ModelParams) -> float:
    if not 0 < rho_c <= 1:
        raise ValidationError("rho_c must lie in (0, 1]")
    return params.i_max * rho_c ** (1.0 / params.beta)


def fit_percolation(densities: Sequence[float], failures: Sequence[float]) -> PercolationParams:
    """Least-squares fit of the failure law in log space (S, rho_c, gamma all free)."""
    rho = np.asarray(densities, dtype=float)
    n_failed = np.asarray(failures, dtype=float)
    if len(rho) < 3 or rho.shape != n_failed.shape:
        raise InsufficientDataError("need >= 3 (density, failures) pairs")
    if np.any(n_failed <= 0) or np.any(rho < 0):
        raise ValidationError("failures must be positive and densities non-negative")
    top = float(rho.max())

    def model(r, log_s, log_excess, gamma):
        rho_c = top + math.exp(log_excess)
        return log_s - gamma * np.log1p(-r / rho_c)

    p0 = (math.log(n_failed.min()), math.log(max(top * 0.1, 1e-3)), 1.0)
    popt, _ = curve_fit(model, rho, np.log(n_failed), p0=p0, maxfev=20000)
    log_s, log_excess, gamma = popt
    return PercolationParams(rho_c=min(1.0, top + math.exp(log_excess)), gamma=float(gamma), s=math.exp(log_s))


# -- cascades ----------------------------------------------------------------------


@dataclass(frozen=True)
class CascadeReport:
    """Initial set, per-round additions and the final affected set."""

    initial: frozenset
    rounds: tuple
    affected: frozenset

    @property
    def failed(self) -> frozenset:
        return self.affected

    @property
    def n_new(self) -> int:
        return len(self.affected) - len(self.initial)

    def rows(self) -> list[dict]:
        out = [{"round": 0, "new_failures": len(self.initial), "cumulative_failures": len(self.initial)}]
        total = len(self.initial)
        for k, added in enumerate(self.rounds, start=1):
            total += len(added)
            out.append({"round": k, "new_failures": len(added), "cumulative_failures": total})
        return out


class ThresholdMode(str, Enum):
    FRACTION_OF_BUYERS = "fraction"
    ABSOLUTE_COUNT = "count"

    @classmethod
    def parse(cls, value) -> "ThresholdMode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        aliases = {"fraction": cls.FRACTION_OF_BUYERS, "fractionofbuyers": cls.FRACTION_OF_BUYERS,
                   "count": cls.ABSOLUTE_COUNT, "absolutecount": cls.ABSOLUTE_COUNT}
        if key not in aliases:
            raise ValidationError(f"unknown threshold mode {value!r}")
        return aliases[key]


def _check_statuses(net: TradeNetwork, statuses: Mapping[Node, MinskyStatus]) -> None:
    for node in statuses:
        net.require(node)


def failure_cascade(
    net: TradeNetwork,
    statuses: Mapping[Node, MinskyStatus],
    initial_failures: Iterable[Node],
) -> CascadeReport:
    """Failure contagion: a ponzi firm fails once any trade partner has failed.

    Partners are counted in both edge directions. Updates are synchronous, so
    round ``k`` holds exactly the ponzi firms at graph distance ``k`` from
    the initial failures through ponzi firms. Firms absent from ``statuses``
    are never susceptible.
    """
    _check_statuses(net, statuses)
    initial = frozenset(initial_failures)
    for node in initial:
        net.require(node)
    failed = set(initial)
    frontier = set(initial)
    rounds = []
    while frontier:
        new = set()
        for node in frontier:
            for partner in net.partners(node):
                if partner not in failed and statuses.get(partner) is MinskyStatus.PONZI:
                    new.add(partner)
        if not new:
            break
        failed |= new
        rounds.append(frozenset(new))
        frontier = new
    return CascadeReport(initial, tuple(rounds), frozenset(failed))


def _check_threshold(threshold: float, mode: ThresholdMode) -> None:
    if not (threshold > 0 and math.isfinite(threshold)):
        raise ValidationError(f"threshold must be positive, got {threshold!r}")
    if mode is ThresholdMode.FRACTION_OF_BUYERS and threshold > 1:
        raise ValidationError("fraction threshold must be <= 1")


def _meets(count: int, in_degree: int, threshold: float, mode: ThresholdMode) -> bool:
    if in_degree == 0:
        return False
    if mode is ThresholdMode.ABSOLUTE_COUNT:
        return count >= threshold
    return count / in_degree >= threshold


def bootstrap_cascade(
    net: TradeNetwork,
    statuses: Mapping[Node, MinskyStatus],
    threshold: float,
    mode=ThresholdMode.FRACTION_OF_BUYERS,
    max_rounds: Optional[int] = None,
) -> CascadeReport:
    """Bootstrap ponziness contagion from buyers to suppliers.

    A hedge firm turns ponzi once the share (or number) of ponzi firms among
    its buyers reaches ``threshold``; converted firms count as ponzi from the
    next round on. Speculative firms neither convert nor spread. The report's
    ``initial`` set holds the seeded ponzi firms and ``rounds`` the
    conversions. ``max_rounds`` stops early (one round is one year of
    exposure); ``None`` runs to the fixed point.
    """
    mode = ThresholdMode.parse(mode)
    _check_threshold(threshold, mode)
    if max_rounds is not None and max_rounds < 0:
        raise ValidationError("max_rounds must be >= 0")
    _check_statuses(net, statuses)
    ponzi = {n for n, s in statuses.items() if s is MinskyStatus.PONZI}
    initial = frozenset(ponzi)
    count = {n: 0 for n in net.nodes}
    for p in ponzi:
        for s in net.suppliers(p):
            count[s] += 1

    def eligible(node) -> bool:
        return statuses.get(node) is MinskyStatus.HEDGE and node not in ponzi

    candidates = {n for n in net.nodes if eligible(n)}
    rounds = []
    while candidates and (max_rounds is None or len(rounds) < max_rounds):
        new = {
            n for n in candidates
            if eligible(n) and _meets(count[n], net.in_degree(n), threshold, mode)
        }
        if not new:
            break
        rounds.append(frozenset(new))
        ponzi |= new
        candidates = set()
        for p in new:
            for s in net.suppliers(p):
                count[s] += 1
                candidates.add(s)
    return CascadeReport(initial, tuple(rounds), frozenset(ponzi))


def ponzi_buyer_ratio(
    net: TradeNetwork, statuses: Mapping[Node, MinskyStatus], supplier: Node
) -> float:
    """Share of a supplier's buyers that are ponzi."""
    net.require(supplier)
    buyers = net.buyers(supplier)
    if not buyers:
        raise UndefinedRatioError(f"supplier {supplier!r} has no buyers")
    return sum(statuses.get(b) is MinskyStatus.PONZI for b in buyers) / len(buyers)
