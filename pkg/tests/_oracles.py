"""Independent reference implementations used as test oracles.

These work straight from an edge list with plain sets and recompute every
round from scratch, sharing no code with the package's cascades.
"""

from __future__ import annotations


def brute_failure(edges, statuses, initial):
    failed = set(initial)
    rounds = []
    while True:
        new = set()
        for buyer, supplier, _ in edges:
            for a, b in ((buyer, supplier), (supplier, buyer)):
                if a in failed and b not in failed and statuses.get(b) == "ponzi":
                    new.add(b)
        if not new:
            return rounds, failed
        rounds.append(new)
        failed |= new


def brute_bootstrap(nodes, edges, statuses, threshold, mode):
    ponzi = {v for v in nodes if statuses.get(v) == "ponzi"}
    buyers_of = {v: {b for b, s, _ in edges if s == v} for v in nodes}
    rounds = []
    while True:
        new = set()
        for v in nodes:
            if statuses.get(v) != "hedge" or v in ponzi:
                continue
            buyers = buyers_of[v]
            if not buyers:
                continue
            hits = sum(1 for b in buyers if b in ponzi)
            if mode == "count":
                if hits >= threshold:
                    new.add(v)
            elif hits / len(buyers) >= threshold:
                new.add(v)
        if not new:
            return rounds, ponzi
        rounds.append(new)
        ponzi |= new
