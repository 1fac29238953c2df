"""Synthetic AS hierarchies with known relationships, for tests and demos.

Tier 1 is a set of top providers; every tier-2 AS buys transit from all of
them, so the tier-1 ASs share the maximal reach.  Lower tiers attach to
random providers one or two tiers up.  A hierarchy is only accepted when
every customer has strictly smaller degree than each of its providers, so
the degree-gradient orientation recovers the ground truth.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .ingest import AsPath, edge_key
from .relmap import RelationshipMap


@dataclass
class Hierarchy:
    tiers: list[list[int]]
    providers: dict[int, list[int]]
    customers: dict[int, list[int]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.customers:
            self.customers = {a: [] for t in self.tiers for a in t}
            for c, ps in self.providers.items():
                for p in ps:
                    self.customers[p].append(c)

    @property
    def tier1(self) -> set[int]:
        return set(self.tiers[0])

    def links(self) -> list[tuple[int, int]]:
        return sorted((c, p) for c, ps in self.providers.items() for p in ps)

    def degree(self) -> dict[int, int]:
        return {a: len(self.providers.get(a, ())) + len(self.customers[a])
                for t in self.tiers for a in t}

    def truth(self) -> RelationshipMap:
        return RelationshipMap({edge_key(c, p): (c, p) for c, p in self.links()})

    def gradient_consistent(self) -> bool:
        deg = self.degree()
        return all(deg[c] < deg[p] for c, p in self.links())


def _tier_sizes(n: int) -> list[int]:
    t1 = max(2, round(0.02 * n))
    # tier 1's degree is the tier-2 count, so small hierarchies need a wider tier 2
    t2 = max(t1 + 2, round(0.08 * n), round(math.sqrt(n)) + 1)
    t3 = max(3, round(0.25 * n))
    return [t1, t2, t3, n - t1 - t2 - t3]


def _attempt(asns: list[int], rng: random.Random) -> Hierarchy | None:
    """Attach customers only where the degree ordering can still hold.

    Degrees only grow, and a customer's degree is checked against its
    providers when it gains a customer itself, so a completed attempt is
    gradient-consistent unless some AS found no admissible provider.
    """
    sizes = _tier_sizes(len(asns))
    tiers, start = [], 0
    for s in sizes:
        tiers.append(asns[start:start + s])
        start += s
    t1, t2, t3, stubs = tiers
    providers: dict[int, list[int]] = {a: list(t1) for a in t2}
    n_cust: dict[int, int] = {a: 0 for a in asns}
    for a in t1:
        n_cust[a] = len(t2)
    cap2 = len(t2) - len(t1) - 1   # keeps every tier-2 AS below tier 1

    def deg(a: int) -> int:
        return len(providers.get(a, ())) + n_cust[a]

    def attach(c: int, chosen: list[int]) -> None:
        providers[c] = chosen
        for p in chosen:
            n_cust[p] += 1

    for c in t3:
        ok = [a for a in t2 if n_cust[a] < cap2]
        if not ok:
            return None
        attach(c, rng.sample(ok, min(len(ok), rng.randint(1, 2))))
    for c in stubs:
        k = rng.randint(1, 2)
        if rng.random() < 0.85:
            ok = [b for b in t3
                  if deg(b) + 1 < min(deg(a) for a in providers[b]) and deg(b) + 1 > k]
        else:
            ok = [a for a in t2 if n_cust[a] < cap2]
        if not ok:
            return None
        attach(c, rng.sample(ok, min(len(ok), k)))
    return Hierarchy(tiers, providers)


def generate_hierarchy(n_as: int = 200, seed: int = 0, max_tries: int = 1000) -> Hierarchy:
    if n_as < 12:
        raise ValueError("need at least 12 ASs")
    for attempt in range(max_tries):
        rng = random.Random(f"hierarchy:{seed}:{attempt}")
        h = _attempt(rng.sample(range(1, 65000), n_as), rng)
        if h is not None and h.gradient_consistent():
            return h
    raise RuntimeError(f"no gradient-consistent hierarchy within {max_tries} tries")


def _walk_up(h: Hierarchy, start: int, rng: random.Random, visited: set[int], p: float) -> list[int]:
    out = []
    cur = start
    while rng.random() < p:
        options = [x for x in h.providers.get(cur, ()) if x not in visited]
        if not options:
            break
        cur = rng.choice(options)
        visited.add(cur)
        out.append(cur)
    return out


def _walk_down(h: Hierarchy, start: int, rng: random.Random, visited: set[int], p: float) -> list[int]:
    out = []
    cur = start
    while rng.random() < p:
        options = [x for x in h.customers[cur] if x not in visited]
        if not options:
            break
        cur = rng.choice(options)
        visited.add(cur)
        out.append(cur)
    return out


def valley_free_path(h: Hierarchy, rng: random.Random) -> AsPath:
    everyone = [a for t in h.tiers for a in t]
    while True:
        src = rng.choice(everyone)
        visited = {src}
        up = _walk_up(h, src, rng, visited, 0.8)
        top = up[-1] if up else src
        down = _walk_down(h, top, rng, visited, 0.8)
        path = (src, *up, *down)
        if len(path) >= 3:
            return path


def leak_path(h: Hierarchy, leaker: int, rng: random.Random) -> AsPath:
    """A route leak: ``... -> p1 -> leaker -> p2 -> ...`` with p1, p2 providers
    of the leaker.  Exactly one valley."""
    p1, p2 = rng.sample(h.providers[leaker], 2)
    visited = {leaker, p1, p2}
    before = _walk_up(h, p1, rng, visited, 0.5)
    after = _walk_up(h, p2, rng, visited, 0.5)
    return (*reversed(before), p1, leaker, p2, *after)


@dataclass
class SynthData:
    hierarchy: Hierarchy
    paths: list[AsPath]
    corrupted: list[AsPath]
    leakers: list[int] = field(default_factory=list)


def generate_paths(
    h: Hierarchy,
    n_paths: int = 10000,
    noise: float = 0.0,
    seed: int = 0,
    leakers: int = 1,
) -> SynthData:
    """``n_paths`` paths: one 2-AS path per link (so degrees are observed
    exactly), then valley-free walks.  A ``noise`` fraction of the total is
    replaced by route leaks from ``leakers`` multihomed ASs."""
    rng = random.Random(f"paths:{seed}")
    paths: list[AsPath] = [tuple(l) for l in h.links()]
    n_bad = round(noise * n_paths)
    n_good = max(0, n_paths - len(paths) - n_bad)
    paths.extend(valley_free_path(h, rng) for _ in range(n_good))
    bad: list[AsPath] = []
    if n_bad:
        multi = sorted(c for c, ps in h.providers.items() if len(ps) >= 2)
        if len(multi) < leakers:
            raise ValueError(f"only {len(multi)} multihomed ASs for {leakers} leakers")
        chosen = rng.sample(multi, leakers)
        bad = [leak_path(h, rng.choice(chosen), rng) for _ in range(n_bad)]
    paths.extend(bad)
    return SynthData(h, paths, bad, sorted(chosen) if n_bad else [])


def paths_text(paths) -> str:
    return "".join(" ".join(map(str, p)) + "\n" for p in paths)
