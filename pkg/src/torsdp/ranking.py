"""Path validity, orientation agreement, and reachability-based AS ranking."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .ingest import AsPath, edge_key
from .relmap import RelationshipMap
from .scc import tarjan_scc

UP, DOWN, SIB = "U", "D", "S"


class UnlabeledLinkError(KeyError):
    pass


def step_labels(path: Sequence[int], relmap: RelationshipMap) -> str:
    """One letter per link: U customer-to-provider, D provider-to-customer, S sibling."""
    out = []
    for a, b in zip(path, path[1:]):
        e = edge_key(a, b)
        if e in relmap.siblings:
            out.append(SIB)
        elif e in relmap.directed:
            out.append(UP if relmap.directed[e] == (a, b) else DOWN)
        else:
            raise UnlabeledLinkError(f"link {a}-{b} has no relationship")
    return "".join(out)


def labels_valid(labels: str) -> bool:
    downhill = False
    for s in labels:
        if s == DOWN:
            downhill = True
        elif s == UP and downhill:
            return False
    return True


def path_valid(path: Sequence[int], relmap: RelationshipMap) -> bool:
    """No provider-to-customer step may precede a customer-to-provider step."""
    return labels_valid(step_labels(path, relmap))


@dataclass(frozen=True)
class ValidityReport:
    total: int
    valid: int
    per_path: tuple[bool, ...] = ()

    @property
    def fraction(self) -> float:
        return self.valid / self.total if self.total else 1.0

    def to_dict(self) -> dict:
        return {"total": self.total, "valid": self.valid, "fraction": self.fraction,
                "valid_pct": 100.0 * self.fraction}


def validity(paths: Iterable[AsPath], relmap: RelationshipMap, min_links: int = 2) -> ValidityReport:
    """Validity over paths with at least ``min_links`` links (1-link paths are always valid)."""
    flags = tuple(path_valid(p, relmap) for p in paths if len(p) - 1 >= min_links)
    return ValidityReport(len(flags), sum(flags), flags)


def agreement(map_a: RelationshipMap, map_b: RelationshipMap) -> float:
    """Fraction of links directed in both maps that point the same way."""
    if map_a.edges() != map_b.edges():
        raise ValueError("relationship maps cover different link sets")
    common = map_a.directed.keys() & map_b.directed.keys()
    if not common:
        return 1.0
    same = sum(map_a.directed[e] == map_b.directed[e] for e in common)
    return same / len(common)


def reachability(relmap: RelationshipMap, nodes: Iterable[int] = ()) -> dict[int, int]:
    """Number of ASs reachable over provider-to-customer links only."""
    asns = sorted(set(nodes) | relmap.nodes())
    index = {a: i for i, a in enumerate(asns)}
    adj: list[list[int]] = [[] for _ in asns]
    for cust, prov in relmap.directed.values():
        adj[index[prov]].append(index[cust])
    comp = tarjan_scc(len(asns), adj)
    ncomp = max(comp, default=-1) + 1
    members = [0] * ncomp
    for i, c in enumerate(comp):
        members[c] |= 1 << i
    succ: list[set[int]] = [set() for _ in range(ncomp)]
    for u, outs in enumerate(adj):
        for w in outs:
            if comp[u] != comp[w]:
                succ[comp[u]].add(comp[w])
    # successors always carry lower component numbers
    reach_bits = [0] * ncomp
    for c in range(ncomp):
        bits = members[c]
        for d in succ[c]:
            bits |= reach_bits[d]
        reach_bits[c] = bits
    return {a: reach_bits[comp[i]].bit_count() - 1 for i, a in enumerate(asns)}


@dataclass(frozen=True)
class HierarchyRank:
    reach: dict[int, int]
    level: dict[int, int]
    depth: dict[int, int]
    width: dict[int, int]

    def is_leaf(self, asn: int) -> bool:
        return self.reach[asn] == 0

    def top_level(self) -> set[int]:
        return {a for a, lv in self.level.items() if lv == 0}


def rank(relmap: RelationshipMap, nodes: Iterable[int] = ()) -> HierarchyRank:
    reach = reachability(relmap, nodes)
    return rank_from_reach(reach)


def rank_from_reach(reach: Mapping[int, int]) -> HierarchyRank:
    values = sorted(set(reach.values()), reverse=True)
    level_of = {r: i for i, r in enumerate(values)}
    width_of = {r: 0 for r in values}
    for r in reach.values():
        width_of[r] += 1
    depth_of, above = {}, 0
    for r in values:
        depth_of[r] = above
        above += width_of[r]
    return HierarchyRank(
        reach=dict(reach),
        level={a: level_of[r] for a, r in reach.items()},
        depth={a: depth_of[r] for a, r in reach.items()},
        width={a: width_of[r] for a, r in reach.items()},
    )


RANK_HEADER = ["asn", "degree", "reach", "level", "depth", "width", "is_leaf"]


def ranking_csv(hr: HierarchyRank, degree: Mapping[int, int]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RANK_HEADER)
    for asn in sorted(hr.reach, key=lambda a: (hr.level[a], a)):
        w.writerow([asn, degree.get(asn, 0), hr.reach[asn], hr.level[asn],
                    hr.depth[asn], hr.width[asn], int(hr.is_leaf(asn))])
    return buf.getvalue()
