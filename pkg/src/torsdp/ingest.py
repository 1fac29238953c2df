"""Reading BGP AS paths and deriving the undirected AS graph.

Input is plain text, one AS path per line, whitespace-separated decimal
ASNs; ``#`` starts a comment.  Paths are normalized (prepending collapsed),
loop paths are dropped, and duplicates are merged.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

log = logging.getLogger(__name__)

AsPath = tuple[int, ...]
Edge = tuple[int, int]


class AdjacentPair(NamedTuple):
    """Two consecutive links ``{u, v}``, ``{v, w}`` sharing the middle AS ``v``.

    Stored canonically with ``u < w``: traversal direction is not part of a
    pair's identity since the invalid pattern is symmetric under reversal.
    """

    u: int
    v: int
    w: int

    @property
    def edges(self) -> tuple[Edge, Edge]:
        return edge_key(self.u, self.v), edge_key(self.v, self.w)


def edge_key(a: int, b: int) -> Edge:
    return (a, b) if a < b else (b, a)


def make_pair(u: int, v: int, w: int) -> AdjacentPair:
    if u == w:
        raise ValueError(f"degenerate pair ({u}, {v}, {w})")
    return AdjacentPair(u, v, w) if u < w else AdjacentPair(w, v, u)


@dataclass(frozen=True)
class AsGraph:
    nodes: frozenset[int]
    edges: frozenset[Edge]
    degree: dict[int, int]

    def neighbors(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {n: [] for n in self.nodes}
        for a, b in sorted(self.edges):
            adj[a].append(b)
            adj[b].append(a)
        return adj


@dataclass(frozen=True)
class PathSet:
    paths: tuple[AsPath, ...]
    graph: AsGraph
    pairs: frozenset[AdjacentPair]
    # parse diagnostics
    rejected_loops: int = 0
    rejected_tokens: int = 0
    duplicates: int = 0
    pair_counts: Counter = field(default_factory=Counter, compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.paths)


class NoPathsError(ValueError):
    pass


def normalize_path(asns: Iterable[int]) -> AsPath | None:
    """Collapse prepending; return None if the path revisits an AS."""
    out: list[int] = []
    for asn in asns:
        if not out or out[-1] != asn:
            out.append(asn)
    if len(set(out)) != len(out):
        return None
    return tuple(out)


def parse_paths(text: str) -> PathSet:
    paths: set[AsPath] = set()
    loops = bad = dups = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            asns = [int(tok, 10) for tok in line.split()]
        except ValueError:
            bad += 1
            log.debug("line %d: unparseable token", lineno)
            continue
        if any(a <= 0 for a in asns):
            bad += 1
            continue
        path = normalize_path(asns)
        if path is None:
            loops += 1
            continue
        if len(path) < 2:
            continue
        if path in paths:
            dups += 1
            continue
        paths.add(path)
    if not paths:
        raise NoPathsError("no paths")
    if loops or bad:
        log.warning("dropped %d loop paths and %d malformed lines", loops, bad)
    return from_paths(paths, rejected_loops=loops, rejected_tokens=bad, duplicates=dups)


def from_paths(paths: Iterable[AsPath], **diagnostics: int) -> PathSet:
    """Build a PathSet from already-normalized paths."""
    ordered = tuple(sorted(set(map(tuple, paths))))
    pair_counts = Counter()
    for p in ordered:
        for i in range(len(p) - 2):
            pair_counts[make_pair(p[i], p[i + 1], p[i + 2])] += 1
    return PathSet(
        paths=ordered,
        graph=build_graph(ordered),
        pairs=frozenset(pair_counts),
        pair_counts=pair_counts,
        **diagnostics,
    )


def build_graph(paths: Iterable[AsPath]) -> AsGraph:
    edges: set[Edge] = set()
    for p in paths:
        for a, b in zip(p, p[1:]):
            if a == b:
                raise ValueError(f"self-loop on AS{a}; normalize paths first")
            edges.add(edge_key(a, b))
    degree: Counter = Counter()
    for a, b in edges:
        degree[a] += 1
        degree[b] += 1
    return AsGraph(frozenset(degree), frozenset(edges), dict(degree))


def extract_pairs(paths: Iterable[AsPath]) -> frozenset[AdjacentPair]:
    pairs = set()
    for p in paths:
        for i in range(len(p) - 2):
            pairs.add(make_pair(p[i], p[i + 1], p[i + 2]))
    return frozenset(pairs)


def serialize_paths(pathset: PathSet) -> str:
    return "".join(" ".join(map(str, p)) + "\n" for p in pathset.paths)
