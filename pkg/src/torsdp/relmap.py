"""Per-link relationship labels and their JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

from .ingest import Edge, edge_key

C2P = "c2p"
SIBLING = "sibling"

FIXED = "fixed_by_stripping"
ROUNDED = "rounded"
GRADIENT = "gradient_default"
PROV_SIBLING = "sibling"
PROVENANCES = (FIXED, ROUNDED, GRADIENT, PROV_SIBLING)


@dataclass
class RelationshipMap:
    """``directed[edge] = (customer, provider)``; sibling links are kept apart."""

    directed: dict[Edge, tuple[int, int]] = field(default_factory=dict)
    siblings: frozenset[Edge] = frozenset()
    provenance: dict[Edge, str] = field(default_factory=dict)

    def __post_init__(self):
        overlap = self.siblings & self.directed.keys()
        if overlap:
            raise ValueError(f"links both sibling and directed: {sorted(overlap)[:5]}")

    def edges(self) -> set[Edge]:
        return set(self.directed) | set(self.siblings)

    def nodes(self) -> set[int]:
        return {a for e in self.edges() for a in e}

    def __len__(self) -> int:
        return len(self.directed) + len(self.siblings)

    def to_dict(self) -> dict:
        records = []
        for e in sorted(self.edges()):
            if e in self.siblings:
                records.append({"a": e[0], "b": e[1], "rel": SIBLING,
                                "prov": self.provenance.get(e, PROV_SIBLING)})
            else:
                a, b = self.directed[e]
                records.append({"a": a, "b": b, "rel": C2P,
                                "prov": self.provenance.get(e, GRADIENT)})
        return {"edges": records}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "RelationshipMap":
        directed, sibs, prov = {}, set(), {}
        for rec in data["edges"]:
            a, b, rel = int(rec["a"]), int(rec["b"]), rec["rel"]
            e = edge_key(a, b)
            if e in directed or e in sibs:
                raise ValueError(f"duplicate record for link {e}")
            if rel == SIBLING:
                sibs.add(e)
            elif rel == C2P:
                directed[e] = (a, b)
            else:
                raise ValueError(f"unknown relationship {rel!r}")
            if "prov" in rec:
                prov[e] = rec["prov"]
        return cls(directed, frozenset(sibs), prov)

    @classmethod
    def from_json(cls, text: str) -> "RelationshipMap":
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_orientation(cls, orientation: dict[Edge, tuple[int, int]],
                         siblings: Iterable[Edge] = (), provenance=None) -> "RelationshipMap":
        return cls(dict(orientation), frozenset(siblings), dict(provenance or {}))
