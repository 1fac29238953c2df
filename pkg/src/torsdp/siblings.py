"""Sibling links from WHOIS organization names.

Two ASs are treated as one organization when their names match exactly,
differ only in a trailing number (``ATT-37`` / ``ATT-38``), or share the same
distinctive leading word (``UUNET South Africa`` / ``UUNET Germany``).
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Mapping

from .ingest import AsGraph, Edge

log = logging.getLogger(__name__)

STOP_WORDS = frozenset({"THE", "NET", "COM", "INC", "LTD", "GMBH", "CORP"})
MIN_TOKEN_LEN = 4

_punct = re.compile(r"[^0-9A-Z]+")
_trailing_digits = re.compile(r"\s*\d+$")


@dataclass
class OrgTable:
    names: dict[int, str] = field(default_factory=dict)
    duplicates: int = 0
    rejected: int = 0


def load_orgs(text: str) -> OrgTable:
    """Parse ``ASN<TAB>OrgName`` lines; the last entry for an ASN wins."""
    table = OrgTable()
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t", 1)
        if len(parts) != 2 or not parts[1].strip():
            table.rejected += 1
            continue
        try:
            asn = int(parts[0].strip())
        except ValueError:
            table.rejected += 1
            continue
        if asn in table.names:
            table.duplicates += 1
        table.names[asn] = parts[1].strip()
    if table.rejected:
        log.warning("rejected %d malformed org lines", table.rejected)
    return table


def normalize_name(name: str) -> str:
    return _punct.sub(" ", name.upper()).strip()


def _lead_token(norm: str) -> str | None:
    for tok in norm.split():
        if tok.isalpha():
            if len(tok) >= MIN_TOKEN_LEN and tok not in STOP_WORDS:
                return tok
            return None
    return None


def same_org(name_a: str, name_b: str) -> bool:
    a, b = normalize_name(name_a), normalize_name(name_b)
    if not a or not b:
        return False
    if a == b:
        return True
    if _trailing_digits.sub("", a) == _trailing_digits.sub("", b) != "":
        return True
    lead = _lead_token(a)
    return lead is not None and lead == _lead_token(b)


def infer_siblings(orgs: Mapping[int, str] | OrgTable | None, graph: AsGraph) -> frozenset[Edge]:
    """Label graph edges whose two endpoints belong to the same organization."""
    if isinstance(orgs, OrgTable):
        orgs = orgs.names
    if not orgs:
        return frozenset()
    return frozenset(
        (a, b) for a, b in graph.edges
        if a in orgs and b in orgs and same_org(orgs[a], orgs[b])
    )
