"""Type-of-relationship problem as 2SAT.

Every non-sibling link gets a boolean variable: true keeps the initial
(degree-gradient) direction, false reverses it.  Each pair of adjacent
links ``u-v-w`` becomes the clause "at least one of the two arrows enters
``v``", which is violated exactly by the valley pattern
provider-to-customer followed by customer-to-provider.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple

from .ingest import AdjacentPair, AsGraph, Edge
from .scc import tarjan_scc

Orientation = dict[Edge, tuple[int, int]]


class Literal(NamedTuple):
    var: int
    negated: bool = False

    def __neg__(self) -> "Literal":
        return Literal(self.var, not self.negated)

    def value(self, assignment) -> bool:
        return bool(assignment[self.var]) != self.negated

    def dimacs(self) -> int:
        return -(self.var + 1) if self.negated else self.var + 1


class Clause(NamedTuple):
    a: Literal
    b: Literal

    def satisfied(self, assignment) -> bool:
        return self.a.value(assignment) or self.b.value(assignment)


@dataclass(frozen=True)
class ClauseSet:
    """2-link clauses over variables ``0..len(edges)-1``.

    ``edges[i]`` is the link behind variable ``i`` and ``orientation`` maps it
    to its initial ``(customer, provider)`` direction.  ``origins[k]`` is the
    adjacent pair that produced ``clauses[k]``.
    """

    edges: tuple[Edge, ...]
    orientation: Orientation
    clauses: tuple[Clause, ...]
    origins: tuple[AdjacentPair, ...] = ()

    @property
    def n_vars(self) -> int:
        return len(self.edges)

    def var_of(self) -> dict[Edge, int]:
        return {e: i for i, e in enumerate(self.edges)}

    def direction(self, var: int, value: bool) -> tuple[int, int]:
        tail, head = self.orientation[self.edges[var]]
        return (tail, head) if value else (head, tail)


def orient_by_gradient(graph: AsGraph, siblings: Iterable[Edge] = ()) -> Orientation:
    """Direct each non-sibling link from the lower-degree to the higher-degree AS.

    Equal degrees: the lower ASN becomes the tail.
    """
    skip = set(siblings)
    deg = graph.degree
    out: Orientation = {}
    for a, b in sorted(graph.edges):
        if (a, b) in skip:
            continue
        out[(a, b)] = (a, b) if (deg[a], a) < (deg[b], b) else (b, a)
    return out


def _enters(orientation: Orientation, edge: Edge, node: int) -> bool:
    return orientation[edge][1] == node


def build_clauses(
    pairs: Iterable[AdjacentPair],
    orientation: Orientation,
    siblings: Iterable[Edge] = (),
) -> ClauseSet:
    skip = set(siblings)
    edges = tuple(sorted(orientation))
    index = {e: i for i, e in enumerate(edges)}
    clauses: list[Clause] = []
    origins: list[AdjacentPair] = []
    for pair in sorted(pairs):
        e1, e2 = pair.edges
        if e1 in skip or e2 in skip:
            continue
        if e1 not in index or e2 not in index:
            raise KeyError(f"pair {tuple(pair)} references an unoriented link")
        v = pair.v
        # literal "arrow enters v": positive iff the initial direction already does
        clauses.append(Clause(
            Literal(index[e1], not _enters(orientation, e1, v)),
            Literal(index[e2], not _enters(orientation, e2, v)),
        ))
        origins.append(pair)
    return ClauseSet(edges, dict(orientation), tuple(clauses), tuple(origins))


@dataclass(frozen=True)
class ImplicationGraph:
    """Digraph on literal vertices; vertex ``2*i`` is ``x_i``, ``2*i+1`` is ``~x_i``."""

    n_vars: int
    adj: tuple[tuple[int, ...], ...]

    @staticmethod
    def vertex(lit: Literal) -> int:
        return 2 * lit.var + lit.negated

    @property
    def n_arcs(self) -> int:
        return sum(map(len, self.adj))

    def arcs(self) -> set[tuple[int, int]]:
        return {(u, w) for u, succ in enumerate(self.adj) for w in succ}


def build_implication_graph(clauses: Iterable[Clause], n_vars: int) -> ImplicationGraph:
    adj: list[list[int]] = [[] for _ in range(2 * n_vars)]
    seen: set[tuple[int, int]] = set()
    vx = ImplicationGraph.vertex

    def arc(u: int, w: int) -> None:
        if (u, w) not in seen:
            seen.add((u, w))
            adj[u].append(w)

    for a, b in clauses:
        arc(vx(-a), vx(b))
        arc(vx(-b), vx(a))
    return ImplicationGraph(n_vars, tuple(map(tuple, adj)))


class TwoSatResult(NamedTuple):
    satisfiable: bool
    assignment: tuple[bool, ...] | None


def solve_2sat(graph: ImplicationGraph) -> TwoSatResult:
    comp = tarjan_scc(2 * graph.n_vars, graph.adj)
    values = []
    for i in range(graph.n_vars):
        pos, neg = comp[2 * i], comp[2 * i + 1]
        if pos == neg:
            return TwoSatResult(False, None)
        # tarjan numbers components in reverse topological order
        values.append(pos < neg)
    return TwoSatResult(True, tuple(values))


@dataclass(frozen=True)
class StripResult:
    fixed: dict[Edge, tuple[int, int]]
    fixed_vars: tuple[int, ...]
    satisfied: int                  # clauses satisfied by the fixed literals
    residual: ClauseSet             # variables re-indexed 0..m1-1
    residual_vars: tuple[int, ...]  # residual index -> original variable
    rounds: int

    @property
    def implication_graph(self) -> ImplicationGraph:
        return build_implication_graph(self.residual.clauses, self.residual.n_vars)


def strip_nonconflict(cs: ClauseSet) -> StripResult:
    """Fix links whose initial direction satisfies every clause they occur in.

    Fixing a link removes its clauses, which can free further links; repeat
    to a fixpoint.  A fixed variable only occurs positively, so fixing it to
    true never lowers the satisfiable weight.
    """
    n = cs.n_vars
    occurs: list[list[int]] = [[] for _ in range(n)]
    negs = [0] * n
    for k, (a, b) in enumerate(cs.clauses):
        for lit in {a, b}:
            occurs[lit.var].append(k)
            negs[lit.var] += lit.negated
    alive_clause = [True] * len(cs.clauses)
    alive_var = [True] * n

    frontier = [i for i in range(n) if negs[i] == 0]
    order: list[int] = []
    rounds = 0
    while frontier:
        rounds += 1
        nxt: list[int] = []
        for i in frontier:
            if not alive_var[i]:
                continue
            alive_var[i] = False
            order.append(i)
            for k in occurs[i]:
                if not alive_clause[k]:
                    continue
                alive_clause[k] = False
                for lit in set(cs.clauses[k]):
                    if lit.var != i and lit.negated:
                        negs[lit.var] -= 1
                        if negs[lit.var] == 0 and alive_var[lit.var]:
                            nxt.append(lit.var)
        frontier = sorted(set(nxt))

    keep = [i for i in range(n) if alive_var[i]]
    remap = {old: new for new, old in enumerate(keep)}
    res_clauses, res_origins = [], []
    for k, c in enumerate(cs.clauses):
        if alive_clause[k]:
            res_clauses.append(Clause(*(Literal(remap[l.var], l.negated) for l in c)))
            if cs.origins:
                res_origins.append(cs.origins[k])
    residual = ClauseSet(
        tuple(cs.edges[i] for i in keep),
        {cs.edges[i]: cs.orientation[cs.edges[i]] for i in keep},
        tuple(res_clauses),
        tuple(res_origins),
    )
    fixed_vars = tuple(sorted(order))
    return StripResult(
        fixed={cs.edges[i]: cs.orientation[cs.edges[i]] for i in fixed_vars},
        fixed_vars=fixed_vars,
        satisfied=alive_clause.count(False),
        residual=residual,
        residual_vars=tuple(keep),
        rounds=rounds,
    )


def dump_dimacs(cs: ClauseSet) -> str:
    """Clauses as DIMACS CNF; comment lines map variables to links."""
    lines = ["c variable customer provider (initial direction)"]
    for i, e in enumerate(cs.edges):
        tail, head = cs.orientation[e]
        lines.append(f"c var {i + 1} {tail} {head}")
    lines.append(f"p cnf {cs.n_vars} {len(cs.clauses)}")
    lines.extend(f"{a.dimacs()} {b.dimacs()} 0" for a, b in cs.clauses)
    return "\n".join(lines) + "\n"


def decode_orientation(cs: ClauseSet, assignment: Mapping[int, bool] | list[bool]) -> Orientation:
    return {e: cs.direction(i, bool(assignment[i])) for i, e in enumerate(cs.edges)}
