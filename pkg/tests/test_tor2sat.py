import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_max, brute_sat, clause_set, random_clauses
from torsdp.ingest import AdjacentPair, build_graph, parse_paths
from torsdp.relax import WeightedClause
from torsdp.tor2sat import (
    Clause,
    ImplicationGraph,
    Literal,
    build_clauses,
    build_implication_graph,
    decode_orientation,
    dump_dimacs,
    orient_by_gradient,
    solve_2sat,
    strip_nonconflict,
)

X1, X2 = Literal(0), Literal(1)


def test_orient_by_gradient():
    # deg(1)=1, deg(2)=3 ...
    g = build_graph([(1, 2, 3), (2, 4), (3, 4)])
    o = orient_by_gradient(g)
    assert o[(1, 2)] == (1, 2)
    # deg(2)=3 > deg(3)=2
    assert o[(2, 3)] == (3, 2)
    # equal degrees 2 and 2: lower ASN is the tail
    assert o[(3, 4)] == (3, 4)
    assert orient_by_gradient(g, siblings=[(1, 2)]).keys() == {(2, 3), (2, 4), (3, 4)}


def test_orient_tie_deterministic():
    g = build_graph([(9, 4), (4, 7), (7, 9)])
    o = orient_by_gradient(g)
    assert o == {(4, 9): (4, 9), (4, 7): (4, 7), (7, 9): (7, 9)}
    assert all(orient_by_gradient(g) == o for _ in range(5))


def test_clause_polarity_both_enter():
    o = {(1, 2): (1, 2), (2, 3): (3, 2)}
    cs = build_clauses([AdjacentPair(1, 2, 3)], o)
    assert cs.clauses == (Clause(Literal(0), Literal(1)),)


def test_clause_polarity_both_leave():
    o = {(1, 2): (2, 1), (2, 3): (2, 3)}
    cs = build_clauses([AdjacentPair(1, 2, 3)], o)
    assert cs.clauses == (Clause(Literal(0, True), Literal(1, True)),)


def test_sibling_pair_has_no_clause():
    o = {(2, 3): (2, 3)}
    cs = build_clauses([AdjacentPair(1, 2, 3)], o, siblings=[(1, 2)])
    assert cs.clauses == ()


def test_unknown_edge_raises():
    with pytest.raises(KeyError):
        build_clauses([AdjacentPair(1, 2, 3)], {(1, 2): (1, 2)})


def _step_labels(path, orient):
    out = []
    for a, b in zip(path, path[1:]):
        out.append("U" if orient[min(a, b), max(a, b)] == (a, b) else "D")
    return "".join(out)


def test_each_clause_falsified_only_by_valley():
    rng = random.Random(5)
    paths = [tuple(rng.sample(range(1, 15), rng.randint(3, 5))) for _ in range(20)]
    ps = parse_paths("\n".join(" ".join(map(str, p)) for p in paths))
    o = orient_by_gradient(ps.graph)
    cs = build_clauses(ps.pairs, o)
    for clause, pair in zip(cs.clauses, cs.origins):
        i, j = clause.a.var, clause.b.var
        falsifying = []
        for xi, xj in itertools.product((False, True), repeat=2):
            x = {i: xi, j: xj}
            orient = {cs.edges[i]: cs.direction(i, xi), cs.edges[j]: cs.direction(j, xj)}
            labels = _step_labels((pair.u, pair.v, pair.w), orient)
            assert (not clause.satisfied(x)) == (labels == "DU")
            falsifying.append(not clause.satisfied(x))
        assert sum(falsifying) == 1


def test_implication_graph_examples():
    g = build_implication_graph([Clause(X1, X2)], 2)
    vx = ImplicationGraph.vertex
    assert g.arcs() == {(vx(-X1), vx(X2)), (vx(-X2), vx(X1))}
    g = build_implication_graph([Clause(X1, X1)], 1)
    assert g.arcs() == {(vx(-X1), vx(X1))}
    g = build_implication_graph([], 3)
    assert len(g.adj) == 6 and g.n_arcs == 0


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.integers(0, 20), st.integers(0, 10**6))
def test_implication_graph_skew_symmetric(n, m, seed):
    clauses = random_clauses(random.Random(seed), n, m, allow_unit=True)
    g = build_implication_graph(clauses, n)
    arcs = g.arcs()
    for u, w in arcs:
        assert (w ^ 1, u ^ 1) in arcs


def test_solve_2sat_examples():
    assert solve_2sat(build_implication_graph([Clause(X1, X2)], 2)).satisfiable
    unsat = [Clause(X1, X2), Clause(-X1, X2), Clause(X1, -X2), Clause(-X1, -X2)]
    res = solve_2sat(build_implication_graph(unsat, 2))
    assert not res.satisfiable and res.assignment is None


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10), st.integers(0, 30), st.integers(0, 10**6))
def test_solve_2sat_matches_enumeration(n, m, seed):
    clauses = random_clauses(random.Random(seed), n, m, allow_unit=True)
    res = solve_2sat(build_implication_graph(clauses, n))
    assert res.satisfiable == brute_sat(n, clauses)
    if res.satisfiable:
        assert all(c.satisfied(res.assignment) for c in clauses)


def test_strip_only_positive_fixed():
    cs = clause_set(2, [Clause(X1, X2)])
    s = strip_nonconflict(cs)
    assert s.fixed_vars == (0, 1) and s.residual.n_vars == 0 and s.satisfied == 1


def test_strip_chain_across_rounds():
    # x0 is pure-positive; fixing it satisfies the only clause where x1 is
    # negative, which in turn frees x1, which frees x2.
    x0, x1, x2, x3 = (Literal(i) for i in range(4))
    clauses = [Clause(x0, -x1), Clause(x1, -x2), Clause(x2, -x3), Clause(-x3, -x3)]
    cs = clause_set(4, clauses)
    s = strip_nonconflict(cs)
    assert s.fixed_vars == (0, 1, 2)
    assert s.rounds == 3
    assert s.residual_vars == (3,)
    assert s.residual.clauses == (Clause(Literal(0, True), Literal(0, True)),)
    w = [WeightedClause(a, b, 1.0) for a, b in clauses]
    rest = [WeightedClause(a, b, 1.0) for a, b in s.residual.clauses]
    assert s.satisfied + brute_max(s.residual.n_vars, rest) == brute_max(4, w)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 10), st.integers(1, 25), st.integers(0, 10**6))
def test_strip_fixpoint_properties(n, m, seed):
    clauses = random_clauses(random.Random(seed), n, m, allow_unit=True)
    s = strip_nonconflict(clause_set(n, clauses))
    # every residual variable still occurs negatively (else it would be fixed)
    neg = {l.var for c in s.residual.clauses for l in c if l.negated}
    assert neg == set(range(s.residual.n_vars))
    # fixed links never appear in residual clauses
    assert set(s.fixed) & set(s.residual.edges) == set()
    assert len(s.fixed_vars) + s.residual.n_vars == n
    assert s.satisfied + len(s.residual.clauses) == m


def test_dimacs_dump():
    cs = clause_set(2, [Clause(X1, -X2)])
    text = dump_dimacs(cs)
    assert "p cnf 2 1" in text
    assert text.rstrip().endswith("1 -2 0")
    assert decode_orientation(cs, [True, False]) == {(1, 1001): (1, 1001), (2, 1002): (1002, 2)}
