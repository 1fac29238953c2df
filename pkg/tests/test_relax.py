import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_max, random_clauses, random_instance
from torsdp import relax
from torsdp.relax import (
    RelaxConfig,
    RelaxationError,
    VectorSolution,
    WeightedClause,
    WeightedInstance,
    brute_force_opt,
    build_weighted,
    default_dim,
    dump_wcnf,
    gradient_f,
    load_wcnf,
    objective_value,
    relaxation_objective,
    round_hyperplane,
    solve_relaxation,
)
from torsdp.tor2sat import Clause, Literal

X1, X2 = Literal(0), Literal(1)


def test_gradient_f():
    assert gradient_f(3, 3) == 0.0
    assert gradient_f(5, 10) == pytest.approx(5 / 15 * math.log(15), rel=1e-15)
    assert gradient_f(5, 10) == pytest.approx(0.902683, abs=1e-6)
    assert gradient_f(500, 1000) > gradient_f(5, 10) > gradient_f(995, 1000)
    assert gradient_f(5, 10, base=2) == pytest.approx(5 / 15 * math.log2(15))
    for bad in [(0, 3), (-1, 2), (4, 3)]:
        with pytest.raises(ValueError):
            gradient_f(*bad)


def _two_var_clauses(m2=4):
    lits = [(X1, X2), (-X1, X2), (X1, -X2), (-X1, -X2)]
    return [Clause(*lits[k % 4]) for k in range(m2)]


def test_build_weighted_limits():
    dp = {0: (1, 3), 1: (2, 9)}
    inst = build_weighted(_two_var_clauses(), dp, alpha=1.0)
    assert all(c.weight == 0 for c in inst.clauses if c.one_link)
    assert inst.two_link_total == pytest.approx(1.0, abs=1e-12)
    assert all(c.weight == 0.25 for c in inst.clauses if not c.one_link)
    inst = build_weighted(_two_var_clauses(), dp, alpha=0.0)
    assert all(c.weight == 0 for c in inst.clauses if not c.one_link)
    assert inst.one_link_total == pytest.approx(1.0, abs=1e-12)


def test_build_weighted_arithmetic(monkeypatch):
    fvals = {(1, 2): 0.9, (1, 3): 0.1}
    monkeypatch.setattr(relax, "gradient_f", lambda dm, dp, base=None: fvals[dm, dp])
    inst = build_weighted(_two_var_clauses(4), {0: (1, 2), 1: (1, 3)}, alpha=0.5)
    two = [c.weight for c in inst.clauses if not c.one_link]
    one = [c.weight for c in inst.clauses if c.one_link]
    assert two == [0.125] * 4
    assert one == pytest.approx([0.45, 0.05], abs=1e-15)


def test_build_weighted_degenerate():
    inst = build_weighted([], {0: (1, 4)}, alpha=0.5)
    assert inst.m2 == 0 and any("2-link" in w for w in inst.warnings)
    inst = build_weighted(_two_var_clauses(), {0: (3, 3), 1: (2, 2)}, alpha=0.5)
    assert inst.one_link_total == 0 and any("gradients are zero" in w for w in inst.warnings)
    assert build_weighted([], {}, alpha=0.5).warnings == ()
    with pytest.raises(ValueError):
        build_weighted([], {}, alpha=1.5)
    with pytest.raises(KeyError):
        build_weighted([Clause(X1, X2)], {0: (1, 2)}, alpha=0.5)
    with pytest.raises(ValueError, match="single variable"):
        build_weighted([Clause(X1, -X1)], {0: (1, 2)}, alpha=0.5)


@pytest.mark.parametrize("alpha", [k / 10 for k in range(11)])
def test_weight_sums(alpha):
    rng = random.Random(int(alpha * 10))
    n = 8
    clauses = []
    for _ in range(15):
        i, j = rng.sample(range(n), 2)
        clauses.append(Clause(Literal(i, rng.random() < .5), Literal(j, True)))
    dp = {i: (rng.randint(1, 5), rng.randint(6, 40)) for i in range(n)}
    inst = build_weighted(clauses, dp, alpha)
    assert abs(inst.two_link_total - alpha) <= 1e-9
    assert abs(inst.one_link_total - (1 - alpha)) <= 1e-9


def test_log_base_does_not_change_optimum():
    rng = random.Random(2)
    n = 7
    clauses = random_clauses(rng, n, 12)
    dp = {i: (rng.randint(1, 5), rng.randint(5, 40)) for i in range(n)}
    a = build_weighted(clauses, dp, 0.4)
    b = build_weighted(clauses, dp, 0.4, base=10)
    assert [c.weight for c in a.clauses] == pytest.approx([c.weight for c in b.clauses], abs=1e-15)
    assert brute_force_opt(a).values == brute_force_opt(b).values


def test_objective_value_examples():
    inst = WeightedInstance(1, (WeightedClause(X1, X1, 1.0),))
    assert objective_value(inst, [True]) == 1.0
    inst = WeightedInstance(2, (WeightedClause(-X1, -X2, 1.0),))
    assert objective_value(inst, [True, True]) == 0.0
    with pytest.raises(ValueError):
        objective_value(inst, [True])


def test_objective_matches_enumeration():
    rng = random.Random(4)
    for _ in range(30):
        inst = random_instance(rng, n=rng.randint(2, 8))
        x = [rng.random() < .5 for _ in range(inst.m1)]
        expect = math.fsum(w for a, b, w in inst.clauses if a.value(x) or b.value(x))
        assert objective_value(inst, x) == pytest.approx(expect, abs=1e-12)
        assert brute_force_opt(inst).objective == pytest.approx(brute_max(inst.m1, inst.clauses), abs=1e-12)


def test_quarter_form_on_boolean_vectors():
    rng = random.Random(8)
    np_rng = np.random.default_rng(8)
    for _ in range(50):
        inst = random_instance(rng)
        v0 = np_rng.standard_normal(4)
        v0 /= np.linalg.norm(v0)
        x = np_rng.random(inst.m1) < 0.5
        V = np.where(x[:, None], v0, -v0)
        assert relaxation_objective(inst, v0, V) == pytest.approx(objective_value(inst, x), abs=1e-12)
        M, const = relax._quadratic_form(inst)
        full = np.vstack([v0, V])
        assert const + float(np.sum((M @ full) * full)) == pytest.approx(
            relaxation_objective(inst, v0, V), abs=1e-12)


def test_relaxation_single_unit_clause():
    inst = WeightedInstance(1, (WeightedClause(X1, X1, 1.0),))
    sol = solve_relaxation(inst)
    assert sol.objective == pytest.approx(1.0, abs=1e-9)
    assert float(sol.v[0] @ sol.v0) >= 1 - 1e-6


def test_relaxation_opposed_unit_clauses():
    inst = WeightedInstance(1, (WeightedClause(X1, X1, 0.5), WeightedClause(-X1, -X1, 0.5)))
    sol = solve_relaxation(inst)
    assert sol.objective == pytest.approx(0.5, abs=1e-12)
    for t in np.linspace(0, np.pi, 7):
        v = np.array([[np.cos(t), np.sin(t)]])
        assert relaxation_objective(inst, np.array([1.0, 0.0]), v) == pytest.approx(0.5)


def test_relaxation_unit_vectors_and_dominance():
    rng = random.Random(11)
    for _ in range(20):
        inst = random_instance(rng)
        sol = solve_relaxation(inst)
        assert sol.converged and sol.grad_norm < 1e-7
        assert np.allclose(np.linalg.norm(sol.v, axis=1), 1, atol=1e-6)
        assert abs(np.linalg.norm(sol.v0) - 1) < 1e-6
        assert sol.objective == pytest.approx(relaxation_objective(inst, sol.v0, sol.v), abs=1e-9)
        assert sol.objective >= brute_force_opt(inst).objective - 1e-6


def test_relaxation_nonconvergence_carries_best():
    inst = random_instance(random.Random(3), n=10)
    with pytest.raises(RelaxationError) as ei:
        solve_relaxation(inst, RelaxConfig(max_iters=1))
    assert isinstance(ei.value.best, VectorSolution)
    assert not ei.value.best.converged


def test_restart_jobs_identical():
    inst = random_instance(random.Random(21), n=12)
    a = solve_relaxation(inst, RelaxConfig(jobs=1))
    b = solve_relaxation(inst, RelaxConfig(jobs=3))
    assert a.objective == b.objective and np.array_equal(a.v, b.v)


def test_default_dim():
    assert default_dim(1) == 2
    assert default_dim(8) == 5
    assert default_dim(4249) == math.ceil(math.sqrt(8498)) + 1


def _solution(v0, v):
    v = np.asarray(v, float)
    return VectorSolution(len(v0), np.asarray(v0, float), v, 0.0, 0, 0.0)


def test_round_all_aligned_and_all_opposed():
    v0 = np.array([1.0, 0, 0])
    inst = WeightedInstance(3, tuple(WeightedClause(Literal(i), Literal(i), 1 / 3) for i in range(3)))
    a = round_hyperplane(_solution(v0, [v0] * 3), inst, n_cuts=20, seed=1)
    assert a.values == (True, True, True)
    inst1 = WeightedInstance(1, (WeightedClause(-X1, -X1, 1.0),))
    for seed in range(5):
        a = round_hyperplane(_solution(v0, [-v0]), inst1, n_cuts=5, seed=seed)
        assert a.values == (False,)


def test_round_deterministic_and_parallel_equal():
    inst = random_instance(random.Random(7), n=12)
    sol = solve_relaxation(inst)
    for rot, skew in [(0, 0), (0.3, 0), (0.2, 0.5)]:
        a = round_hyperplane(sol, inst, 200, seed=9, rotation=rot, skew=skew)
        b = round_hyperplane(sol, inst, 200, seed=9, rotation=rot, skew=skew)
        c = round_hyperplane(sol, inst, 200, seed=9, rotation=rot, skew=skew, jobs=4)
        assert a == b == c
        assert a.objective == pytest.approx(objective_value(inst, a.values), abs=1e-12)


def test_round_guards():
    inst = WeightedInstance(1, (WeightedClause(X1, X1, 1.0),))
    sol = _solution([1.0, 0.0], [[0.0, 1.0]])
    with pytest.raises(ValueError):
        round_hyperplane(sol, inst, n_cuts=0)
    with pytest.raises(ValueError):
        round_hyperplane(sol, inst, rotation=1.5)
    with pytest.raises(ValueError):
        round_hyperplane(sol, inst, skew=-0.1)


def test_rotate():
    v0 = np.array([1.0, 0.0])
    v = np.array([[0.6, 0.8], [-0.6, 0.8]])
    assert relax.rotate(v0, v, 0.0) is v
    full = relax.rotate(v0, v, 1.0)
    assert np.allclose(full, [[1, 0], [-1, 0]])
    half = relax.rotate(v0, v, 0.5)
    assert np.allclose(np.linalg.norm(half, axis=1), 1)
    assert half[0] @ v0 > v[0] @ v0 and half[1] @ v0 < v[1] @ v0


def test_weightless_variable_stays_true():
    inst = WeightedInstance(2, (WeightedClause(X1, X1, 1.0), WeightedClause(-X2, -X2, 0.0)))
    sol = _solution([1.0, 0.0], [[1.0, 0.0], [-1.0, 0.0]])
    assert round_hyperplane(sol, inst, 10).values == (True, True)


def test_brute_force_tie_break():
    inst = WeightedInstance(2, (WeightedClause(X1, X2, 1.0),))
    assert brute_force_opt(inst).values == (False, True)
    empty = brute_force_opt(WeightedInstance(3, ()))
    assert empty.values == (False, False, False) and empty.objective == 0
    with pytest.raises(ValueError):
        brute_force_opt(WeightedInstance(21, ()))


def test_alpha_zero_all_true_optimal():
    rng = random.Random(0)
    dp = {i: (rng.randint(1, 4), rng.randint(5, 20)) for i in range(6)}
    clauses = [Clause(-a, -b) for a, b in random_clauses(rng, 6, 9)]
    inst = build_weighted(clauses, dp, 0.0)
    assert brute_force_opt(inst).values == (True,) * 6


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_wcnf_roundtrip(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 6)
    clauses = random_clauses(rng, n, rng.randint(0, 8))
    dp = {i: (rng.randint(1, 5), rng.randint(5, 9)) for i in range(n)}
    inst = build_weighted(clauses, dp, rng.random())
    back = load_wcnf(dump_wcnf(inst))
    assert back.m1 == inst.m1 and back.alpha == inst.alpha
    assert back.clauses == inst.clauses
    assert back.degree_pairs == inst.degree_pairs


@pytest.mark.parametrize("text", ["1 1 0\n", "p wcnf 1 1\n1 2 0\n", "p wcnf 1 1\n-1 1 0\n", "p cnf 1 1\n"])
def test_wcnf_errors(text):
    with pytest.raises(ValueError):
        load_wcnf(text)
