"""Weighted MAX2SAT with degree-gradient 1-link clauses, its vector
relaxation, and random-hyperplane rounding.

Each variable ``x_i`` is represented by a unit vector ``v_i``; its negation
by ``-v_i``; ``v0`` is the truth vector.  A clause ``(a or b)`` of weight
``w`` contributes ``w/4 * (3 + v0.a + v0.b - a.b)``, which equals ``w`` when
the vectors are ``+-v0`` and the clause is satisfied and 0 otherwise.

The relaxation is solved in low-rank factorized form: rows of ``V`` live on
the unit sphere and a Riemannian trust-region method drives the gradient
to zero.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp

from .tor2sat import Clause, Literal

log = logging.getLogger(__name__)

# stream ids for the counter-based seeding scheme: rng([seed, stream, index])
STREAM_RESTART = 1
STREAM_CUT = 2

BRUTE_FORCE_LIMIT = 20


def gradient_f(d_minus: int, d_plus: int, base: float | None = None) -> float:
    """Degree-gradient preference for directing a link toward ``d_plus``.

    ``(d+ - d-) / (d+ + d-) * log(d+ + d-)``, natural log unless ``base`` is given.
    """
    if d_minus <= 0 or d_plus <= 0:
        raise ValueError(f"degrees must be positive, got ({d_minus}, {d_plus})")
    if d_minus > d_plus:
        raise ValueError(f"expected d_minus <= d_plus, got ({d_minus}, {d_plus})")
    total = d_plus + d_minus
    lg = math.log(total) if base is None else math.log(total, base)
    return (d_plus - d_minus) / total * lg


class WeightedClause(NamedTuple):
    a: Literal
    b: Literal
    weight: float

    @property
    def one_link(self) -> bool:
        return self.a.var == self.b.var


@dataclass(frozen=True)
class WeightedInstance:
    m1: int
    clauses: tuple[WeightedClause, ...]
    alpha: float = 1.0
    c1: float = 0.0
    c2: float = 0.0
    degree_pairs: dict[int, tuple[int, int]] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    @property
    def m2(self) -> int:
        return sum(not c.one_link for c in self.clauses)

    @property
    def two_link_total(self) -> float:
        return math.fsum(c.weight for c in self.clauses if not c.one_link)

    @property
    def one_link_total(self) -> float:
        return math.fsum(c.weight for c in self.clauses if c.one_link)

    def weightless_vars(self) -> list[int]:
        touched = np.zeros(self.m1, dtype=bool)
        for a, b, w in self.clauses:
            if w > 0:
                touched[a.var] = touched[b.var] = True
        return np.flatnonzero(~touched).tolist()


def build_weighted(
    clauses: Sequence[Clause],
    degree_pairs: Mapping[int, tuple[int, int]],
    alpha: float,
    n_vars: int | None = None,
    base: float | None = None,
) -> WeightedInstance:
    """Attach weights: ``alpha/m2`` per 2-link clause and a positive 1-link
    clause per variable weighted by ``(1-alpha) * f(d-, d+) / sum f``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    m1 = len(degree_pairs) if n_vars is None else n_vars
    for c in clauses:
        if c.a.var == c.b.var:
            raise ValueError(f"2-link clause {c} mentions a single variable")
        for lit in c:
            if lit.var not in degree_pairs:
                raise KeyError(f"variable {lit.var} has no degree pair")
    m2 = len(clauses)
    warnings = []

    c2 = 1.0 / m2 if m2 else 0.0
    if m2 == 0 and alpha > 0 and m1:
        warnings.append("no 2-link clauses; solving 1-link clauses only")
    out = [WeightedClause(c.a, c.b, alpha * c2) for c in clauses]

    fs = {i: gradient_f(*degree_pairs[i], base=base) for i in range(m1)}
    total_f = math.fsum(fs.values())
    c1 = 1.0 / total_f if total_f > 0 else 0.0
    if total_f > 0:
        out.extend(
            WeightedClause(Literal(i), Literal(i), (1.0 - alpha) * c1 * fs[i])
            for i in range(m1)
        )
    elif alpha < 1 and m1:
        warnings.append("all degree gradients are zero; 1-link clauses skipped")
    for w in warnings:
        log.warning(w)
    return WeightedInstance(
        m1=m1,
        clauses=tuple(out),
        alpha=alpha,
        c1=c1,
        c2=c2,
        degree_pairs={i: tuple(degree_pairs[i]) for i in range(m1)},
        warnings=tuple(warnings),
    )


def objective_value(instance: WeightedInstance, assignment) -> float:
    """Total weight of clauses satisfied by ``assignment`` (indexable by var)."""
    if len(assignment) < instance.m1:
        raise ValueError(f"assignment covers {len(assignment)} of {instance.m1} variables")
    try:
        return math.fsum(
            w for a, b, w in instance.clauses
            if a.value(assignment) or b.value(assignment)
        )
    except (KeyError, IndexError) as exc:
        raise ValueError(f"assignment is missing variable {exc}") from None


# -- relaxation ----------------------------------------------------------------


def _quadratic_form(instance: WeightedInstance) -> tuple[sp.csr_matrix, float]:
    """Return ``(M, const)`` with relaxation objective ``const + <M, V V^T>``.

    Row 0 of ``V`` is ``v0``; row ``i+1`` is ``v_i``.
    """
    rows, cols, vals = [], [], []
    const = 0.0

    def add(i, j, x):
        rows.extend((i, j))
        cols.extend((j, i))
        vals.extend((x, x))

    for a, b, w in instance.clauses:
        if w == 0:
            continue
        sa = -1.0 if a.negated else 1.0
        sb = -1.0 if b.negated else 1.0
        ra, rb = a.var + 1, b.var + 1
        if ra == rb:
            if sa == sb:
                # w/4 (3 + 2 s v0.v - 1)
                const += w / 2
                add(0, ra, w * sa / 4)
            else:
                const += w
            continue
        const += 0.75 * w
        add(0, ra, w * sa / 8)
        add(0, rb, w * sb / 8)
        add(ra, rb, -w * sa * sb / 8)
    n = instance.m1 + 1
    M = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return M, const


def relaxation_objective(instance: WeightedInstance, v0: np.ndarray, v: np.ndarray) -> float:
    """Evaluate the vector objective directly, clause by clause."""
    v = np.asarray(v, dtype=float).reshape(instance.m1, -1)
    total = []
    for a, b, w in instance.clauses:
        va = -v[a.var] if a.negated else v[a.var]
        vb = -v[b.var] if b.negated else v[b.var]
        total.append(w / 4 * (3 + v0 @ va + v0 @ vb - va @ vb))
    return math.fsum(total)


@dataclass(frozen=True)
class RelaxConfig:
    tolerance: float = 1e-7
    max_iters: int = 5000
    restarts: int = 3
    dim: int | None = None
    seed: int = 0
    jobs: int = 1


@dataclass(frozen=True)
class VectorSolution:
    dim: int
    v0: np.ndarray
    v: np.ndarray           # (m1, dim); the vector of ~x_i is -v[i]
    objective: float
    iterations: int
    grad_norm: float
    restart: int = 0
    converged: bool = True


class RelaxationError(RuntimeError):
    def __init__(self, message: str, best: VectorSolution):
        super().__init__(message)
        self.best = best


def default_dim(m1: int) -> int:
    return min(m1 + 1, math.ceil(math.sqrt(2 * m1)) + 1)


def _normalize_rows(V: np.ndarray) -> np.ndarray:
    return V / np.linalg.norm(V, axis=1, keepdims=True)


def _rowdot(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.sum(A * B, axis=1, keepdims=True)


def _trust_region(M, const, V, tol, max_iters, trace=None):
    """Riemannian trust-region ascent (truncated CG inner solver).

    Works on the minimization of ``-f``; rows of ``V`` stay on the unit sphere
    via the normalize-rows retraction.
    """
    n, p = V.shape
    delta_max = math.sqrt(n) * math.pi / 2
    delta = delta_max / 8
    MV = M @ V
    f = const + float(np.sum(MV * V))
    gn = math.inf
    it = 0
    while it < max_iters:
        egrad = -2 * MV
        lam = _rowdot(egrad, V)
        grad = egrad - lam * V
        gn = float(np.linalg.norm(grad))
        if gn < tol:
            break
        it += 1

        def hess(U):
            eh = -2 * (M @ U)
            return eh - _rowdot(eh, V) * V - lam * U

        eta, h_eta = _truncated_cg(grad, hess, delta, max_inner=min(n * p, 1000))
        Vn = _normalize_rows(V + eta)
        MVn = M @ Vn
        fn = const + float(np.sum(MVn * Vn))
        gain = fn - f
        predicted = -(float(np.sum(grad * eta)) + 0.5 * float(np.sum(eta * h_eta)))
        rho = gain / predicted if predicted > 0 else (1.0 if gain >= 0 else -1.0)
        step = float(np.linalg.norm(eta))
        if rho < 0.25:
            delta *= 0.25
        elif rho > 0.75 and step >= 0.99 * delta:
            delta = min(2 * delta, delta_max)
        if rho > 0.1:
            V, MV, f = Vn, MVn, fn
        if trace is not None:
            trace(it, f, gn)
    return V, f, gn, it


def _truncated_cg(grad, hess, delta, max_inner, kappa=0.1):
    """Steihaug-Toint CG for min <grad, eta> + 1/2 <eta, H eta> s.t. |eta| <= delta."""
    eta = np.zeros_like(grad)
    h_eta = np.zeros_like(grad)
    r = grad.copy()
    d = -r
    rr = float(np.sum(r * r))
    r0 = math.sqrt(rr)
    e_e, e_d, d_d = 0.0, 0.0, rr
    for _ in range(max_inner):
        hd = hess(d)
        d_hd = float(np.sum(d * hd))
        alpha = rr / d_hd if d_hd > 0 else math.inf
        e_e_next = e_e + 2 * alpha * e_d + alpha * alpha * d_d
        if d_hd <= 0 or e_e_next >= delta * delta:
            tau = (-e_d + math.sqrt(e_d * e_d + d_d * (delta * delta - e_e))) / d_d
            return eta + tau * d, h_eta + tau * hd
        eta = eta + alpha * d
        h_eta = h_eta + alpha * hd
        e_e = e_e_next
        r = r + alpha * hd
        rr_next = float(np.sum(r * r))
        if math.sqrt(rr_next) <= r0 * min(r0, kappa):
            break
        d = -r + (rr_next / rr) * d
        rr = rr_next
        e_d = float(np.sum(eta * d))
        d_d = float(np.sum(d * d))
    return eta, h_eta


def solve_relaxation(instance: WeightedInstance, config: RelaxConfig = RelaxConfig()) -> VectorSolution:
    """Maximize the vector objective over unit vectors; best of ``config.restarts``."""
    m1 = instance.m1
    dim = config.dim or default_dim(m1)
    dim = max(1, min(dim, m1 + 1))
    M, const = _quadratic_form(instance)

    def trace(it, f, gn):
        if it % 10 == 0:
            log.debug("iter %d objective %.12g grad %.3e", it, f, gn)

    def run(r: int) -> VectorSolution:
        rng = np.random.default_rng([config.seed, STREAM_RESTART, r])
        V0 = _normalize_rows(rng.standard_normal((m1 + 1, dim)))
        V, f, gn, it = _trust_region(M, const, V0, config.tolerance, config.max_iters, trace)
        return VectorSolution(dim, V[0].copy(), V[1:].copy(), f, it, gn, r, gn < config.tolerance)

    restarts = range(max(1, config.restarts))
    if config.jobs > 1:
        with ThreadPoolExecutor(config.jobs) as ex:
            runs = list(ex.map(run, restarts))
    else:
        runs = [run(r) for r in restarts]
    converged = [s for s in runs if s.converged]
    pool = converged or runs
    best = max(pool, key=lambda s: (s.objective, -s.restart))
    log.info("relaxation: m1=%d dim=%d objective=%.12g iters=%d grad=%.2e",
             m1, dim, best.objective, best.iterations, best.grad_norm)
    if not converged:
        raise RelaxationError(
            f"relaxation did not reach gradient norm {config.tolerance:g} "
            f"within {config.max_iters} iterations (best {best.grad_norm:.3e})",
            best,
        )
    return best


# -- rounding ------------------------------------------------------------------


@dataclass(frozen=True)
class Assignment:
    values: tuple[bool, ...]
    objective: float
    cut: int = -1

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


def _clause_arrays(instance: WeightedInstance):
    cl = instance.clauses
    a = np.array([c.a.var for c in cl], dtype=np.intp)
    b = np.array([c.b.var for c in cl], dtype=np.intp)
    na = np.array([c.a.negated for c in cl], dtype=bool)
    nb = np.array([c.b.negated for c in cl], dtype=bool)
    w = np.array([c.weight for c in cl], dtype=float)
    return a, b, na, nb, w


def _batch_objective(instance: WeightedInstance, X: np.ndarray) -> np.ndarray:
    """Satisfied weight for each row of the boolean matrix ``X``."""
    if not instance.clauses:
        return np.zeros(len(X))
    a, b, na, nb, w = _clause_arrays(instance)
    sat = (X[:, a] != na) | (X[:, b] != nb)
    # row-wise reduction: result for a row does not depend on the batch
    return np.sum(sat * w, axis=1)


def rotate(v0: np.ndarray, v: np.ndarray, gamma: float) -> np.ndarray:
    """Pull each ``v_k`` toward whichever of ``+-v0`` is nearer."""
    if gamma == 0:
        return v
    side = np.where(v @ v0 >= 0, 1.0, -1.0)[:, None]
    out = (1 - gamma) * v + gamma * side * v0[None, :]
    norms = np.linalg.norm(out, axis=1, keepdims=True)
    if np.any(norms < 1e-12):
        raise ValueError("rotation produced a zero vector")
    return out / norms


def cut_normal(seed: int, index: int, dim: int, v0: np.ndarray, skew: float = 0.0) -> np.ndarray:
    r = np.random.default_rng([seed, STREAM_CUT, index]).standard_normal(dim)
    if skew:
        r = r - skew * (r @ v0) * v0
    return r


def round_hyperplane(
    solution: VectorSolution,
    instance: WeightedInstance,
    n_cuts: int = 200,
    seed: int = 0,
    rotation: float = 0.0,
    skew: float = 0.0,
    jobs: int = 1,
) -> Assignment:
    """Best assignment over ``n_cuts`` random hyperplanes through the origin.

    ``x_k`` is true when ``v_k`` falls on the same side as ``v0``.  Variables
    carrying no clause weight are left true (initial direction).
    """
    if n_cuts < 1:
        raise ValueError("n_cuts must be >= 1")
    if not 0.0 <= rotation <= 1.0 or not 0.0 <= skew <= 1.0:
        raise ValueError("rotation and skew must lie in [0, 1]")
    m1 = instance.m1
    if m1 == 0:
        return Assignment((), objective_value(instance, ()), 0)
    v0 = solution.v0
    v = rotate(v0, solution.v, rotation)
    free = instance.weightless_vars()

    def chunk(indices: range) -> tuple[np.ndarray, np.ndarray]:
        R = np.stack([cut_normal(seed, i, solution.dim, v0, skew) for i in indices])
        side0 = (R @ v0 >= 0)[:, None]
        X = (v @ R.T >= 0).T == side0
        X[:, free] = True
        return _batch_objective(instance, X), X

    bounds = np.linspace(0, n_cuts, max(1, min(jobs, n_cuts)) + 1).astype(int)
    parts = [range(lo, hi) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
    if jobs > 1 and len(parts) > 1:
        with ThreadPoolExecutor(jobs) as ex:
            results = list(ex.map(chunk, parts))
    else:
        results = [chunk(p) for p in parts]
    obj = np.concatenate([r[0] for r in results])
    X = np.concatenate([r[1] for r in results])
    # near-ties go to the lowest cut index
    cut = int(np.flatnonzero(obj >= obj.max() - 1e-12)[0])
    x = X[cut]
    values = tuple(bool(t) for t in x)
    return Assignment(values, objective_value(instance, values), cut)


def brute_force_opt(instance: WeightedInstance) -> Assignment:
    """Exact optimum by enumeration; ties go to the lexicographically smallest
    assignment (False < True, variable 0 most significant)."""
    m1 = instance.m1
    if m1 > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force refused for {m1} > {BRUTE_FORCE_LIMIT} variables")
    idx = np.arange(1 << m1, dtype=np.int64)
    shifts = np.arange(m1 - 1, -1, -1, dtype=np.int64)
    X = ((idx[:, None] >> shifts[None, :]) & 1).astype(bool)
    obj = _batch_objective(instance, X)
    best = float(obj.max())
    k = int(np.flatnonzero(obj >= best - 1e-12)[0])
    values = tuple(bool(t) for t in X[k])
    return Assignment(values, objective_value(instance, values))


# -- text format ---------------------------------------------------------------


def dump_wcnf(instance: WeightedInstance) -> str:
    """Extended DIMACS: decimal weights, 1-link clauses as unit clauses."""
    lines = ["c torsdp weighted max2sat", f"c alpha {instance.alpha!r}"]
    for i in range(instance.m1):
        if i in instance.degree_pairs:
            dm, dp = instance.degree_pairs[i]
            lines.append(f"c deg {i + 1} {dm} {dp}")
    lines.append(f"p wcnf {instance.m1} {len(instance.clauses)}")
    for a, b, w in instance.clauses:
        lits = f"{a.dimacs()}" if a == b else f"{a.dimacs()} {b.dimacs()}"
        lines.append(f"{w!r} {lits} 0")
    return "\n".join(lines) + "\n"


def load_wcnf(text: str) -> WeightedInstance:
    alpha = 1.0
    degrees: dict[int, tuple[int, int]] = {}
    m1 = None
    clauses = []

    def lit(tok: int) -> Literal:
        if tok == 0 or m1 is None or abs(tok) > m1:
            raise ValueError(f"literal {tok} out of range")
        return Literal(abs(tok) - 1, tok < 0)

    for raw in text.splitlines():
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "c":
            if len(parts) >= 3 and parts[1] == "alpha":
                alpha = float(parts[2])
            elif len(parts) == 5 and parts[1] == "deg":
                degrees[int(parts[2]) - 1] = (int(parts[3]), int(parts[4]))
            continue
        if parts[0] == "p":
            if len(parts) < 4 or parts[1] != "wcnf":
                raise ValueError(f"bad header: {raw!r}")
            m1 = int(parts[2])
            continue
        if parts[-1] != "0" or len(parts) not in (3, 4):
            raise ValueError(f"bad clause line: {raw!r}")
        w = float(parts[0])
        if w < 0:
            raise ValueError("negative clause weight")
        ls = [lit(int(t)) for t in parts[1:-1]]
        a = ls[0]
        b = ls[1] if len(ls) == 2 else ls[0]
        clauses.append(WeightedClause(a, b, w))
    if m1 is None:
        raise ValueError("missing 'p wcnf' header")
    return WeightedInstance(m1=m1, clauses=tuple(clauses), alpha=alpha, degree_pairs=degrees)
