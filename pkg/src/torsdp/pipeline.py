"""End-to-end inference: paths -> siblings -> gradient orientation -> clauses
-> stripping -> weighted MAX2SAT -> relaxation -> rounding -> labels."""

from __future__ import annotations

import io
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Mapping, Sequence

from . import relax
from .ingest import PathSet
from .ranking import agreement, validity
from .relmap import FIXED, GRADIENT, PROV_SIBLING, ROUNDED, RelationshipMap
from .siblings import OrgTable, infer_siblings
from .tor2sat import (
    build_clauses,
    build_implication_graph,
    orient_by_gradient,
    solve_2sat,
    strip_nonconflict,
)

log = logging.getLogger(__name__)

ORACLE_MAX_VARS = 12


@dataclass(frozen=True)
class RunConfig:
    alpha: float = 0.5
    seed: int = 0
    n_cuts: int = 200
    rotation: float = 0.0
    skew: float = 0.0
    restarts: int = 3
    dim: int | None = None
    tolerance: float = 1e-7
    max_iters: int = 5000
    jobs: int = 1

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.n_cuts < 1 or self.restarts < 1:
            raise ValueError("n_cuts and restarts must be positive")

    def relax_config(self) -> relax.RelaxConfig:
        return relax.RelaxConfig(
            tolerance=self.tolerance,
            max_iters=self.max_iters,
            restarts=self.restarts,
            dim=self.dim,
            seed=self.seed,
            jobs=self.jobs,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        del d["jobs"]  # output must not depend on parallelism
        return d


@dataclass
class RunReport:
    config: dict
    counts: dict
    validity: dict
    objectives: dict
    solver: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    def to_dict(self, timing: bool = False) -> dict:
        d = asdict(self)
        if not timing:
            del d["timing"]
        return d


@dataclass
class InferResult:
    relmap: RelationshipMap
    report: RunReport


def infer(
    paths: PathSet,
    orgs: Mapping[int, str] | OrgTable | None = None,
    config: RunConfig = RunConfig(),
) -> InferResult:
    if not len(paths):
        raise ValueError("no paths")
    clock = time.perf_counter
    timing = {}
    t0 = clock()
    graph = paths.graph
    siblings = infer_siblings(orgs, graph)
    orientation = orient_by_gradient(graph, siblings)
    cs = build_clauses(paths.pairs, orientation, siblings)
    constrained = {lit.var for c in cs.clauses for lit in c}
    timing["clauses"] = clock() - t0

    t0 = clock()
    strip = strip_nonconflict(cs)
    residual = strip.residual
    impl = build_implication_graph(residual.clauses, residual.n_vars)
    sat2 = solve_2sat(impl)
    timing["strip"] = clock() - t0

    deg = graph.degree
    degree_pairs = {}
    for i, e in enumerate(residual.edges):
        tail, head = residual.orientation[e]
        degree_pairs[i] = (deg[tail], deg[head])
    instance = relax.build_weighted(residual.clauses, degree_pairs, config.alpha,
                                    n_vars=residual.n_vars)

    objectives: dict = {"gradient": relax.objective_value(instance, [True] * instance.m1)}
    solver: dict = {}
    values: tuple[bool, ...] = ()
    free: set[int] = set()
    t0 = clock()
    if instance.m1:
        solution = relax.solve_relaxation(instance, config.relax_config())
        assignment = relax.round_hyperplane(
            solution, instance, n_cuts=config.n_cuts, seed=config.seed,
            rotation=config.rotation, skew=config.skew, jobs=config.jobs,
        )
        values = assignment.values
        free = set(instance.weightless_vars())
        objectives["relaxation"] = solution.objective
        objectives["rounded"] = assignment.objective
        solver = {
            "dim": solution.dim,
            "iterations": solution.iterations,
            "grad_norm": solution.grad_norm,
            "restart": solution.restart,
            "cut": assignment.cut,
        }
        if instance.m1 <= ORACLE_MAX_VARS:
            opt = relax.brute_force_opt(instance)
            objectives["oracle_opt"] = opt.objective
            objectives["oracle_match"] = abs(opt.objective - assignment.objective) <= 1e-9
            if not objectives["oracle_match"]:
                log.warning("rounding missed the residual optimum (%.12g < %.12g)",
                            assignment.objective, opt.objective)
    timing["relax"] = clock() - t0

    directed, provenance = {}, {}
    for e in siblings:
        provenance[e] = PROV_SIBLING
    for i, e in enumerate(cs.edges):
        directed[e] = orientation[e]
        provenance[e] = FIXED if i in constrained else GRADIENT
    for j, e in enumerate(residual.edges):
        directed[e] = residual.direction(j, values[j])
        provenance[e] = GRADIENT if j in free else ROUNDED
    relmap = RelationshipMap(directed, frozenset(siblings), provenance)

    vr = validity(paths.paths, relmap)
    res_nodes = {a for e in residual.edges for a in e}
    counts = {
        "paths": len(paths),
        "paths_with_pairs": vr.total,
        "ases": len(graph.nodes),
        "links": len(graph.edges),
        "unique_pairs": len(paths.pairs),
        "siblings": len(siblings),
        "variables": cs.n_vars,
        "clauses": len(cs.clauses),
        "fixed_by_stripping": sum(p == FIXED for p in provenance.values()),
        "gradient_default": sum(p == GRADIENT for p in provenance.values()),
        "rounded": sum(p == ROUNDED for p in provenance.values()),
        "strip_rounds": strip.rounds,
        "residual_ases": len(res_nodes),
        "residual_links": residual.n_vars,
        "residual_fraction": residual.n_vars / len(graph.edges),
        "m1": instance.m1,
        "m2": instance.m2,
        "residual_2sat_vertices": 2 * impl.n_vars,
        "residual_2sat_arcs": impl.n_arcs,
        "residual_2sat_satisfiable": sat2.satisfiable,
        "rejected_loops": paths.rejected_loops,
        "rejected_lines": paths.rejected_tokens,
    }
    report = RunReport(
        config=config.to_dict(),
        counts=counts,
        validity=vr.to_dict(),
        objectives=objectives,
        solver=solver,
        warnings=list(instance.warnings),
        timing=timing,
    )
    return InferResult(relmap, report)


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    valid_pct: float
    agree_alpha0_pct: float
    agree_alpha1_pct: float


SWEEP_HEADER = "alpha,valid_pct,agree_alpha0_pct,agree_alpha1_pct"


def alpha_sweep(
    paths: PathSet,
    orgs: Mapping[int, str] | OrgTable | None,
    alphas: Sequence[float],
    config: RunConfig = RunConfig(),
) -> list[SweepRow]:
    """Infer at every alpha and compare each result with the alpha=0 and alpha=1 runs."""
    points = sorted(set(alphas) | {0.0, 1.0})

    def run(a: float) -> RelationshipMap:
        return infer(paths, orgs, replace(config, alpha=a, jobs=1)).relmap

    if config.jobs > 1:
        with ThreadPoolExecutor(config.jobs) as ex:
            maps = dict(zip(points, ex.map(run, points)))
    else:
        maps = {a: run(a) for a in points}
    rows = []
    for a in alphas:
        m = maps[a]
        rows.append(SweepRow(
            alpha=a,
            valid_pct=100.0 * validity(paths.paths, m).fraction,
            agree_alpha0_pct=100.0 * agreement(m, maps[0.0]),
            agree_alpha1_pct=100.0 * agreement(m, maps[1.0]),
        ))
    return rows


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    buf.write(SWEEP_HEADER + "\n")
    for r in rows:
        buf.write(f"{r.alpha:g},{r.valid_pct:.4f},{r.agree_alpha0_pct:.4f},{r.agree_alpha1_pct:.4f}\n")
    return buf.getvalue()

