"""Command-line interface.

Exit status: 0 success, 2 bad input, 3 relaxation did not converge.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from . import relax
from .ingest import NoPathsError, PathSet, parse_paths
from .pipeline import RunConfig, alpha_sweep, infer, sweep_csv
from .ranking import rank, ranking_csv, validity
from .relmap import RelationshipMap
from .siblings import infer_siblings, load_orgs
from .synth import generate_hierarchy, generate_paths, paths_text
from .tor2sat import build_clauses, dump_dimacs, orient_by_gradient

log = logging.getLogger("torsdp")

EXIT_INPUT = 2
EXIT_SOLVER = 3

FORMATS = """\
file formats:
  paths      one AS path per line, whitespace-separated decimal ASNs; '#' starts
             a comment.  Prepending is collapsed, loop paths are dropped.
  whois      'ASN<TAB>OrgName' per line; the last line for an ASN wins.
  rel.json   {"edges": [{"a": 701, "b": 1, "rel": "c2p"|"sibling", "prov": ...}]}
             with c2p meaning a is a customer of b.  prov is one of
             fixed_by_stripping, rounded, gradient_default, sibling.
  report     JSON: resolved config, counts, validity, objectives, solver stats.
  sweep.csv  alpha,valid_pct,agree_alpha0_pct,agree_alpha1_pct
  rank.csv   asn,degree,reach,level,depth,width,is_leaf
  wcnf       'p wcnf <vars> <clauses>' then '<weight> <lit> [<lit>] 0' lines;
             'c alpha <a>' and 'c deg <var> <d-> <d+>' comments are optional.
"""


class InputError(Exception):
    pass


def write_atomic(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load_paths(path: str) -> PathSet:
    try:
        return parse_paths(_read(path))
    except NoPathsError:
        raise InputError(f"{path}: no paths") from None


def _load_orgs(path: str | None):
    if not path:
        return None
    return load_orgs(_read(path))


def _load_relmap(path: str) -> RelationshipMap:
    try:
        return RelationshipMap.from_json(_read(path))
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: bad relationship file ({exc})") from None


def _alphas(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad alpha list {text!r}") from None
    if not values or any(not 0 <= a <= 1 for a in values):
        raise argparse.ArgumentTypeError("alphas must be comma-separated values in [0, 1]")
    return values


def _unit(text: str) -> float:
    v = float(text)
    if not 0 <= v <= 1:
        raise argparse.ArgumentTypeError(f"{text} is outside [0, 1]")
    return v


def _solver_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver")
    g.add_argument("--seed", type=int, default=0, help="master seed for restarts and cuts (default 0)")
    g.add_argument("--cuts", type=int, default=200, help="random hyperplanes per rounding (default 200)")
    g.add_argument("--rotation", type=_unit, default=0.0,
                   help="pre-rounding pull of each vector toward +-v0, in [0,1] (default 0)")
    g.add_argument("--skew", type=_unit, default=0.0,
                   help="shrink hyperplane normals' v0 component by this fraction (default 0)")
    g.add_argument("--restarts", type=int, default=3, help="relaxation restarts (default 3)")
    g.add_argument("--dim", type=int, default=None,
                   help="vector dimension (default min(m1+1, ceil(sqrt(2*m1))+1))")
    g.add_argument("--tolerance", type=float, default=1e-7,
                   help="relaxation gradient-norm tolerance (default 1e-7)")
    g.add_argument("--max-iters", type=int, default=5000,
                   help="relaxation iteration cap (default 5000)")
    g.add_argument("--jobs", type=int, default=1,
                   help="worker threads for restarts, cuts and sweep points; output does not depend on it")


def _config(args, alpha: float) -> RunConfig:
    try:
        return RunConfig(alpha=alpha, seed=args.seed, n_cuts=args.cuts, rotation=args.rotation,
                         skew=args.skew, restarts=args.restarts, dim=args.dim,
                         tolerance=args.tolerance, max_iters=args.max_iters, jobs=args.jobs)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_infer(args) -> int:
    paths = _load_paths(args.paths)
    orgs = _load_orgs(args.whois)
    config = _config(args, args.alpha)
    result = infer(paths, orgs, config)
    report = result.report.to_dict()
    report["inputs"] = {"paths": args.paths, "whois": args.whois}
    if args.timing:
        print(_dump(result.report.timing), file=sys.stderr, end="")
    report_path = args.report or str(Path(args.out).with_name("report.json"))
    write_atomic(args.out, result.relmap.to_json())
    write_atomic(report_path, _dump(report))
    if args.dump_clauses:
        siblings = infer_siblings(orgs, paths.graph)
        cs = build_clauses(paths.pairs, orient_by_gradient(paths.graph, siblings), siblings)
        write_atomic(args.dump_clauses, dump_dimacs(cs))
    v = result.report.validity
    log.info("%d links labeled; %.4f%% of %d paths valid", len(result.relmap), v["valid_pct"], v["total"])
    return 0


def cmd_sweep(args) -> int:
    paths = _load_paths(args.paths)
    orgs = _load_orgs(args.whois)
    config = _config(args, 0.0)
    rows = alpha_sweep(paths, orgs, args.alphas, config)
    write_atomic(args.out, sweep_csv(rows))
    if args.report:
        cfg = config.to_dict()
        del cfg["alpha"]
        write_atomic(args.report, _dump({"config": cfg, "alphas": args.alphas,
                                         "inputs": {"paths": args.paths, "whois": args.whois}}))
    return 0


def cmd_rank(args) -> int:
    paths = _load_paths(args.paths)
    relmap = _load_relmap(args.rel)
    _check_cover(paths, relmap)
    hr = rank(relmap, paths.graph.nodes)
    write_atomic(args.out, ranking_csv(hr, paths.graph.degree))
    return 0


def cmd_validate(args) -> int:
    paths = _load_paths(args.paths)
    relmap = _load_relmap(args.rel)
    _check_cover(paths, relmap)
    vr = validity(paths.paths, relmap)
    text = _dump({"validity": vr.to_dict(), "inputs": {"paths": args.paths, "rel": args.rel}})
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _check_cover(paths: PathSet, relmap: RelationshipMap) -> None:
    missing = paths.graph.edges - relmap.edges()
    if missing:
        raise InputError(f"{len(missing)} links have no relationship, e.g. {sorted(missing)[0]}")


def cmd_gen_synth(args) -> int:
    h = generate_hierarchy(args.n_as, seed=args.seed)
    data = generate_paths(h, args.n_paths, noise=args.noise, seed=args.seed, leakers=args.leakers)
    write_atomic(args.out, paths_text(data.paths))
    if args.truth:
        write_atomic(args.truth, h.truth().to_json())
    if args.meta:
        write_atomic(args.meta, _dump({
            "tiers": [sorted(t) for t in h.tiers],
            "tier1": sorted(h.tier1),
            "leakers": data.leakers,
            "corrupted_paths": len(data.corrupted),
            "n_paths": len(data.paths),
            "seed": args.seed,
        }))
    return 0


def cmd_oracle(args) -> int:
    try:
        instance = relax.load_wcnf(_read(args.wcnf))
    except ValueError as exc:
        raise InputError(f"{args.wcnf}: {exc}") from None
    out = {"m1": instance.m1, "clauses": len(instance.clauses)}
    if instance.m1 <= relax.BRUTE_FORCE_LIMIT:
        opt = relax.brute_force_opt(instance)
        out["opt"] = opt.objective
        out["opt_assignment"] = [int(x) for x in opt.values]
    config = _config(args, 0.5).relax_config()
    sol = relax.solve_relaxation(instance, config)
    rounded = relax.round_hyperplane(sol, instance, args.cuts, args.seed, args.rotation, args.skew, args.jobs)
    out.update(relaxation=sol.objective, rounded=rounded.objective,
               rounded_assignment=[int(x) for x in rounded.values])
    if out.get("opt"):
        out["ratio"] = rounded.objective / out["opt"]
    text = _dump(out)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    parser = argparse.ArgumentParser(
        prog="torsdp", description="Infer AS relationships from BGP paths.",
        epilog=FORMATS, formatter_class=fmt)
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("infer", help="label every link", epilog=FORMATS, formatter_class=fmt,
                       description="Infer customer-provider and sibling links for one alpha.")
    p.add_argument("--paths", required=True, help="AS path file")
    p.add_argument("--whois", help="optional ASN<TAB>OrgName file for sibling detection")
    p.add_argument("--alpha", type=_unit, default=0.5,
                   help="weight of path validity against degree gradient, in [0,1] (default 0.5)")
    p.add_argument("--out", required=True, help="relationship JSON to write")
    p.add_argument("--report", help="run report JSON (default: report.json next to --out)")
    p.add_argument("--dump-clauses", metavar="FILE", help="also write the full 2SAT clause set as DIMACS CNF")
    p.add_argument("--timing", action="store_true", help="print stage timings to stderr")
    _solver_flags(p)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("sweep", help="infer over a grid of alpha values", epilog=FORMATS,
                       formatter_class=fmt)
    p.add_argument("--paths", required=True, help="AS path file")
    p.add_argument("--whois", help="optional ASN<TAB>OrgName file")
    p.add_argument("--alphas", type=_alphas, default=[0.0, 0.2, 0.5, 0.8, 1.0],
                   help="comma-separated alpha values (default 0,0.2,0.5,0.8,1)")
    p.add_argument("--out", required=True, help="sweep CSV to write")
    p.add_argument("--report", help="optional JSON echo of the resolved config")
    _solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rank", help="reachability ranking of ASs", epilog=FORMATS, formatter_class=fmt)
    p.add_argument("--paths", required=True, help="AS path file (for degrees and the AS set)")
    p.add_argument("--rel", required=True, help="relationship JSON")
    p.add_argument("--out", required=True, help="ranking CSV to write")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("validate", help="share of valley-free paths", epilog=FORMATS, formatter_class=fmt)
    p.add_argument("--paths", required=True, help="AS path file")
    p.add_argument("--rel", required=True, help="relationship JSON")
    p.add_argument("--out", help="validity JSON to write (default stdout)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("gen-synth", help="generate a synthetic hierarchy and paths",
                       epilog=FORMATS, formatter_class=fmt)
    p.add_argument("--n-as", type=int, default=200, help="number of ASs (default 200)")
    p.add_argument("--n-paths", type=int, default=10000, help="number of paths (default 10000)")
    p.add_argument("--noise", type=_unit, default=0.0, help="fraction of route-leak paths (default 0)")
    p.add_argument("--leakers", type=int, default=1, help="number of leaking ASs (default 1)")
    p.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    p.add_argument("--out", required=True, help="path file to write")
    p.add_argument("--truth", help="ground-truth relationship JSON to write")
    p.add_argument("--meta", help="JSON with tiers, tier-1 set and leakers")
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("oracle", help="brute force vs relaxation+rounding on a wcnf instance",
                       epilog=FORMATS, formatter_class=fmt)
    p.add_argument("--wcnf", required=True, help="weighted instance file")
    p.add_argument("--out", help="JSON result (default stdout)")
    _solver_flags(p)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except InputError as exc:
        print(f"torsdp: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except relax.RelaxationError as exc:
        print(f"torsdp: solver: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
