"""``greenfb`` command-line entry point.

Machine-readable results go to standard output as a single JSON object; logs
and errors go to standard error. Exit status is 0 on success, 1 on a runtime
error or a failed ``reproduce`` criterion, and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from .cluster import KMeansConfig, embed_graph, spherical_kmeans
from .communities import (Cover, read_cover, read_partition, write_cover,
                          write_partition)
from .embed import DEFAULT_TAU, save_embedding
from .generators import (DcsbmConfig, GaussPartitionConfig, OverlapPpmConfig, gen_dcsbm,
                         gen_gauss_partition, gen_overlap_ppm)
from .graph import read_edge_list, write_edge_list
from .markov import DENSE_CAP, SizeCapError
from .metrics import disjoint_report, overlap_report, q_dir
from .overlap import OverlapParams, compute_thresholds, expand_overlap

log = logging.getLogger("greenfb")

DETECT_DEFAULTS = {"alpha": 0.95, "T": 8, "lam": 0.5}
OVERLAP_DEFAULTS = {"alpha": 0.90, "T": 10, "lam": 0.5}


class UsageError(Exception):
    """Bad flag combination detected after argument parsing."""


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _round(d: dict, places: int = 6) -> dict:
    return {k: round(v, places) if isinstance(v, float) else v for k, v in d.items()}


def _int_list(text: str) -> list[int]:
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


# ---------------------------------------------------------------------------
# subcommands

def cmd_generate(args) -> int:
    if args.model == "gauss":
        g, truth = gen_gauss_partition(GaussPartitionConfig(
            args.n, args.k, args.avg_deg, args.mu, hetero=args.hetero,
            min_size=args.min_size, seed=args.seed))
        primary = None
    elif args.model == "dcsbm":
        g, truth = gen_dcsbm(DcsbmConfig(args.n, args.k, args.avg_deg, args.mu,
                                         min_size=args.min_size, seed=args.seed))
        primary = None
    else:
        o_n = math.floor(args.overlap_frac * args.n + 1e-9)
        g, truth, primary = gen_overlap_ppm(OverlapPpmConfig(
            args.n, args.k, args.avg_deg, args.mu, o_n=o_n, o_m=args.memberships,
            seed=args.seed))

    stem = f"{args.model}-n{args.n}-k{args.k}-s{args.seed}"
    edges_out = args.edges_out or f"{stem}.edges"
    truth_out = args.truth_out or f"{stem}.truth"
    write_edge_list(g, edges_out)
    if isinstance(truth, Cover):
        write_cover(truth, truth_out)
    else:
        write_partition(truth, truth_out)
    summary = {"model": args.model, "n": g.n, "edges": g.num_edges,
               "mean_out_degree": round(g.num_edges / g.n, 6), "seed": args.seed,
               "edges_out": edges_out, "truth_out": truth_out}
    if primary is not None:
        primary_out = args.primary_out or f"{stem}.primary"
        write_partition(primary, primary_out)
        summary["overlapping_vertices"] = len(truth.overlapping_vertices())
        summary["primary_out"] = primary_out
    _emit(summary)
    return 0


def _kmeans_cfg(args, K: int) -> KMeansConfig:
    return KMeansConfig(K=K, max_iters=args.max_iters, n_init=args.n_init, seed=args.seed,
                        tau=args.tau, workers=args.workers)


def cmd_detect(args) -> int:
    if args.k is None and args.sweep_k is None:
        raise UsageError("detect needs --k or --sweep-k")
    if args.k is not None and args.sweep_k is not None:
        raise UsageError("--k and --sweep-k are mutually exclusive")
    log.info("detect parameters: alpha=%g T=%d lambda=%g tau=%g", args.alpha, args.T,
             args.lam, args.tau)
    g = read_edge_list(args.edges, n=args.n)
    e = embed_graph(g, args.alpha, args.T, args.lam, args.tau, args.workers)
    if args.save_embedding:
        save_embedding(e, args.save_embedding)

    if args.sweep_k is None:
        p = spherical_kmeans(e.coords, _kmeans_cfg(args, args.k))
        summary = {"n": g.n, "k": args.k,
                   "sizes": [int(s) for s in p.sizes()],
                   "degenerate_vertices": int(e.degenerate_flags.sum())}
    else:
        sweep, best, best_p = [], None, None
        for K in args.sweep_k:
            p = spherical_kmeans(e.coords, _kmeans_cfg(args, K))
            q = q_dir(g, p)
            sweep.append({"k": K, "q_dir": round(q, 6)})
            # ties go to the first K listed
            if best is None or q > best[1]:
                best, best_p = (K, q), p
        p = best_p
        summary = {"n": g.n, "sweep": sweep, "best_k": best[0]}
    if args.out:
        write_partition(p, args.out)
        summary["out"] = args.out
    _emit(summary)
    return 0


def cmd_overlap(args) -> int:
    log.info("overlap parameters: alpha=%g T=%d lambda=%g q=%g delta=%g eta=%g "
             "theta_min=%g epsilon=%g", args.alpha, args.T, args.lam, args.q, args.delta,
             args.eta, args.theta_min, args.epsilon)
    g = read_edge_list(args.edges, n=args.n)
    p = read_partition(args.partition)
    if p.n != g.n:
        raise ValueError(f"partition covers {p.n} vertices but the graph has {g.n}")
    empty = [j for j, s in enumerate(p.sizes()) if s == 0]
    if empty:
        raise ValueError(f"communities {empty} of the partition have no members")
    params = OverlapParams(args.q, args.delta, args.eta, args.theta_min, args.epsilon)
    e = embed_graph(g, args.alpha, args.T, args.lam, args.tau, args.workers)
    cover = expand_overlap(p, e, params)
    out = args.out or "overlap.cover"
    write_cover(cover, out)
    _emit({"n": g.n, "k": p.K,
           "thresholds": [round(float(t), 6) for t in compute_thresholds(p, e, params)],
           "overlapping_vertices": len(cover.overlapping_vertices()),
           "added_memberships": sum(len(m) for m in cover.memberships) - g.n,
           "out": out})
    return 0


def _has_tab(path) -> bool:
    with open(path, encoding="utf-8") as fh:
        return any("\t" in line for line in fh if not line.startswith("#"))


def cmd_eval(args) -> int:
    g = read_edge_list(args.edges, n=args.n) if args.edges else None
    if args.mode == "disjoint":
        for path in (args.pred, args.truth):
            if not _has_tab(path):
                raise ValueError(f"{path}: not a partition file (expected 'vertex<TAB>community')")
        pred, truth = read_partition(args.pred), read_partition(args.truth)
        if pred.n != truth.n:
            raise ValueError(f"prediction has {pred.n} vertices, truth has {truth.n}")
        if g is not None and g.n != pred.n:
            raise ValueError(f"partitions have {pred.n} vertices, graph has {g.n}")
        report = disjoint_report(pred, truth, g).as_dict()
    else:
        for path in (args.pred, args.truth):
            if _has_tab(path):
                raise ValueError(f"{path}: looks like a partition file; overlap mode "
                                 "expects one community per line")
        pred, truth = read_cover(args.pred), read_cover(args.truth)
        n = g.n if g is not None else (args.n or max(pred.n, truth.n))
        report = overlap_report(read_cover(args.pred, n), read_cover(args.truth, n)).as_dict()
    _emit(_round(report))
    return 0


def cmd_diagnose_d0(args) -> int:
    from .reproduce import diagnose_d0
    if args.n > DENSE_CAP:
        raise SizeCapError(f"diagnose-d0 needs dense solves; n = {args.n} exceeds {DENSE_CAP}")
    rows = []
    for s in range(args.seed, args.seed + args.repeats):
        g, truth = gen_gauss_partition(GaussPartitionConfig(
            args.n, args.k, args.avg_deg, args.mu, hetero=args.hetero, seed=s))
        rows.append(diagnose_d0(g, truth, args.k, seed=s, workers=args.workers))
    mean = {k: round(float(np.mean([r[k] for r in rows])), 6) for k in rows[0]}
    _emit({"n": args.n, "k": args.k, "avg_deg": args.avg_deg, "mu": args.mu,
           "seeds": list(range(args.seed, args.seed + args.repeats)), "nmi": mean})
    return 0


def cmd_reproduce(args) -> int:
    from .reproduce import run_all
    results = run_all(args.only, seeds=args.seeds, workers=args.workers)
    print(f"desk-scale acceptance suite ({args.seeds} seeds per benchmark cell)")
    for r in results:
        print(r.line(), flush=True)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump({"seeds": args.seeds,
                       "criteria": [{"number": r.number, "name": r.name, "passed": r.passed,
                                     "detail": r.detail} for r in results]},
                      fh, indent=2, default=float)
            fh.write("\n")
    return 0 if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------
# argument parsing

def _add_embedding_flags(p, defaults):
    p.add_argument("--alpha", type=float, default=defaults["alpha"],
                   help="teleportation parameter (default %(default)s)")
    p.add_argument("--T", type=_positive_int, default=defaults["T"],
                   help="truncation length of the diffusive profile (default %(default)s)")
    p.add_argument("--lam", type=float, default=defaults["lam"],
                   help="forward weight lambda in [0, 1] (default %(default)s)")
    p.add_argument("--tau", type=float, default=DEFAULT_TAU,
                   help="norm clamp (default %(default)s)")


def _add_graph_flags(p):
    p.add_argument("--edges", required=True, help="edge list file")
    p.add_argument("--n", type=_positive_int, default=None,
                   help="vertex count (default: from the file header or max id + 1)")


def build_parser() -> argparse.ArgumentParser:
    default_workers = os.cpu_count() or 1
    parser = argparse.ArgumentParser(prog="greenfb", description=(
        "Directed community detection with forward-backward Green coordinates."))
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    parser.add_argument("--quiet", action="store_true", help="warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
        p.add_argument("--workers", type=_positive_int, default=default_workers,
                       help="worker threads; results do not depend on it")

    p = sub.add_parser("generate", help="sample a synthetic benchmark graph")
    p.add_argument("--model", choices=["gauss", "dcsbm", "overlap-ppm"], required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--avg-deg", type=float, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--hetero", type=float, default=0.25, help="gauss size spread (default 0.25)")
    p.add_argument("--min-size", type=_positive_int, default=3)
    p.add_argument("--overlap-frac", type=float, default=0.15)
    p.add_argument("--memberships", type=int, default=2)
    p.add_argument("--edges-out")
    p.add_argument("--truth-out")
    p.add_argument("--primary-out", help="overlap-ppm only: primary-community partition")
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("detect", help="disjoint communities by spherical K-means")
    _add_graph_flags(p)
    p.add_argument("--k", type=_positive_int)
    p.add_argument("--sweep-k", type=_int_list, help="comma-separated K grid, best Q_dir wins")
    _add_embedding_flags(p, DETECT_DEFAULTS)
    p.add_argument("--n-init", type=_positive_int, default=8)
    p.add_argument("--max-iters", type=_positive_int, default=100)
    p.add_argument("--out", help="partition output file")
    p.add_argument("--save-embedding", help="binary dump of the coordinates")
    common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("overlap", help="expand a partition into an overlapping cover")
    _add_graph_flags(p)
    p.add_argument("--partition", required=True, help="initial partition file")
    _add_embedding_flags(p, OVERLAP_DEFAULTS)
    defaults = OverlapParams()
    p.add_argument("--q", type=float, default=defaults.q)
    p.add_argument("--delta", type=float, default=defaults.delta)
    p.add_argument("--eta", type=float, default=defaults.eta)
    p.add_argument("--theta-min", type=float, default=defaults.theta_min)
    p.add_argument("--epsilon", type=float, default=defaults.epsilon)
    p.add_argument("--out", help="cover output file (default overlap.cover)")
    common(p)
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("eval", help="score a prediction against ground truth")
    p.add_argument("--mode", choices=["disjoint", "overlap"], required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--edges", help="edge list, enables Q_dir in disjoint mode")
    p.add_argument("--n", type=_positive_int, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("diagnose-d0", help="hitting-time versus Green coordinate contrast")
    p.add_argument("--n", type=_positive_int, default=500)
    p.add_argument("--k", type=_positive_int, default=8)
    p.add_argument("--avg-deg", type=float, default=10.0)
    p.add_argument("--mu", type=float, default=0.3)
    p.add_argument("--hetero", type=float, default=0.25)
    p.add_argument("--repeats", type=_positive_int, default=1,
                   help="number of consecutive seeds to average (default 1)")
    common(p)
    p.set_defaults(func=cmd_diagnose_d0)

    p = sub.add_parser("reproduce", help="run the desk-scale acceptance suite")
    p.add_argument("--only", type=_int_list, help="comma-separated criterion numbers")
    p.add_argument("--seeds", type=_positive_int, default=3)
    p.add_argument("--report", help="JSON report file")
    common(p)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, stream=sys.stderr, force=True,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (ValueError, OSError, RuntimeError) as exc:
        err = {"error": type(exc).__name__, "command": args.command, "message": str(exc)}
        sys.stderr.write(json.dumps(err) + "\n")
        return 1
    return 0  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
