"""Command line interface: ``tripartite-trees <subcommand> ...``.

Exit codes: 0 success, 2 precondition failure, 3 inconclusive certificate,
4 embedding failure, 5 verification failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import instances
from .assignment import build_valid_assignment, ClusterAssignment
from .embedder import Embedding, embed, verify_embedding
from .errors import (
    AssignmentFailure,
    CapacityExceeded,
    NoTypicalVertex,
    PreconditionError,
    TreeRamseyError,
    WalkConditionViolated,
)
from .extremal import Certificate, certify_good_or_odd, witness_from_json
from .graph_core import Colour
from .io import graph_from_json, graph_to_json, load_graph, load_tree, read_json, write_json
from .pipeline import (
    EXIT_EMBED,
    EXIT_INCONCLUSIVE,
    EXIT_OK,
    EXIT_PRECONDITION,
    EXIT_VERIFY,
    planted_tree_size,
    resolve_params,
    run_pipeline,
)
from .regularity import Partition, equipartition
from .structures import max_connected_matching, max_fork_system
from .tree_tools import decompose, random_tree

log = logging.getLogger("tripartite_trees")


def _params(args) -> dict:
    raw = args.params
    if not raw:
        return {}
    if os.path.exists(raw):
        return json.loads(Path(raw).read_text())
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise PreconditionError(f"--params is neither a file nor JSON: {exc}") from None


def _emit(args, obj) -> None:
    write_json(obj, args.out)


# -- generators -----------------------------------------------------------------


def _generate(kind: str, recipe: dict, seed):
    """Build a host or tree from a generator recipe; returns a JSON-ready dict."""
    if kind == "random":
        G = instances.gen_random_colouring(int(recipe["n"]), float(recipe.get("p_green", 0.5)), seed)
        return {"graph": graph_to_json(G)}
    if kind == "sparse":
        G = instances.gen_sparse_host(int(recipe["n"]), float(recipe["p"]), seed, float(recipe.get("p_green", 0.5)))
        return {"graph": graph_to_json(G)}
    if kind == "pyramid":
        G, W = instances.gen_pyramid(int(recipe["n"]), float(recipe["eta"]), recipe.get("mode", "tunnel"),
                                     recipe.get("c", "G"), recipe.get("c2", "R"), seed, recipe.get("split"))
        return {"graph": graph_to_json(G), "witness": W.to_json()}
    if kind == "spider":
        G, W = instances.gen_spider(int(recipe["n"]), float(recipe["eta"]), recipe.get("profile", "small_core"),
                                    seed, recipe.get("c", "G"))
        return {"graph": graph_to_json(G), "witness": W.to_json()}
    if kind == "planted":
        template = instances.gen_odd_template(int(recipe.get("k", 6)), seed)
        G, part = instances.gen_planted_host(template, int(recipe["L"]), float(recipe.get("p", 1.0)), seed)
        return {"graph": graph_to_json(G), "partition": part.to_json(), "template": graph_to_json(template)}
    if kind == "tree":
        return random_tree(int(recipe["t"]), int(recipe.get("max_degree", 8)), seed).to_json()
    raise PreconditionError(f"unknown generator {kind!r}")


def _host_from_recipe(recipe: dict, seed):
    """In-memory host (graph, partition or None, witness or None) from a generator recipe."""
    kind = recipe.get("kind", "planted")
    if kind == "planted":
        template = instances.gen_odd_template(int(recipe.get("k", 6)), seed)
        G, part = instances.gen_planted_host(template, int(recipe["L"]), float(recipe.get("p", 1.0)), seed)
        return G, part, None
    data = _generate(kind, recipe, seed)
    return graph_from_json(data["graph"]), None, data.get("witness")


def cmd_gen(args) -> int:
    recipe = {k: v for k, v in vars(args).items() if k in GEN_KEYS and v is not None}
    _emit(args, _generate(args.kind, recipe, args.seed))
    return EXIT_OK


GEN_KEYS = ("n", "p", "p_green", "eta", "mode", "c", "c2", "profile", "split", "k", "L", "t", "max_degree")


# -- analysis, assignment, embedding --------------------------------------------


def cmd_analyze(args) -> int:
    G, extras = load_graph(args.graph)
    witness = read_json(args.witness) if args.witness else extras.get("witness")
    if isinstance(witness, dict) and "witness" in witness:
        witness = witness["witness"]
    W = witness_from_json(witness) if witness else None
    eta_prime = _params(args).get("eta_prime", args.eta_prime)
    result = certify_good_or_odd(G, eta_prime, W)
    _emit(args, result.to_json())
    if isinstance(result, Certificate):
        log.info("certificate %s in colour %s: achieved %s, thresholds %s", result.kind,
                 result.colour.code, result.achieved, result.thresholds)
        return EXIT_OK
    log.warning("inconclusive: %s; best %s", result.reason, result.best)
    return EXIT_INCONCLUSIVE


def cmd_assign(args) -> int:
    T = load_tree(args.tree)
    reduced, _ = load_graph(args.reduced)
    cert = Certificate.from_json(read_json(args.certificate))
    p = resolve_params(_params(args))
    D, A = build_valid_assignment(T, reduced, cert, p["mu"], p["eps"], args.cluster_size, p["cut_eps"],
                                  seed=args.seed, retries=int(p["retries"]))
    out = A.to_json()
    out["checks"] = A.checks
    _emit(args, out)
    return EXIT_OK


def _partition_for(args, host):
    if args.partition:
        data = read_json(args.partition)
        return Partition.from_json(data.get("partition", data))
    _, extras = load_graph(args.host)
    if "partition" in extras:
        return Partition.from_json(extras["partition"])
    return equipartition(host, args.k)


def cmd_embed(args) -> int:
    T = load_tree(args.tree)
    host, _ = load_graph(args.host)
    part = _partition_for(args, host)
    data = read_json(args.assignment)
    A = ClusterAssignment.from_json(data, part.k)
    p = resolve_params(_params(args))
    D = decompose(T, A.cut, 1)
    D.S = max(1, D.max_shrub_size())
    try:
        E = embed(T, D, A.h, host, part, args.colour, p["d"], p["eps"], p["mu"] / 2,
                  audit_samples=int(p["audit_samples"]), audit_eps=p["audit_eps"], seed=args.seed)
    except NoTypicalVertex as exc:
        log.error("%s", exc)
        _emit(args, {"error": str(exc), "state": exc.state})
        return EXIT_EMBED
    _emit(args, E.to_json())
    return EXIT_OK


def cmd_verify(args) -> int:
    T = load_tree(args.tree)
    host, _ = load_graph(args.host)
    E = Embedding.from_json(read_json(args.embedding))
    part = h = None
    if args.assignment:
        part = _partition_for(args, host)
        h = ClusterAssignment.from_json(read_json(args.assignment), part.k).h
    problems = verify_embedding(T, E, host, part, h)
    _emit(args, {"ok": not problems, "violations": problems})
    return EXIT_OK if not problems else EXIT_VERIFY


def cmd_oracle(args) -> int:
    G, _ = load_graph(args.graph)
    colour = Colour.parse(args.colour)
    if args.what == "matching":
        exact = instances.oracle_max_connected_matching(G, colour, args.odd)
        try:
            fast = max_connected_matching(G, colour, args.odd).size
        except TreeRamseyError:
            fast = 0
        out = {"oracle": exact, "finder": fast, "agree": exact == fast}
    elif args.what == "forks":
        rows = []
        for comp in G.components(colour):
            if comp.is_odd or len(comp.vertices) < 2:
                continue
            exact = instances.oracle_max_fork_system(G, colour, comp.vertices, args.ratio)
            fast = max_fork_system(G, colour, comp, args.ratio).size
            rows.append({"component": comp.index, "oracle": exact, "finder": fast})
        out = {"components": rows, "agree": all(r["oracle"] == r["finder"] for r in rows)}
    else:
        if not args.tree:
            raise PreconditionError("oracle tree needs --tree")
        out = {"embeds": instances.oracle_tree_embedding(load_tree(args.tree), G, colour)}
    _emit(args, out)
    return EXIT_OK if out.get("agree", True) else EXIT_VERIFY


# -- pipeline and bench ---------------------------------------------------------------


def cmd_pipeline(args) -> int:
    params = _params(args)
    partition = witness = None
    if args.host:
        host, extras = load_graph(args.host)
        if "partition" in extras:
            partition = Partition.from_json(extras["partition"])
        witness = extras.get("witness")
    elif args.gen_host:
        host, partition, witness = _host_from_recipe(json.loads(args.gen_host), args.seed)
    else:
        raise PreconditionError("pipeline needs --host or --gen-host")
    if args.tree:
        T = load_tree(args.tree)
    elif args.gen_tree:
        recipe = json.loads(args.gen_tree)
        T = random_tree(int(recipe["t"]), int(recipe.get("max_degree", 8)), args.seed)
    else:
        raise PreconditionError("pipeline needs --tree or --gen-tree")
    result = run_pipeline(host, T, params, partition, witness, args.seed)
    _emit(args, result.report)
    return result.exit_code


def _bench_one(job: tuple) -> dict:
    seed, k, L, p, mu, fraction, max_degree, params = job
    started = time.perf_counter()
    template = instances.gen_odd_template(k, seed)
    host, part = instances.gen_planted_host(template, L, p, seed)
    t = planted_tree_size(k // 2, L, mu, fraction)
    T = random_tree(t, max_degree, seed)
    res = run_pipeline(host, T, {"mu": mu, "k": k, **params}, part, None, seed)
    return {"seed": seed, "status": res.status, "t": t, "seconds": round(time.perf_counter() - started, 3)}


def cmd_bench(args) -> int:
    params = _params(args)
    base = 0 if args.seed is None else int(args.seed)
    jobs = [(base + i, args.k, args.L, args.p, args.mu, args.fraction, args.max_degree, params)
            for i in range(args.trials)]
    workers = args.workers or os.cpu_count() or 1
    if workers == 1:
        rows = [_bench_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_bench_one, jobs))
    rows.sort(key=lambda r: r["seed"])
    embedded = sum(r["status"] == "EMBEDDED" for r in rows)
    _emit(args, {"runs": rows, "embedded": embedded, "trials": len(rows)})
    return EXIT_OK if embedded == len(rows) else EXIT_EMBED


# -- argument parsing ------------------------------------------------------------------


def _global_flags(defaults: bool) -> argparse.ArgumentParser:
    # subcommands repeat the global flags with suppressed defaults so a value
    # given before the subcommand is not overwritten
    flags = argparse.ArgumentParser(add_help=False)

    def dflt(value):
        return value if defaults else argparse.SUPPRESS

    flags.add_argument("--seed", type=int, default=dflt(None), help="random seed (runs are deterministic per seed)")
    flags.add_argument("--params", default=dflt(None), help="JSON object or path to a JSON file of parameters")
    flags.add_argument("--out", default=dflt(None), help="output file (default: stdout)")
    flags.add_argument("--log-level", default=dflt("WARNING"), help="logging level, e.g. INFO or DEBUG")
    return flags


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(False)
    parser = argparse.ArgumentParser(prog="tripartite-trees", parents=[_global_flags(True)],
                                     description="Monochromatic bounded-degree trees in 2-coloured K_{n,n,n}.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate hosts, planted instances or trees")
    g.add_argument("kind", choices=["random", "sparse", "pyramid", "spider", "planted", "tree"])
    for name, typ in (("--n", int), ("--p", float), ("--p-green", float), ("--eta", float), ("--split", float),
                      ("--k", int), ("--L", int), ("--t", int), ("--max-degree", int)):
        g.add_argument(name, type=typ, default=None)
    g.add_argument("--mode", choices=["tunnel", "crossing"], default=None)
    g.add_argument("--c", default=None)
    g.add_argument("--c2", default=None)
    g.add_argument("--profile", choices=sorted(instances.SPIDER_PROFILES), default=None)
    g.set_defaults(func=cmd_gen)

    a = sub.add_parser("analyze", parents=[common], help="certify a coloured graph as good or odd")
    a.add_argument("graph")
    a.add_argument("--witness", default=None, help="extremal witness JSON (else taken from the graph file)")
    a.add_argument("--eta-prime", type=float, default=0.1)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("assign", parents=[common], help="valid cluster assignment of a tree")
    s.add_argument("tree")
    s.add_argument("reduced", help="reduced graph JSON")
    s.add_argument("certificate", help="certificate JSON from analyze")
    s.add_argument("--cluster-size", type=float, required=True, help="n/k, the cluster size")
    s.set_defaults(func=cmd_assign)

    e = sub.add_parser("embed", parents=[common], help="embed a tree following an assignment")
    e.add_argument("tree")
    e.add_argument("host")
    e.add_argument("assignment")
    e.add_argument("--colour", required=True)
    e.add_argument("--partition", default=None)
    e.add_argument("--k", type=int, default=6)
    e.set_defaults(func=cmd_embed)

    v = sub.add_parser("verify", parents=[common], help="check an embedding independently")
    v.add_argument("tree")
    v.add_argument("host")
    v.add_argument("embedding")
    v.add_argument("--assignment", default=None)
    v.add_argument("--partition", default=None)
    v.add_argument("--k", type=int, default=6)
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", parents=[common], help="exhaustive answers for small instances")
    o.add_argument("what", choices=["matching", "forks", "tree"])
    o.add_argument("graph")
    o.add_argument("--colour", default="G")
    o.add_argument("--odd", action="store_true")
    o.add_argument("--ratio", type=int, default=3)
    o.add_argument("--tree", default=None)
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("bench", parents=[common], help="planted end-to-end runs in parallel")
    b.add_argument("--trials", type=int, default=10)
    b.add_argument("--k", type=int, default=6)
    b.add_argument("--L", type=int, default=1000)
    b.add_argument("--p", type=float, default=1.0)
    b.add_argument("--mu", type=float, default=0.5)
    b.add_argument("--fraction", type=float, default=0.8)
    b.add_argument("--max-degree", type=int, default=8)
    b.add_argument("--workers", type=int, default=None)
    b.set_defaults(func=cmd_bench)

    pl = sub.add_parser("pipeline", parents=[common], help="full run from host and tree to verified embedding")
    pl.add_argument("--host", default=None, help="host graph JSON file")
    pl.add_argument("--gen-host", default=None, help='generator recipe, e.g. {"kind":"planted","k":6,"L":1000}')
    pl.add_argument("--tree", default=None, help="tree JSON file")
    pl.add_argument("--gen-tree", default=None, help='generator recipe, e.g. {"t":2400,"max_degree":8}')
    pl.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (PreconditionError, CapacityExceeded, AssignmentFailure, WalkConditionViolated) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_PRECONDITION
    except NoTypicalVertex as exc:
        log.error("%s", exc)
        return EXIT_EMBED
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        log.error("bad input: %s", exc)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
