"""End-to-end run: partition, reduce, certify, assign, embed, verify.

The result is a JSON-ready report listing each stage's achieved quantities
next to the bounds they were checked against, plus a status and exit code.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .assignment import build_valid_assignment, inequality
from .embedder import Embedding, embed, verify_embedding
from .errors import (
    AssignmentFailure,
    CapacityExceeded,
    NoTypicalVertex,
    PreconditionError,
    TooManyIrregularPairs,
    WalkConditionViolated,
)
from .extremal import Certificate, certify_good_or_odd, witness_from_json
from .graph_core import ColouredTripartiteGraph
from .regularity import Partition, equipartition, reduced_colour_graph
from .tree_tools import Tree

log = logging.getLogger(__name__)

EXIT_OK, EXIT_PRECONDITION, EXIT_INCONCLUSIVE, EXIT_EMBED, EXIT_VERIFY = 0, 2, 3, 4, 5

DEFAULT_PARAMS = {
    "k": 6,  # clusters in total (a multiple of 3)
    "mu": 0.5,
    "eps": 0.01,  # embedding epsilon; must be below mu/10
    "cut_eps": None,  # cut granularity S = cut_eps * L; defaults to just under mu/10
    "audit_eps": 0.05,
    "d": 0.5,  # density required of the pairs used for embedding
    "eta_prime": 0.1,
    "audit_samples": 200,
    "retries": 20,
    "Delta": None,  # defaults to the tree's maximum degree
    "green_threshold": 0.5,
    "alpha": None,  # degree exponent; defaults to alpha*(2k+1) = 1/2
}


@dataclass
class PipelineResult:
    status: str
    exit_code: int
    report: dict
    embedding: Embedding | None = None
    stages: dict = field(default_factory=dict)


def resolve_params(params: dict | None) -> dict:
    out = dict(DEFAULT_PARAMS)
    for key, value in (params or {}).items():
        if key not in out:
            raise PreconditionError(f"unknown parameter {key!r}")
        out[key] = value
    if out["cut_eps"] is None:
        out["cut_eps"] = 0.98 * out["mu"] / 10
    return out


def run_pipeline(
    host: ColouredTripartiteGraph,
    tree: Tree,
    params: dict | None = None,
    partition: Partition | None = None,
    witness=None,
    seed=None,
) -> PipelineResult:
    """Try to embed ``tree`` monochromatically in ``host``; never raises on expected failures."""
    report: dict = {"inequalities": [], "stages": {}}
    stages: dict = {}

    def finish(status: str, code: int, stage: str, message: str | None = None, embedding=None) -> PipelineResult:
        report["status"] = status
        report["stage"] = stage
        if message:
            report["message"] = message
        log.info("pipeline %s at stage %s", status, stage)
        return PipelineResult(status, code, report, embedding, stages)

    try:
        p = resolve_params(params)
    except PreconditionError as exc:
        return finish("PRECONDITION", EXIT_PRECONDITION, "parameters", str(exc))
    report["params"] = p
    ineq = report["inequalities"]
    n = host.n_scale
    Delta = tree.max_degree if p["Delta"] is None else int(p["Delta"])
    ineq.append(inequality("t <= (3-mu)n/2", tree.t, (3 - p["mu"]) * n / 2))
    ineq.append(inequality("Delta(T) <= Delta", tree.max_degree, Delta))
    ineq.append(inequality("eps < mu/10", p["eps"], p["mu"] / 10, strict=True))
    if not all(q["holds"] for q in ineq):
        bad = next(q["name"] for q in ineq if not q["holds"])
        return finish("PRECONDITION", EXIT_PRECONDITION, "parameters", f"violated: {bad}")

    # partition and reduced graph
    try:
        part = partition if partition is not None else equipartition(host, int(p["k"]), seed=None)
        red = reduced_colour_graph(host, part, p["audit_eps"], 0.0, int(p["audit_samples"]), seed,
                                   p["green_threshold"], p["eta_prime"])
    except (PreconditionError, TooManyIrregularPairs) as exc:
        return finish("PRECONDITION", EXIT_PRECONDITION, "reduced_graph", str(exc))
    stages["reduced"] = red
    L = red.partition.L
    k = red.partition.k
    alpha = p["alpha"] if p["alpha"] is not None else 1 / (2 * (2 * k + 1))
    ineq.append(inequality("Delta <= n^alpha (reported only)", Delta, n ** alpha))
    report["stages"]["reduced_graph"] = {
        "clusters": red.partition.k,
        "L": L,
        "binned_clusters": red.removed,
        "failed_audits": sum(1 for a in red.audits if not a.verdict),
        "edges": {"G": red.graph.num_edges(1), "R": red.graph.num_edges(2)},
    }

    # certificate
    wit = witness_from_json(witness) if isinstance(witness, dict) else witness
    try:
        cert = certify_good_or_odd(red.graph, p["eta_prime"], wit)
    except PreconditionError as exc:
        return finish("PRECONDITION", EXIT_PRECONDITION, "certificate", str(exc))
    if not isinstance(cert, Certificate):
        report["stages"]["certificate"] = cert.to_json()
        return finish("INCONCLUSIVE", EXIT_INCONCLUSIVE, "certificate", cert.reason)
    stages["certificate"] = cert
    cj = {"kind": cert.kind, "colour": cert.colour.code, "source": cert.source,
          "achieved": list(cert.achieved), "thresholds": list(cert.thresholds)}
    report["stages"]["certificate"] = cj
    for got, need, name in zip(cert.achieved, cert.thresholds, ("matching", "forks", "ratio")):
        if name == "ratio":
            ineq.append(inequality("fork ratio <= 3", got, need))
        else:
            ineq.append(inequality(f"{cert.kind} certificate {name} >= threshold", need, got))

    # assignment
    try:
        D, A = build_valid_assignment(tree, red.graph, cert, p["mu"], p["eps"], L, p["cut_eps"],
                                      seed=seed, retries=int(p["retries"]))
    except (PreconditionError, CapacityExceeded, AssignmentFailure, WalkConditionViolated) as exc:
        return finish("PRECONDITION", EXIT_PRECONDITION, "assignment", f"{type(exc).__name__}: {exc}")
    stages["decomposition"], stages["assignment"] = D, A
    ineq.extend(A.checks)
    report["stages"]["assignment"] = {"case": A.case, "cut_size": len(A.cut), "S": D.S,
                                      "changed": A.changed, "max_load": max(A.loads)}

    # embedding
    rho = p["mu"] / 2
    try:
        E = embed(tree, D, A.h, host, red.partition, cert.colour, p["d"], p["eps"], rho, Delta,
                  audit_samples=int(p["audit_samples"]), audit_eps=p["audit_eps"], seed=seed)
    except NoTypicalVertex as exc:
        report["stages"]["embedding"] = {"state": exc.state}
        return finish("EMBED_FAILED", EXIT_EMBED, "embedding", str(exc))
    except PreconditionError as exc:
        return finish("PRECONDITION", EXIT_PRECONDITION, "embedding", str(exc))
    feas = E.stats["feasibility"]
    ineq.append({**feas, "name": feas["name"] + " (reported only)"})
    slack = E.stats["min_candidate_slack"]
    report["stages"]["embedding"] = {"reservoir_size": E.stats["reservoir_size"],
                                     "connecting_space": E.stats["connecting_space"],
                                     "min_candidates_minus_4epsL": slack}

    problems = verify_embedding(tree, E, host, red.partition, A.h)
    report["stages"]["verify"] = {"ok": not problems, "violations": problems[:20]}
    if problems:
        return finish("VERIFY_FAILED", EXIT_VERIFY, "verify", problems[0], E)
    report["embedding"] = E.to_json()
    return finish("EMBEDDED", EXIT_OK, "done", None, E)


def planted_tree_size(template_matching: int, L: int, mu: float, fraction: float = 0.8) -> int:
    """Largest tree size used in planted end-to-end runs: fraction*(1-mu)*2m*L."""
    return int(math.floor(fraction * (1 - mu) * 2 * template_matching * L))
