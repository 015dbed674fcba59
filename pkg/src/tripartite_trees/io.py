"""JSON reading and writing for graphs, trees and the other artefacts."""
from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

from .errors import BadArguments
from .graph_core import Colour, ColouredTripartiteGraph, build_graph
from .tree_tools import Tree


def graph_to_json(G: ColouredTripartiteGraph) -> dict:
    us, vs = np.nonzero(np.triu(G.matrix))
    codes = G.matrix[us, vs]
    edges = [[int(u), int(v), Colour(int(c)).code] for u, v, c in zip(us, vs, codes)]
    out = {"classes": list(G.class_sizes), "edges": edges}
    if G.n_scale != max(G.class_sizes):
        out["n_scale"] = G.n_scale
    return out


def graph_from_json(data: dict) -> ColouredTripartiteGraph:
    if "classes" not in data or "edges" not in data:
        raise BadArguments("graph JSON needs 'classes' and 'edges'")
    return build_graph(data["classes"], ((u, v, c) for u, v, c in data["edges"]), data.get("n_scale"))


def read_json(path) -> object:
    if str(path) == "-":
        return json.load(sys.stdin)
    with open(path) as fh:
        return json.load(fh)


def write_json(obj, path=None) -> None:
    text = json.dumps(obj, sort_keys=True)
    if path is None or str(path) == "-":
        sys.stdout.write(text + "\n")
    else:
        Path(path).write_text(text + "\n")


def load_graph(path):
    """Graph from a file holding either bare graph JSON or {"graph": ..., "witness": ...}.

    Returns ``(graph, extras)`` where extras is the remaining wrapper content.
    """
    data = read_json(path)
    if isinstance(data, dict) and "graph" in data:
        extras = {k: v for k, v in data.items() if k != "graph"}
        return graph_from_json(data["graph"]), extras
    return graph_from_json(data), {}


def load_tree(path) -> Tree:
    return Tree.from_json(read_json(path))
