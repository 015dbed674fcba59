from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tripartite_trees.graph_core import ColouredTripartiteGraph

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_graph(rng: np.random.Generator, sizes, p_green=0.5, p_edge=1.0) -> ColouredTripartiteGraph:
    """Random coloured tripartite graph built directly from a matrix."""
    sizes = tuple(int(s) for s in sizes)
    total = sum(sizes)
    cls = np.repeat(np.arange(3), sizes)
    mat = np.zeros((total, total), dtype=np.int8)
    for u in range(total):
        for v in range(u + 1, total):
            if cls[u] != cls[v] and rng.random() < p_edge:
                mat[u, v] = mat[v, u] = 1 if rng.random() < p_green else 2
    return ColouredTripartiteGraph(sizes, mat)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def record_criterion():
    def record(number: int, passed: bool, detail: str) -> None:
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
