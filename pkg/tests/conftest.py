import itertools

import pytest
from hypothesis import HealthCheck, settings

from densequiv.graphs import LabeledGraph

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def brute_hom(family, graph):
    """Count vertex maps of the pattern into the graph that preserve edges."""
    if family.kind == "edge":
        pattern, v = [(0, 1)], 2
    elif family.kind == "triangle":
        pattern, v = [(0, 1), (1, 2), (0, 2)], 3
    else:
        j = family.star_exponent
        pattern, v = [(0, leaf) for leaf in range(1, j + 1)], j + 1
    total = 0
    for phi in itertools.product(range(graph.n), repeat=v):
        if all(graph.has_edge(phi[a], phi[b]) for a, b in pattern):
            total += 1
    return total


def all_graphs(n):
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield LabeledGraph.from_edges(n, [p for b, p in enumerate(pairs) if mask >> b & 1])


@pytest.fixture(scope="session")
def tables():
    """Cached exact tables keyed by (n, family names)."""
    from densequiv.exact import enumerate_graphs
    from densequiv.graphs import parse_families

    cache = {}

    def get(n, fams):
        key = (n, fams)
        if key not in cache:
            cache[key] = enumerate_graphs(n, parse_families(fams))
        return cache[key]

    return get


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
