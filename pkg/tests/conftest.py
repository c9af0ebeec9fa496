"""Shared fixtures and independent brute-force oracles.

The oracles here deliberately avoid the package's bitset machinery: they work
on dict-of-sets adjacency so that agreement between the two paths is a real
cross-check, not the same code twice.
"""

from __future__ import annotations

from itertools import combinations, permutations

import pytest

from degdiv.graphs import Graph


def adjacency_sets(g: Graph) -> dict[int, set[int]]:
    return {u: {v for v in range(g.n) if v != u and g.has_edge(u, v)} for u in range(g.n)}


def brute_hom(g: Graph) -> int:
    adj = adjacency_sets(g)
    best = 1
    for r in range(2, g.n + 1):
        for sub in combinations(range(g.n), r):
            pairs = list(combinations(sub, 2))
            if all(b in adj[a] for a, b in pairs) or all(b not in adj[a] for a, b in pairs):
                best = max(best, r)
    return best


def brute_f(g: Graph) -> int:
    adj = adjacency_sets(g)
    best = 0
    for r in range(1, g.n + 1):
        for sub in combinations(range(g.n), r):
            inside = set(sub)
            degs = {len(adj[u] & inside) for u in sub}
            best = max(best, len(degs))
    return best


def brute_diversity(g: Graph, u: int, v: int, s=None) -> int:
    adj = adjacency_sets(g)
    scope = set(range(g.n)) if s is None else set(s)
    return len((adj[u] ^ adj[v]) & scope)


def isomorphic_brute(g: Graph, h: Graph) -> bool:
    if g.n != h.n or g.edge_count() != h.edge_count():
        return False
    ga, ha = adjacency_sets(g), adjacency_sets(h)
    for perm in permutations(range(g.n)):
        if all((perm[v] in ha[perm[u]]) == (v in ga[u]) for u in range(g.n) for v in range(g.n) if u != v):
            return True
    return False


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def empty_graph(n: int) -> Graph:
    return Graph.from_edges(n, [])


@pytest.fixture(scope="session")
def api_client():
    from starlette.testclient import TestClient

    from degdiv.service import app

    with TestClient(app, base_url="http://degdiv.test") as client:
        yield client
