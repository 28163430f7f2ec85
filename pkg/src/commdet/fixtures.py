"""Deterministic synthetic graphs at desk scale.

Real benchmark inputs run to hundreds of millions of edges; these
generators provide small instances with known community structure
(disjoint or ring-connected cliques) and seeded random graphs for
property tests.
"""

from __future__ import annotations

import numpy as np

from .graph import EdgeList, Graph, build_graph

__all__ = ["cliques", "ring_of_cliques", "random_gnp", "gnp_graph"]


def cliques(k: int, count: int, bridges: int = 0) -> EdgeList:
    """`count` disjoint k-cliques, optionally chained by bridge edges.

    With bridges = b > 0, vertex j of clique i is joined to vertex j of
    clique i + 1 for j < b, forming a chain.
    """
    if k < 2:
        raise ValueError("clique size must be >= 2")
    if count < 1:
        raise ValueError("clique count must be >= 1")
    if not 0 <= bridges <= k:
        raise ValueError("bridges must lie in [0, k]")
    entries: list[tuple[int, int, float]] = []
    for i in range(count):
        base = i * k
        for a in range(k):
            for b in range(a + 1, k):
                entries.append((base + a, base + b, 1.0))
    for i in range(count - 1):
        for j in range(bridges):
            entries.append((i * k + j, (i + 1) * k + j, 1.0))
    return EdgeList(n=count * k, entries=entries)


def ring_of_cliques(k: int, count: int) -> EdgeList:
    """`count` k-cliques joined in a ring by single edges."""
    edges = cliques(k, count)
    if count >= 2:
        for i in range(count):
            u = i * k + (k - 1)
            v = ((i + 1) % count) * k
            edges.entries.append((u, v, 1.0))
    return edges


def random_gnp(
    n: int,
    p: float,
    seed: int = 42,
    weight_choices: list[float] | None = None,
) -> EdgeList:
    """Erdos-Renyi G(n, p), unit weights unless weight_choices is given."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    iu, iv = np.triu_indices(n, k=1)
    mask = rng.random(iu.size) < p
    us, vs = iu[mask], iv[mask]
    if weight_choices is not None:
        ws = rng.choice(np.asarray(weight_choices, dtype=np.float64), size=us.size)
    else:
        ws = np.ones(us.size)
    entries = [(int(u), int(v), float(w)) for u, v, w in zip(us, vs, ws)]
    return EdgeList(n=n, entries=entries)


def gnp_graph(
    n: int,
    p: float,
    seed: int = 42,
    weight_choices: list[float] | None = None,
    add_self_loops: bool = False,
) -> Graph:
    """Seeded random graph, built and preprocessed in one call.

    Falls back to a higher edge probability if the draw came out edgeless,
    so callers always get a usable graph.
    """
    edges = random_gnp(n, p, seed, weight_choices)
    if not edges.entries and not add_self_loops:
        edges = random_gnp(n, min(1.0, max(p, 0.5)), seed, weight_choices)
    return build_graph(edges, symmetrize=True, add_self_loops=add_self_loops)
