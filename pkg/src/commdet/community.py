"""Community assignments, modularity scoring, and the move-gain bookkeeping.

Labels are plain int64 numpy arrays of length n: ``labels[u]`` is the
community of vertex u.  Modularity follows the arc convention of the graph
module: with ``2m`` equal to ``graph.total``,

    Q = sum over communities c of  IN_c / 2m - (TOT_c / 2m)^2

where IN_c sums the stored arc weights with both endpoints in c (so a
symmetric pair counts twice and a self-loop once) and TOT_c sums the
weighted degrees of c's members.  Under this convention Q is 0 for the
all-in-one assignment and lies in [-0.5, 1.0].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, arc_sources

__all__ = [
    "Aggregates",
    "Dendrogram",
    "singleton_assignment",
    "normalize_labels",
    "community_aggregates",
    "neighbor_community_weights",
    "modularity",
    "modularity_bruteforce",
    "modularity_from_aggregates",
    "delta_modularity",
    "apply_move",
    "flatten",
    "format_membership",
    "write_membership",
    "read_membership",
]


@dataclass
class Aggregates:
    """Per-community totals that make move gains O(1).

    Attributes:
        sigma_tot: sum of weighted degrees of member vertices.
        sigma_in: sum of arc weights internal to the community (symmetric
            pairs twice, self-loop arcs once).
        sizes: member counts.
    """

    sigma_tot: np.ndarray
    sigma_in: np.ndarray
    sizes: np.ndarray

    @property
    def n_communities(self) -> int:
        return int(self.sigma_tot.shape[0])


@dataclass
class Dendrogram:
    """Per-pass membership hierarchy.

    ``levels[k]`` maps the vertices of level k to the super-vertices of
    level k + 1; level 0 has one entry per original vertex.  ``per_level_q``
    records modularity after each pass.
    """

    levels: list[np.ndarray] = field(default_factory=list)
    per_level_q: list[float] = field(default_factory=list)


def singleton_assignment(n: int) -> np.ndarray:
    """Every vertex alone in its own community: labels[u] = u."""
    if n < 1:
        raise ValueError("vertex count must be >= 1")
    return np.arange(n, dtype=np.int64)


def normalize_labels(labels: np.ndarray) -> tuple[np.ndarray, int]:
    """Remap labels onto [0, C) preserving first-occurrence order.

    Idempotent: already-normalized input comes back unchanged.
    """
    labels = np.asarray(labels, dtype=np.int64)
    out = np.empty_like(labels)
    seen: dict[int, int] = {}
    nxt = 0
    for i, lab in enumerate(labels.tolist()):
        c = seen.get(lab)
        if c is None:
            seen[lab] = c = nxt
            nxt += 1
        out[i] = c
    return out, nxt


def _check_labels(g: Graph, labels: np.ndarray) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (g.n,):
        raise ValueError(f"labels must have length {g.n}, got {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= g.n):
        raise ValueError("labels must lie in [0, n)")
    return labels


def community_aggregates(
    g: Graph, labels: np.ndarray, n_communities: int | None = None
) -> Aggregates:
    """Compute sigma_tot / sigma_in / sizes for every community.

    Arrays are sized max(label) + 1 unless n_communities asks for more
    (extra slots stay zero; useful for probing moves into a fresh
    community).
    """
    labels = _check_labels(g, labels)
    width = int(labels.max()) + 1
    if n_communities is not None:
        if n_communities < width:
            raise ValueError("n_communities smaller than max label + 1")
        width = n_communities
    src = arc_sources(g)
    lab_src = labels[src]
    internal = lab_src == labels[g.targets]
    return Aggregates(
        sigma_tot=np.bincount(labels, weights=g.degrees, minlength=width),
        sigma_in=np.bincount(lab_src[internal], weights=g.weights[internal], minlength=width),
        sizes=np.bincount(labels, minlength=width).astype(np.int64),
    )


def neighbor_community_weights(
    g: Graph, labels: np.ndarray, u: int
) -> tuple[dict[int, float], float]:
    """Weights from vertex u into each adjacent community.

    Returns (k_map, loop_weight): k_map[c] sums u's non-loop arc weights
    into community c and always contains u's own community (0.0 when u has
    no non-loop neighbor there); loop_weight is u's self-loop arc weight.
    """
    lo, hi = int(g.offsets[u]), int(g.offsets[u + 1])
    own = int(labels[u])
    k_map = {own: 0.0}
    loop_w = 0.0
    tgt = g.targets
    wts = g.weights
    for k in range(lo, hi):
        v = int(tgt[k])
        if v == u:
            loop_w += float(wts[k])
            continue
        c = int(labels[v])
        k_map[c] = k_map.get(c, 0.0) + float(wts[k])
    return k_map, loop_w


def modularity_from_aggregates(agg: Aggregates, total: float) -> float:
    """Q from precomputed aggregates; total is the graph's 2m.

    The per-community terms are combined with math.fsum, so the result is
    exactly invariant under community relabeling.
    """
    if total <= 0:
        raise ValueError("modularity undefined for zero-total graph")
    frac = agg.sigma_tot / total
    return math.fsum((agg.sigma_in / total - frac * frac).tolist())


def modularity(g: Graph, labels: np.ndarray) -> float:
    """Modularity of an assignment; lies in [-0.5, 1.0]."""
    return modularity_from_aggregates(community_aggregates(g, labels), g.total)


def modularity_bruteforce(g: Graph, labels: np.ndarray) -> float:
    """Independent modularity oracle: plain loops, no shared bookkeeping.

    Recomputes the total weight and every community's internal and degree
    mass directly from the CSR arrays.  Intended for cross-checking at
    small scale, not for production use.
    """
    labels = _check_labels(g, labels)
    offs = g.offsets.tolist()
    tgt = g.targets.tolist()
    wts = g.weights.tolist()
    labs = labels.tolist()

    total = 0.0
    for w in wts:
        total += w
    if total <= 0:
        raise ValueError("modularity undefined for zero-total graph")

    q = 0.0
    for c in sorted(set(labs)):
        internal = 0.0
        degree_mass = 0.0
        for u in range(g.n):
            if labs[u] != c:
                continue
            for k in range(offs[u], offs[u + 1]):
                degree_mass += wts[k]
                if labs[tgt[k]] == c:
                    internal += wts[k]
        q += internal / total - (degree_mass / total) ** 2
    return q


def move_gain(
    k_to_new: float,
    k_to_from: float,
    k_u: float,
    sigma_to: float,
    sigma_from_without: float,
    m: float,
) -> float:
    """Exact modularity change of moving one vertex.

    Arguments describe the move of a vertex with weighted degree k_u out
    of a community whose degree mass without it is sigma_from_without and
    into one with degree mass sigma_to; k_to_new / k_to_from are the
    vertex's non-loop arc weights into the target and source communities.
    m is half the graph total.
    """
    return (k_to_new - k_to_from) / m - k_u * (sigma_to - sigma_from_without) / (2.0 * m * m)


def delta_modularity(
    g: Graph,
    agg: Aggregates,
    u: int,
    k_to: dict[int, float],
    from_c: int,
    to_c: int,
) -> float:
    """Modularity change of moving u from from_c to to_c.

    k_to maps each candidate community to the summed weight of u's
    non-loop arcs into it; zero entries may be omitted.  agg must reflect
    the assignment in which u currently sits in from_c.  Moving to an
    empty community is allowed when agg was sized to include it.
    """
    if agg.sizes[from_c] < 1:
        raise ValueError(f"community {from_c} is empty; u cannot be moving out of it")
    if to_c == from_c:
        return 0.0
    k_u = float(g.degrees[u])
    m = g.total / 2.0
    return move_gain(
        float(k_to.get(to_c, 0.0)),
        float(k_to.get(from_c, 0.0)),
        k_u,
        float(agg.sigma_tot[to_c]),
        float(agg.sigma_tot[from_c]) - k_u,
        m,
    )


def apply_move(g: Graph, labels: np.ndarray, agg: Aggregates, u: int, to_c: int) -> None:
    """Move u to community to_c, updating labels and agg in place.

    Single-writer: caller must not mutate labels or agg concurrently.
    """
    from_c = int(labels[u])
    if to_c == from_c:
        return
    k_map, loop_w = neighbor_community_weights(g, labels, u)
    k_u = float(g.degrees[u])
    agg.sigma_tot[from_c] -= k_u
    agg.sigma_tot[to_c] += k_u
    agg.sigma_in[from_c] -= 2.0 * k_map.get(from_c, 0.0) + loop_w
    agg.sigma_in[to_c] += 2.0 * k_map.get(to_c, 0.0) + loop_w
    agg.sizes[from_c] -= 1
    agg.sizes[to_c] += 1
    labels[u] = to_c


def flatten(d: Dendrogram) -> np.ndarray:
    """Compose all dendrogram levels into one original-vertex assignment."""
    if not d.levels:
        raise ValueError("cannot flatten an empty dendrogram")
    acc = np.asarray(d.levels[0], dtype=np.int64)
    for k, lev in enumerate(d.levels[1:], start=1):
        lev = np.asarray(lev, dtype=np.int64)
        width = int(acc.max()) + 1
        if lev.shape[0] != width:
            raise ValueError(f"level {k} has {lev.shape[0]} entries, expected {width}")
        acc = lev[acc]
    return acc


# ---------------------------------------------------------------------------
# Membership file format: one "vertex_id community_id" line per vertex
# ---------------------------------------------------------------------------


def format_membership(labels: np.ndarray) -> str:
    labels = np.asarray(labels, dtype=np.int64)
    return "".join(f"{u} {int(c)}\n" for u, c in enumerate(labels.tolist()))


def write_membership(path: str, labels: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_membership(labels))


def read_membership(path: str) -> np.ndarray:
    """Parse a membership file; every vertex id must appear exactly once."""
    pairs: dict[int, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            stripped = raw.strip()
            if not stripped or stripped.startswith("#"):
                continue
            toks = stripped.split()
            if len(toks) != 2:
                raise ValueError(f"line {line_no}: expected 'vertex community'")
            u, c = int(toks[0]), int(toks[1])
            if u in pairs:
                raise ValueError(f"line {line_no}: duplicate vertex {u}")
            pairs[u] = c
    n = len(pairs)
    if n == 0:
        raise ValueError("empty membership file")
    if set(pairs) != set(range(n)):
        raise ValueError("membership file must cover vertex ids 0..n-1 exactly once")
    out = np.empty(n, dtype=np.int64)
    for u, c in pairs.items():
        out[u] = c
    return out
