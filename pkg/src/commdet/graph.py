"""Undirected weighted graphs in CSR form, plus loaders for the two text formats.

A graph is stored as flat arc arrays: every undirected edge {u, v} with u != v
appears as the two arcs (u, v, w) and (v, u, w); a self-loop is stored as a
single arc (u, u, w) whose weight counts once in the vertex degree.  All
community and modularity code in this package assumes exactly this convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO, TextIO

import numpy as np

__all__ = [
    "EdgeList",
    "Graph",
    "GraphStats",
    "GraphParseError",
    "parse_matrix_market",
    "parse_edgelist",
    "build_graph",
    "graph_stats",
    "graph_to_edgelist",
    "save_edgelist",
    "load_graph_file",
    "arc_sources",
    "validate_graph",
]


class GraphParseError(ValueError):
    """Raised when an input graph file cannot be parsed."""


@dataclass
class EdgeList:
    """Raw edges as read from disk, before symmetrization or loop insertion.

    Attributes:
        n: declared vertex count; every id in entries lies in [0, n).
        entries: list of (u, v, w) tuples with 0-based vertex ids.
    """

    n: int
    entries: list[tuple[int, int, float]] = field(default_factory=list)


@dataclass(frozen=True)
class Graph:
    """Immutable undirected weighted graph in compressed sparse row form.

    Attributes:
        n: vertex count.
        offsets: int64 array of length n + 1, row start positions.
        targets: int64 array of arc endpoints, sorted within each row.
        weights: float64 array of arc weights, all positive and finite.
        degrees: float64 array, degrees[u] = sum of weights of arcs out of u
            (a self-loop arc counts once).
        total: sum of all degrees; equals twice the undirected edge weight
            when self-loops are absent.
    """

    n: int
    offsets: np.ndarray
    targets: np.ndarray
    weights: np.ndarray
    degrees: np.ndarray
    total: float

    def neighbors(self, u: int) -> tuple[np.ndarray, np.ndarray]:
        """Return (targets, weights) slices for vertex u."""
        lo, hi = self.offsets[u], self.offsets[u + 1]
        return self.targets[lo:hi], self.weights[lo:hi]

    @property
    def n_arcs(self) -> int:
        return int(self.targets.shape[0])


@dataclass(frozen=True)
class GraphStats:
    """Vertex count, arc count, and average degree of a preprocessed graph."""

    vertices: int
    undirected_edges: int
    avg_degree: float


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_MM_FIELDS = ("pattern", "real", "integer")
_MM_SYMMETRIES = ("general", "symmetric")


def parse_matrix_market(stream: TextIO | IO[str]) -> EdgeList:
    """Parse a MatrixMarket coordinate file into an EdgeList.

    Accepts pattern/real/integer fields and general/symmetric storage.
    Indices are converted from 1-based to 0-based; pattern entries get
    weight 1.  For symmetric files only the stored triangle is returned;
    mirroring the arcs is build_graph's job.

    Raises:
        GraphParseError: on a malformed header or size line, an index out
            of the declared range, a non-finite weight, or an entry count
            that does not match the size line.  Messages name the
            offending line number.
    """
    line_no = 0
    header = None
    while header is None:
        raw = stream.readline()
        line_no += 1
        if not raw:
            raise GraphParseError("line 1: missing MatrixMarket header")
        if raw.strip():
            header = raw.strip()

    parts = header.split()
    if len(parts) < 4 or parts[0] != "%%MatrixMarket" or parts[1].lower() != "matrix":
        raise GraphParseError(f"line {line_no}: malformed MatrixMarket header: {header!r}")
    fmt = parts[2].lower()
    fld = parts[3].lower()
    sym = parts[4].lower() if len(parts) > 4 else "general"
    if fmt != "coordinate":
        raise GraphParseError(f"line {line_no}: unsupported format {fmt!r} (need coordinate)")
    if fld not in _MM_FIELDS:
        raise GraphParseError(f"line {line_no}: unsupported field {fld!r}")
    if sym not in _MM_SYMMETRIES:
        raise GraphParseError(f"line {line_no}: unsupported symmetry {sym!r}")
    pattern = fld == "pattern"

    size = None
    while size is None:
        raw = stream.readline()
        line_no += 1
        if not raw:
            raise GraphParseError(f"line {line_no}: missing size line")
        stripped = raw.strip()
        if not stripped or stripped.startswith("%"):
            continue
        toks = stripped.split()
        if len(toks) != 3:
            raise GraphParseError(f"line {line_no}: malformed size line: {stripped!r}")
        try:
            rows, cols, nnz = int(toks[0]), int(toks[1]), int(toks[2])
        except ValueError as exc:
            raise GraphParseError(f"line {line_no}: malformed size line: {stripped!r}") from exc
        if rows != cols:
            raise GraphParseError(f"line {line_no}: non-square matrix {rows}x{cols}")
        if rows < 1 or nnz < 0:
            raise GraphParseError(f"line {line_no}: invalid size line: {stripped!r}")
        size = (rows, nnz)

    n, nnz = size
    entries: list[tuple[int, int, float]] = []
    while len(entries) < nnz:
        raw = stream.readline()
        line_no += 1
        if not raw:
            raise GraphParseError(
                f"line {line_no}: truncated file: expected {nnz} entries, found {len(entries)}"
            )
        stripped = raw.strip()
        if not stripped or stripped.startswith("%"):
            continue
        toks = stripped.split()
        want = 2 if pattern else 3
        if len(toks) < want:
            raise GraphParseError(f"line {line_no}: truncated entry: {stripped!r}")
        try:
            u = int(toks[0]) - 1
            v = int(toks[1]) - 1
        except ValueError as exc:
            raise GraphParseError(f"line {line_no}: bad vertex id in {stripped!r}") from exc
        if not (0 <= u < n and 0 <= v < n):
            raise GraphParseError(
                f"line {line_no}: index out of range 1..{n}: {stripped!r}"
            )
        if pattern:
            w = 1.0
        else:
            try:
                w = float(toks[2])
            except ValueError as exc:
                raise GraphParseError(f"line {line_no}: bad weight in {stripped!r}") from exc
            if not math.isfinite(w):
                raise GraphParseError(f"line {line_no}: non-finite weight in {stripped!r}")
        entries.append((u, v, w))

    for raw in stream:
        line_no += 1
        stripped = raw.strip()
        if stripped and not stripped.startswith("%"):
            raise GraphParseError(
                f"line {line_no}: extra entry beyond declared count {nnz}: {stripped!r}"
            )

    return EdgeList(n=n, entries=entries)


def parse_edgelist(stream: TextIO | IO[str]) -> EdgeList:
    """Parse the plain edge-list format: one ``u v [w]`` per line, 0-based.

    Lines starting with ``#`` are comments; a leading ``# n <N>`` directive
    fixes the vertex count (needed to preserve trailing isolated vertices),
    otherwise n is inferred as max id + 1.
    """
    entries: list[tuple[int, int, float]] = []
    declared_n = None
    max_id = -1
    for line_no, raw in enumerate(stream, start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            toks = stripped[1:].split()
            if len(toks) == 2 and toks[0] == "n":
                try:
                    declared_n = int(toks[1])
                except ValueError as exc:
                    raise GraphParseError(f"line {line_no}: bad n directive: {stripped!r}") from exc
            continue
        toks = stripped.split()
        if len(toks) not in (2, 3):
            raise GraphParseError(f"line {line_no}: expected 'u v [w]', got {stripped!r}")
        try:
            u, v = int(toks[0]), int(toks[1])
            w = float(toks[2]) if len(toks) == 3 else 1.0
        except ValueError as exc:
            raise GraphParseError(f"line {line_no}: bad entry: {stripped!r}") from exc
        if u < 0 or v < 0:
            raise GraphParseError(f"line {line_no}: negative vertex id: {stripped!r}")
        if not math.isfinite(w):
            raise GraphParseError(f"line {line_no}: non-finite weight: {stripped!r}")
        if declared_n is not None and (u >= declared_n or v >= declared_n):
            raise GraphParseError(f"line {line_no}: index beyond declared n={declared_n}")
        max_id = max(max_id, u, v)
        entries.append((u, v, w))
    n = declared_n if declared_n is not None else max_id + 1
    if n < 1:
        raise GraphParseError("edge list declares no vertices")
    return EdgeList(n=n, entries=entries)


def load_graph_file(
    path: str,
    fmt: str | None = None,
    symmetrize: bool = True,
    add_self_loops: bool = False,
    default_weight: float = 1.0,
) -> Graph:
    """Load and preprocess a graph from a .mtx or edge-list file."""
    if fmt is None:
        fmt = "mtx" if str(path).endswith(".mtx") else "edgelist"
    with open(path, "r", encoding="utf-8") as fh:
        edges = parse_matrix_market(fh) if fmt == "mtx" else parse_edgelist(fh)
    return build_graph(
        edges,
        symmetrize=symmetrize,
        add_self_loops=add_self_loops,
        default_weight=default_weight,
    )


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def build_graph(
    edges: EdgeList,
    symmetrize: bool = True,
    add_self_loops: bool = False,
    default_weight: float = 1.0,
) -> Graph:
    """Build a CSR Graph from raw edges.

    With symmetrize on, every entry (u, v, w) with u != v also yields the
    reverse arc (v, u, w).  Parallel arcs between the same ordered pair are
    merged by summing weights.  With add_self_loops on, every vertex with
    no self-loop gains one of weight default_weight; existing self-loops
    are kept as-is.

    Raises:
        ValueError: if the edge list declares no vertices or the finished
            graph has zero total weight.
    """
    n = edges.n
    if n < 1:
        raise ValueError("empty graph: vertex count must be >= 1")

    if edges.entries:
        arr = np.asarray(edges.entries, dtype=np.float64)
        us = arr[:, 0].astype(np.int64)
        vs = arr[:, 1].astype(np.int64)
        ws = arr[:, 2]
    else:
        us = np.empty(0, dtype=np.int64)
        vs = np.empty(0, dtype=np.int64)
        ws = np.empty(0, dtype=np.float64)

    if us.size and (us.min() < 0 or vs.min() < 0 or max(us.max(), vs.max()) >= n):
        raise ValueError("edge endpoint outside declared vertex range")
    if ws.size and not np.all(np.isfinite(ws)):
        raise ValueError("non-finite edge weight")

    if symmetrize:
        off = us != vs
        us, vs, ws = (
            np.concatenate([us, vs[off]]),
            np.concatenate([vs, us[off]]),
            np.concatenate([ws, ws[off]]),
        )

    if add_self_loops:
        has_loop = np.zeros(n, dtype=bool)
        if us.size:
            has_loop[us[us == vs]] = True
        missing = np.flatnonzero(~has_loop)
        us = np.concatenate([us, missing])
        vs = np.concatenate([vs, missing])
        ws = np.concatenate([ws, np.full(missing.size, float(default_weight))])

    return _graph_from_arcs(n, us, vs, ws)


def _graph_from_arcs(n: int, us: np.ndarray, vs: np.ndarray, ws: np.ndarray) -> Graph:
    """Sort arcs into CSR order, merge duplicates, and finish the Graph."""
    if us.size:
        order = np.lexsort((vs, us))
        us, vs, ws = us[order], vs[order], ws[order]
        # collapse runs of identical (u, v) pairs by summing their weights
        new_run = np.empty(us.size, dtype=bool)
        new_run[0] = True
        new_run[1:] = (us[1:] != us[:-1]) | (vs[1:] != vs[:-1])
        starts = np.flatnonzero(new_run)
        merged_w = np.add.reduceat(ws, starts)
        us, vs, ws = us[starts], vs[starts], merged_w

    if ws.size and ws.min() <= 0:
        raise ValueError("arc weights must be positive after merging")

    # the Graph type promises symmetry; catch unsymmetrized input here
    # rather than letting modularity invariants break silently downstream
    rev = np.lexsort((us, vs))
    if not (
        np.array_equal(us, vs[rev])
        and np.array_equal(vs, us[rev])
        and np.allclose(ws, ws[rev], rtol=1e-12, atol=0.0)
    ):
        raise ValueError(
            "arc list is not symmetric; pass symmetrize=True or provide both directions"
        )

    counts = np.bincount(us, minlength=n) if us.size else np.zeros(n, dtype=np.int64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    degrees = (
        np.bincount(us, weights=ws, minlength=n) if us.size else np.zeros(n, dtype=np.float64)
    )
    total = float(np.sum(degrees))
    if total <= 0.0:
        raise ValueError("graph has no arcs; add edges or enable self-loop insertion")

    for a in (offsets, vs, ws, degrees):
        a.setflags(write=False)
    return Graph(n=n, offsets=offsets, targets=vs, weights=ws, degrees=degrees, total=total)


def arc_sources(g: Graph) -> np.ndarray:
    """Per-arc source vertex ids (row index of each CSR entry)."""
    return np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.offsets))


def graph_stats(g: Graph) -> GraphStats:
    """Vertex count, arc count (symmetric pairs twice, loops once), avg degree."""
    return GraphStats(
        vertices=g.n,
        undirected_edges=g.n_arcs,
        avg_degree=g.n_arcs / g.n,
    )


def validate_graph(g: Graph) -> None:
    """Check the CSR invariants; raises AssertionError on violation.

    Verifies monotone offsets, per-row target ordering, arc symmetry
    (every (u, v, w) has a matching (v, u, w)), positive finite weights,
    and degree/total consistency.
    """
    assert g.offsets.shape == (g.n + 1,)
    assert g.offsets[0] == 0 and g.offsets[-1] == g.n_arcs
    assert np.all(np.diff(g.offsets) >= 0), "offsets must be non-decreasing"
    assert g.targets.shape == g.weights.shape
    assert np.all(np.isfinite(g.weights)) and np.all(g.weights > 0)

    src = arc_sources(g)
    for u in range(g.n):
        row = g.targets[g.offsets[u] : g.offsets[u + 1]]
        assert np.all(np.diff(row) > 0), f"row {u} not strictly sorted"

    fwd = np.lexsort((g.targets, src))
    rev = np.lexsort((src, g.targets))
    assert np.array_equal(src[fwd], g.targets[rev])
    assert np.array_equal(g.targets[fwd], src[rev])
    assert np.array_equal(g.weights[fwd], g.weights[rev]), "asymmetric arc weights"

    expect = np.bincount(src, weights=g.weights, minlength=g.n)
    assert np.allclose(g.degrees, expect, rtol=0, atol=0)
    assert g.total == float(np.sum(g.degrees))
    assert g.total > 0


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def graph_to_edgelist(g: Graph) -> EdgeList:
    """Collapse a Graph back to one entry per undirected edge (u <= v)."""
    src = arc_sources(g)
    keep = src <= g.targets
    entries = [
        (int(u), int(v), float(w))
        for u, v, w in zip(src[keep], g.targets[keep], g.weights[keep])
    ]
    return EdgeList(n=g.n, entries=entries)


def save_edgelist(edges: EdgeList, path: str) -> None:
    """Write an EdgeList in the text format parse_edgelist reads back."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n {edges.n}\n")
        for u, v, w in edges.entries:
            fh.write(f"{u} {v} {w!r}\n")
