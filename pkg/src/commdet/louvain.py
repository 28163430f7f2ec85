"""Sequential Louvain: greedy local moving, graph aggregation, and the pass loop.

Local moving comes in two flavors.  Asynchronous sweeps apply each accepted
move immediately, so later vertices in the same iteration see it (Gauss-
Seidel style).  Synchronous sweeps decide every move against a snapshot of
the iteration start and apply the non-conflicting local maxima together at
the end (Jacobi style); applied-together moves may realize less than the
sum of their decision-time gains, so modularity is always recomputed
exactly between passes.

After each pass the convergence tolerance is divided by a decline factor
(threshold scaling), trading precision in late passes for speed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .community import (
    Dendrogram,
    modularity,
    move_gain,
    neighbor_community_weights,
    normalize_labels,
    singleton_assignment,
)
from .graph import Graph, _graph_from_arcs, arc_sources

__all__ = [
    "Config",
    "PassStats",
    "Report",
    "SweepResult",
    "scan_neighbor_communities",
    "best_move",
    "local_moving",
    "aggregate_graph",
    "louvain",
    "sweep_tolerance",
]

# threshold scaling never drops the tolerance below this, avoiding denormals
TOLERANCE_FLOOR = 1e-16

MODES = ("async", "sync")


@dataclass
class Config:
    """Run parameters for the sequential engine."""

    tolerance_initial: float = 0.01
    tolerance_decline_factor: float = 10.0
    pass_tolerance: float = 0.0
    max_passes: int = 20
    max_iterations_per_pass: int = 500
    mode: str = "async"

    def __post_init__(self) -> None:
        if not self.tolerance_initial > 0:
            raise ValueError("tolerance must be > 0")
        if self.tolerance_decline_factor < 1:
            raise ValueError("tolerance_decline_factor must be >= 1")
        if self.pass_tolerance < 0:
            raise ValueError("pass_tolerance must be >= 0")
        if self.max_passes < 1:
            raise ValueError("max_passes must be >= 1")
        if self.max_iterations_per_pass < 1:
            raise ValueError("max_iterations_per_pass must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


@dataclass
class PassStats:
    """Statistics for one pass (local moving + aggregation)."""

    index: int
    vertices: int
    iterations: int
    q_after: float
    local_ms: float
    agg_ms: float
    # per-iteration counts of moves whose target changed under them; only
    # the multi-threaded engine fills this in
    conflicts: list[int] = field(default_factory=list)


@dataclass
class Report:
    """Whole-run statistics returned alongside the dendrogram."""

    passes: list[PassStats]
    final_q: float
    total_iterations: int
    wall_ms: float
    truncated: bool = False
    threads: int = 1
    max_sigma_drift: float = 0.0

    @property
    def n_passes(self) -> int:
        return len(self.passes)


def scan_neighbor_communities(g: Graph, labels: np.ndarray, u: int) -> dict[int, float]:
    """Map each community adjacent to u to the weight of u's arcs into it.

    Self-loop arcs are excluded; u's own community is always present, with
    value 0.0 when no non-loop neighbor lives there.
    """
    return neighbor_community_weights(g, labels, u)[0]


def best_move(
    scan: dict[int, float],
    sigma_tot,
    k_u: float,
    from_c: int,
    m: float,
) -> tuple[int, float]:
    """Pick the neighbor community with the highest move gain.

    Returns (community, gain).  When no candidate improves modularity the
    vertex stays put and the result is (from_c, 0.0).  Exact gain ties are
    broken toward the lowest community id.
    """
    k_from = scan[from_c]
    s_from_wo = sigma_tot[from_c] - k_u
    best_c = from_c
    best_dq = 0.0
    for c, k_c in scan.items():
        if c == from_c:
            continue
        dq = move_gain(k_c, k_from, k_u, sigma_tot[c], s_from_wo, m)
        if dq > best_dq or (dq == best_dq and dq > 0.0 and c < best_c):
            best_dq = dq
            best_c = c
    return best_c, best_dq


def _sweep_range(
    lo_v: int,
    hi_v: int,
    offs: list[int],
    tgt: list[int],
    wts: list[float],
    degs: list[float],
    labs: list[int],
    sigma_tot: list[float],
    m: float,
    lock=None,
) -> tuple[float, int, int]:
    """Greedy move sweep over vertices [lo_v, hi_v) in ascending id order.

    labs and sigma_tot are updated as moves are accepted.  With a lock the
    label write and the two sigma_tot adjustments of each move happen as
    one indivisible block (the shared-state contract of the threaded
    engine); without one this is the plain sequential inner loop.  Returns
    (summed gain, move count, conflict count).
    """
    gain = 0.0
    moves = 0
    conflicts = 0
    for u in range(lo_v, hi_v):
        own = labs[u]
        k_map = {own: 0.0}
        for k in range(offs[u], offs[u + 1]):
            v = tgt[k]
            if v == u:
                continue
            c = labs[v]
            if c in k_map:
                k_map[c] += wts[k]
            else:
                k_map[c] = wts[k]
        k_u = degs[u]
        to_c, dq = best_move(k_map, sigma_tot, k_u, own, m)
        if dq > 0.0 and to_c != own:
            if lock is None:
                sigma_tot[own] -= k_u
                sigma_tot[to_c] += k_u
                labs[u] = to_c
            else:
                s_seen = sigma_tot[to_c]
                with lock:
                    if sigma_tot[to_c] != s_seen:
                        conflicts += 1
                    sigma_tot[own] -= k_u
                    sigma_tot[to_c] += k_u
                    labs[u] = to_c
            gain += dq
            moves += 1
    return gain, moves, conflicts


def local_moving(
    g: Graph,
    labels: np.ndarray,
    tolerance: float,
    mode: str = "async",
    max_iterations: int = 500,
) -> tuple[int, float, int]:
    """Run the local-moving phase until an iteration gains <= tolerance.

    labels is updated in place.  Returns (iterations, cumulative gain,
    accepted moves).  The gain is the sum of decision-time move gains; in
    async mode it matches the realized modularity increase, in sync mode
    it can overstate it.  Hitting max_iterations stops the loop without
    raising.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    labs = labels.tolist()
    sigma_tot = np.bincount(labels, weights=g.degrees, minlength=g.n).tolist()
    offs = g.offsets.tolist()
    tgt = g.targets.tolist()
    wts = g.weights.tolist()
    degs = g.degrees.tolist()
    m = g.total / 2.0

    iterations = 0
    total_gain = 0.0
    total_moves = 0
    while True:
        iterations += 1
        if mode == "async":
            iter_gain, iter_moves, _ = _sweep_range(
                0, g.n, offs, tgt, wts, degs, labs, sigma_tot, m
            )
        else:
            iter_gain, iter_moves = _sync_iteration(
                g, offs, tgt, wts, degs, labs, sigma_tot, m
            )
        total_gain += iter_gain
        total_moves += iter_moves
        if iter_gain <= tolerance or iterations >= max_iterations:
            break

    labels[:] = labs
    return iterations, total_gain, total_moves


def _sync_iteration(
    g: Graph,
    offs: list[int],
    tgt: list[int],
    wts: list[float],
    degs: list[float],
    labs: list[int],
    sigma_tot: list[float],
    m: float,
) -> tuple[float, int]:
    """One Jacobi-style iteration: decide against a snapshot, apply together.

    Applying every positive decision simultaneously lets adjacent vertices
    swap communities forever (the claimed gains stay positive while the
    realized gain is zero), so only decisions that are local maxima go
    through: a vertex moves when no neighbor claims a strictly larger
    gain, with exact ties won by the lower vertex id.  The filter reads
    nothing beyond the snapshot, keeping every decision a pure function of
    the iteration-start state.
    """
    snap_labs = list(labs)
    snap_sigma = list(sigma_tot)
    n = g.n
    want = [-1] * n
    dqs = [0.0] * n
    for u in range(n):
        own = snap_labs[u]
        k_map = {own: 0.0}
        for k in range(offs[u], offs[u + 1]):
            v = tgt[k]
            if v == u:
                continue
            c = snap_labs[v]
            if c in k_map:
                k_map[c] += wts[k]
            else:
                k_map[c] = wts[k]
        to_c, dq = best_move(k_map, snap_sigma, degs[u], own, m)
        if dq > 0.0 and to_c != own:
            want[u] = to_c
            dqs[u] = dq

    gain = 0.0
    moves = 0
    for u in range(n):
        to_c = want[u]
        if to_c < 0:
            continue
        du = dqs[u]
        blocked = False
        for k in range(offs[u], offs[u + 1]):
            v = tgt[k]
            if v == u or want[v] < 0:
                continue
            dv = dqs[v]
            if dv > du or (dv == du and v < u):
                blocked = True
                break
        if blocked:
            continue
        k_u = degs[u]
        own = snap_labs[u]
        sigma_tot[own] -= k_u
        sigma_tot[to_c] += k_u
        labs[u] = to_c
        gain += du
        moves += 1
    return gain, moves


def aggregate_graph(g: Graph, labels: np.ndarray) -> tuple[Graph, np.ndarray]:
    """Collapse each community into a super-vertex.

    Inter-community arc weights merge; intra-community weight (including
    existing self-loops) becomes the super-vertex's self-loop, so the
    coarse graph scores the same modularity under singletons as the fine
    graph does under the given labels.  Returns the coarse graph and the
    normalized labels used as the dendrogram level.
    """
    mapping, n_comm = normalize_labels(labels)
    src = arc_sources(g)
    cu = mapping[src]
    cv = mapping[g.targets]
    g2 = _graph_from_arcs(n_comm, cu, cv, g.weights)
    return g2, mapping


MovePhase = Callable[[Graph, np.ndarray, float], tuple[int, float, int, list[int], float]]


def _run_passes(g: Graph, cfg: Config, move_phase: MovePhase) -> tuple[Dendrogram, Report]:
    """Shared pass loop: local moving, quality check, aggregation, repeat."""
    t_start = time.perf_counter()
    levels: list[np.ndarray] = []
    per_q: list[float] = []
    pass_stats: list[PassStats] = []
    g_cur = g
    tol = cfg.tolerance_initial
    q_prev = modularity(g_cur, singleton_assignment(g_cur.n))
    truncated = False
    max_drift = 0.0

    for pass_idx in range(cfg.max_passes):
        labels = singleton_assignment(g_cur.n)
        t0 = time.perf_counter()
        iters, _gain, moves, conflicts, drift = move_phase(g_cur, labels, tol)
        local_ms = (time.perf_counter() - t0) * 1000.0
        max_drift = max(max_drift, drift)
        if iters >= cfg.max_iterations_per_pass:
            truncated = True

        mapping, n_comm = normalize_labels(labels)
        q_now = modularity(g_cur, mapping)
        stop = (
            (q_now - q_prev) <= cfg.pass_tolerance
            or moves == 0
            or n_comm >= g_cur.n
        )
        agg_ms = 0.0
        if not stop:
            t1 = time.perf_counter()
            g_next, mapping = aggregate_graph(g_cur, mapping)
            agg_ms = (time.perf_counter() - t1) * 1000.0
        pass_stats.append(
            PassStats(
                index=pass_idx,
                vertices=g_cur.n,
                iterations=iters,
                q_after=q_now,
                local_ms=local_ms,
                agg_ms=agg_ms,
                conflicts=conflicts,
            )
        )
        if stop:
            # keep the level when it moved anything without losing quality
            # (racy or synchronous passes can end below their start; such a
            # level would put a dip in per_level_q); keep an identity level
            # for a no-move first pass so the dendrogram is never empty
            if (moves > 0 and q_now >= q_prev) or not levels:
                levels.append(mapping)
                per_q.append(q_now)
            break
        levels.append(mapping)
        per_q.append(q_now)
        g_cur = g_next
        q_prev = q_now
        tol = max(tol / cfg.tolerance_decline_factor, TOLERANCE_FLOOR)
    else:
        truncated = True

    dend = Dendrogram(levels=levels, per_level_q=per_q)
    report = Report(
        passes=pass_stats,
        final_q=per_q[-1] if per_q else q_prev,
        total_iterations=sum(p.iterations for p in pass_stats),
        wall_ms=(time.perf_counter() - t_start) * 1000.0,
        truncated=truncated,
        max_sigma_drift=max_drift,
    )
    return dend, report


def louvain(g: Graph, cfg: Config | None = None) -> tuple[Dendrogram, Report]:
    """Full sequential Louvain run; returns the dendrogram and its report."""
    cfg = cfg if cfg is not None else Config()

    def phase(gc: Graph, labels: np.ndarray, tol: float):
        iters, gain, moves = local_moving(
            gc, labels, tol, mode=cfg.mode, max_iterations=cfg.max_iterations_per_pass
        )
        return iters, gain, moves, [], 0.0

    return _run_passes(g, cfg, phase)


@dataclass
class SweepResult:
    """One grid cell of a parameter sweep."""

    params: dict
    final_q: float
    passes: int
    total_iterations: int
    wall_ms: float
    report: Report


def sweep_tolerance(
    g: Graph,
    initial_grid: list[float],
    decline_grid: list[float],
    cfg: Config | None = None,
) -> list[SweepResult]:
    """Run louvain over the cross product of initial tolerances and decline
    factors; one result row per cell, in grid order."""
    if not initial_grid or not decline_grid:
        raise ValueError("sweep grids must be non-empty")
    base = cfg if cfg is not None else Config()
    out: list[SweepResult] = []
    for init in initial_grid:
        for dec in decline_grid:
            run_cfg = replace(base, tolerance_initial=init, tolerance_decline_factor=dec)
            _, rep = louvain(g, run_cfg)
            out.append(
                SweepResult(
                    params={"tolerance": init, "decline_factor": dec},
                    final_q=rep.final_q,
                    passes=rep.n_passes,
                    total_iterations=rep.total_iterations,
                    wall_ms=rep.wall_ms,
                    report=rep,
                )
            )
    return out
