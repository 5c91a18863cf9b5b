"""Highest-label push-relabel maximum flow on a dense integer capacity matrix.

Capacities are ``int64``; all arithmetic is exact.  Discharging a node pushes
to every admissible neighbour in one vectorised step.  The gap heuristic and
periodic global relabelling (exact BFS distances to the sink, then to the
source) keep the number of relabels small on dense graphs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class FlowResult:
    value: int
    residual: np.ndarray
    source: int
    sink: int

    def source_reachable(self) -> np.ndarray:
        """Nodes reachable from the source in the residual graph (minimal source side)."""
        return _bfs(self.residual, self.source, forward=True) >= 0

    def sink_reaching(self) -> np.ndarray:
        """Nodes that can reach the sink in the residual graph."""
        return _bfs(self.residual, self.sink, forward=False) >= 0


def _bfs(residual: np.ndarray, root: int, forward: bool):
    """BFS distances from ``root`` along residual arcs (forward) or into ``root`` (backward)."""
    n = len(residual)
    dist = np.full(n, -1, dtype=np.int64)
    dist[root] = 0
    frontier = np.array([root])
    level = 0
    while frontier.size:
        level += 1
        if forward:
            hit = (residual[frontier, :] > 0).any(axis=0)
        else:
            hit = (residual[:, frontier] > 0).any(axis=1)
        new = np.flatnonzero(hit & (dist == -1))
        dist[new] = level
        frontier = new
    return dist


def max_flow(capacity: np.ndarray, source: int, sink: int) -> FlowResult:
    cap = np.asarray(capacity, dtype=np.int64)
    n = len(cap)
    if cap.shape != (n, n):
        raise ValueError("capacity must be a square matrix")
    if np.any(cap < 0):
        raise ValueError("capacities must be non-negative")
    if source == sink:
        raise ValueError("source and sink coincide")
    res = cap.copy()
    np.fill_diagonal(res, 0)
    excess = np.zeros(n, dtype=np.int64)
    height = np.zeros(n, dtype=np.int64)

    # saturate every source arc
    out = res[source].copy()
    res[source] = 0
    res[:, source] += out
    excess += out
    excess[source] = 0

    limit = 2 * n + 1
    count = np.zeros(limit + 1, dtype=np.int64)
    buckets: list[list[int]] = [[] for _ in range(limit + 1)]
    in_bucket = np.zeros(n, dtype=bool)
    top = limit

    def activate(v):
        nonlocal top
        v = int(v)
        if (v != source and v != sink and not in_bucket[v]
                and excess[v] > 0 and height[v] < limit):
            buckets[height[v]].append(v)
            in_bucket[v] = True
            top = max(top, int(height[v]))

    def global_relabel():
        nonlocal top
        to_sink = _bfs(res, sink, forward=False)
        to_source = _bfs(res, source, forward=False)
        h = np.where(to_sink >= 0, to_sink, np.where(to_source >= 0, n + to_source, limit))
        h[source] = n
        h[sink] = 0
        height[:] = h
        count[:] = np.bincount(height, minlength=limit + 1)
        for b in buckets:
            b.clear()
        in_bucket[:] = False
        top = 0
        for v in np.flatnonzero(excess > 0):
            activate(v)

    def gap(old):
        # nodes strictly between old and n can no longer reach the sink
        lifted = np.flatnonzero((height > old) & (height < n))
        count[:n] -= np.bincount(height[lifted], minlength=n)[:n]
        height[lifted] = n + 1
        count[n + 1] += len(lifted)
        for b in buckets[old + 1:n]:
            for v in b:
                in_bucket[v] = False
            b.clear()
        for v in lifted:
            activate(v)

    global_relabel()
    relabels = 0
    period = max(n, 16)

    while True:
        while top >= 0 and not buckets[top]:
            top -= 1
        if top < 0:
            break
        u = buckets[top].pop()
        in_bucket[u] = False
        while excess[u] > 0:
            row = res[u]
            adm = np.flatnonzero((row > 0) & (height == height[u] - 1))
            if adm.size:
                caps = row[adm]
                before = np.cumsum(caps) - caps
                amt = np.minimum(caps, np.maximum(excess[u] - before, 0))
                keep = amt > 0
                adm, amt = adm[keep], amt[keep]
                res[u, adm] -= amt
                res[adm, u] += amt
                excess[adm] += amt
                excess[u] -= int(amt.sum())
                for v in adm:
                    activate(v)
                if excess[u] == 0:
                    break
            old = int(height[u])
            nbr = row > 0
            new = min(int(height[nbr].min()) + 1, limit) if nbr.any() else limit
            count[old] -= 1
            height[u] = new
            count[new] += 1
            relabels += 1
            if count[old] == 0 and old < n:
                gap(old)
            if height[u] >= limit:
                break
            if relabels % period == 0:
                global_relabel()
                break
        activate(u)

    stuck = excess > 0
    stuck[[source, sink]] = False
    if stuck.any():
        raise RuntimeError("push-relabel terminated with stranded excess")
    value = int(excess[sink])
    return FlowResult(value, res, source, sink)
