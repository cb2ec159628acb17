"""Generic best-first search: (weighted) A* and independent multi-heuristic A*.

Both engines are generic over the state type. Callers supply

* ``successors(s)`` yielding ``(child, edge)`` pairs,
* ``edge_cost(s, child, edge)`` returning a non-negative cost,
* ``is_goal(s)``,
* optionally ``key(s)``: a hashable, orderable duplicate-detection key.

OPEN is a binary heap with lazy deletion. Ties on f are broken toward larger g,
then toward the smaller key, so runs are reproducible.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

CHECK_EVERY = 64  # expansions between clock checks


@dataclass
class SearchResult:
    found: bool
    path: List[Any] = field(default_factory=list)
    edges: List[Any] = field(default_factory=list)
    cost: float = math.inf
    expansions: int = 0
    wall_time: float = 0.0
    timed_out: bool = False
    queue: int = 0  # MHA*: queue whose search produced the path

    def __bool__(self):
        return self.found


def _identity(s):
    return s


def _backtrack(k, bp, states):
    path, edges = [], []
    while k is not None:
        path.append(states[k])
        parent, edge = bp[k]
        if parent is not None:
            edges.append(edge)
        k = parent
    path.reverse()
    edges.reverse()
    return path, edges


def astar(start, is_goal: Callable[[Any], bool], successors: Callable[[Any], Iterable],
          edge_cost: Callable[[Any, Any, Any], float], h: Optional[Callable[[Any], float]] = None,
          w: float = 1.0, key: Callable[[Any], Hashable] = _identity,
          deadline: Optional[float] = None, max_expansions: Optional[int] = None,
          on_expand: Optional[Callable[[Any], None]] = None) -> SearchResult:
    """Weighted A* (``h=None`` gives Dijkstra). ``deadline`` is a ``time.perf_counter`` value."""
    if w < 1:
        raise ValueError("w must be >= 1")
    t0 = time.perf_counter()
    hf = h or (lambda s: 0.0)
    k0 = key(start)
    g: Dict[Hashable, float] = {k0: 0.0}
    bp: Dict[Hashable, Tuple[Optional[Hashable], Any]] = {k0: (None, None)}
    states = {k0: start}
    closed = set()
    open_ = [(w * hf(start), -0.0, k0)]
    expansions = 0
    while open_:
        f, neg_g, k = heapq.heappop(open_)
        if k in closed or -neg_g != g[k]:
            continue
        s = states[k]
        if is_goal(s):
            path, edges = _backtrack(k, bp, states)
            return SearchResult(True, path, edges, g[k], expansions, time.perf_counter() - t0)
        closed.add(k)
        expansions += 1
        if on_expand is not None:
            on_expand(s)
        if expansions % CHECK_EVERY == 0 and deadline is not None and time.perf_counter() >= deadline:
            return SearchResult(False, expansions=expansions, wall_time=time.perf_counter() - t0,
                                timed_out=True)
        if max_expansions is not None and expansions >= max_expansions:
            return SearchResult(False, expansions=expansions, wall_time=time.perf_counter() - t0,
                                timed_out=True)
        gs = g[k]
        for child, edge in successors(s):
            kc = key(child)
            if kc in closed:
                continue
            c = edge_cost(s, child, edge)
            if c < 0:
                raise ValueError(f"negative edge cost {c}; shift costs before searching")
            gc = gs + c
            if gc < g.get(kc, math.inf):
                g[kc] = gc
                bp[kc] = (k, edge)
                states[kc] = child
                heapq.heappush(open_, (gc + w * hf(child), -gc, kc))
    return SearchResult(False, expansions=expansions, wall_time=time.perf_counter() - t0)


class _Queue:
    """One independent search of IMHA*: its own g, back-pointers, OPEN and CLOSED."""

    def __init__(self, h, w1, key):
        self.h, self.w1, self.key = h, w1, key
        self.g: Dict[Hashable, float] = {}
        self.bp: Dict[Hashable, Tuple[Optional[Hashable], Any]] = {}
        self.open: List[Tuple[float, float, Hashable]] = []
        self.closed = set()
        self.goal_g = math.inf
        self.goal_key: Optional[Hashable] = None

    def push(self, k, s, gval):
        heapq.heappush(self.open, (gval + self.w1 * self.h(s), -gval, k))

    def min_key(self) -> float:
        while self.open:
            f, neg_g, k = self.open[0]
            if k in self.closed or -neg_g != self.g[k]:
                heapq.heappop(self.open)
                continue
            return f
        return math.inf


def mhastar(start, is_goal, successors, edge_cost, h_anchor: Callable[[Any], float],
            h_inadmissible: Sequence[Callable[[Any], float]] = (), w1: float = 2.0, w2: float = 2.0,
            key: Callable[[Any], Hashable] = _identity, deadline: Optional[float] = None,
            max_expansions: Optional[int] = None,
            on_expand: Optional[Callable[[Any, int], None]] = None) -> SearchResult:
    """Independent multi-heuristic A* with round-robin queue scheduling.

    An inadmissible queue is expanded only while its minimum key is within ``w2`` of
    the anchor's, which keeps the returned cost within ``w1 * w2`` of optimal.
    """
    if w1 < 1 or w2 < 1:
        raise ValueError("w1 and w2 must be >= 1")
    t0 = time.perf_counter()
    queues = [_Queue(h_anchor, w1, key)] + [_Queue(h, w1, key) for h in h_inadmissible]
    states: Dict[Hashable, Any] = {}
    k0 = key(start)
    states[k0] = start
    start_goal = is_goal(start)
    for q in queues:
        q.g[k0] = 0.0
        q.bp[k0] = (None, None)
        q.push(k0, start, 0.0)
        if start_goal:
            q.goal_g, q.goal_key = 0.0, k0
    expansions = 0

    def done(i):
        q = queues[i]
        path, edges = _backtrack(q.goal_key, q.bp, states)
        return SearchResult(True, path, edges, q.goal_g, expansions, time.perf_counter() - t0, queue=i)

    def expand(i):
        nonlocal expansions
        q = queues[i]
        f, neg_g, k = heapq.heappop(q.open)
        q.closed.add(k)
        expansions += 1
        s = states[k]
        if on_expand is not None:
            on_expand(s, i)
        gs = q.g[k]
        for child, edge in successors(s):
            kc = key(child)
            if kc in q.closed:
                continue
            c = edge_cost(s, child, edge)
            if c < 0:
                raise ValueError(f"negative edge cost {c}; shift costs before searching")
            gc = gs + c
            if gc < q.g.get(kc, math.inf):
                q.g[kc] = gc
                q.bp[kc] = (k, edge)
                if kc not in states:
                    states[kc] = child
                if is_goal(child):
                    if gc < q.goal_g:
                        q.goal_g, q.goal_key = gc, kc
                else:
                    q.push(kc, child, gc)

    n = len(queues)
    while True:
        anchor_min = queues[0].min_key()
        if anchor_min == math.inf:
            break
        for i in range(1, n) if n > 1 else (0,):
            anchor_min = queues[0].min_key()
            if anchor_min == math.inf:
                break
            qi = queues[i]
            mi = qi.min_key() if i else anchor_min
            if i and mi <= w2 * anchor_min:
                if qi.goal_g <= mi:
                    return done(i)
                expand(i)
            else:
                if queues[0].goal_g <= anchor_min:
                    return done(0)
                expand(0)
            if expansions % CHECK_EVERY == 0 and deadline is not None and time.perf_counter() >= deadline:
                return SearchResult(False, expansions=expansions, wall_time=time.perf_counter() - t0,
                                    timed_out=True)
            if max_expansions is not None and expansions >= max_expansions:
                return SearchResult(False, expansions=expansions, wall_time=time.perf_counter() - t0,
                                    timed_out=True)
    # OPEN exhausted: any goal found is optimal within the searched graph
    best = min(range(n), key=lambda i: (queues[i].goal_g, i))
    if queues[best].goal_g < math.inf:
        return done(best)
    return SearchResult(False, expansions=expansions, wall_time=time.perf_counter() - t0)
