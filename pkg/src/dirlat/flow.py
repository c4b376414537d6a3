"""Exact max-flow / min-cut (Edmonds-Karp over rationals)."""
from __future__ import annotations

from collections import deque
from fractions import Fraction

from .errors import PreconditionError


def max_flow_min_cut(edges, source, sink):
    """Maximum ``source``-``sink`` flow over exact capacities.

    ``edges`` is an iterable of ``(u, v, capacity)`` or a mapping
    ``{(u, v): capacity}``; parallel arcs are merged. Returns
    ``(value, flow, cut)`` where ``flow`` maps arcs to their flow and ``cut``
    is the source side of a minimum cut (nodes reachable in the residual graph).
    """
    if source == sink:
        raise PreconditionError("source and sink must differ")
    if hasattr(edges, "items"):
        edges = ((u, v, c) for (u, v), c in edges.items())
    cap = {}
    adj = {source: set(), sink: set()}
    for u, v, c in edges:
        c = Fraction(c)
        if c < 0:
            raise PreconditionError(f"negative capacity on {(u, v)}")
        if u == v:
            continue
        cap[(u, v)] = cap.get((u, v), Fraction(0)) + c
        cap.setdefault((v, u), Fraction(0))
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    order = {u: sorted(nbrs, key=repr) for u, nbrs in adj.items()}
    flow = {a: Fraction(0) for a in cap}
    value = Fraction(0)
    while True:
        parent = {source: None}
        queue = deque([source])
        while queue and sink not in parent:
            u = queue.popleft()
            for v in order[u]:
                if v not in parent and cap[(u, v)] - flow[(u, v)] > 0:
                    parent[v] = u
                    queue.append(v)
        if sink not in parent:
            break
        push = None
        v = sink
        while parent[v] is not None:
            u = parent[v]
            r = cap[(u, v)] - flow[(u, v)]
            push = r if push is None or r < push else push
            v = u
        v = sink
        while parent[v] is not None:
            u = parent[v]
            flow[(u, v)] += push
            flow[(v, u)] -= push
            v = u
        value += push
    net = {a: f for a, f in flow.items() if f > 0}
    return value, net, frozenset(parent)


def cut_capacity(edges, side):
    """Capacity of arcs leaving ``side``."""
    if hasattr(edges, "items"):
        edges = ((u, v, c) for (u, v), c in edges.items())
    return sum((Fraction(c) for u, v, c in edges if u in side and v not in side), Fraction(0))
