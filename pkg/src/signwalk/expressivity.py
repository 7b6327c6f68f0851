"""Separation power of the three structural node encodings.

Three ways of summarizing a signed graph are compared: signed
shortest-path profiles, exhaustive non-backtracking walk reach profiles,
and a color-refinement scheme that tracks balanced and unbalanced
relations. Each produces a label-free signature, so two graphs compare
equal exactly when the encoding cannot tell them apart.

The shipped fixture pairs are six-node graphs built to sit between the
encodings: one encoding sees identical signatures while the walk profile
separates them.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .encoding import shortest_path_signed_encoding
from .errors import ConfigError
from .graph import SignedGraph, load_edge_list

_WORK_CAP = 10_000_000

_SIGN_CODE = {frozenset((1,)): 1, frozenset((-1,)): -1, frozenset((1, -1)): 0}


def _walk_work_estimate(graph: SignedGraph, sources: int) -> int:
    directed = graph.num_edges
    return 4 * (directed + 1) * sources


def node_walk_profile(graph: SignedGraph, node: int,
                      max_len: int | None = None):
    """Reach profile of one node under non-backtracking signed walks.

    For every other node the profile holds ``(depth, sign)`` where depth is
    the minimal walk length reaching it and sign is +1 or -1 when all
    minimal walks agree, 0 when both signs occur at the minimal depth.
    Unreached nodes hold ``(max_len + 1, 0)``. The second element is the
    same pair for walks returning to the start, so a lone negative
    triangle reports ``(3, -1)`` for itself.

    Walks may revisit nodes, they only never reverse the edge just taken,
    so minimal depths come from a breadth-first sweep over
    ``(node, previous, sign)`` states rather than walk enumeration.
    """
    n = graph.num_nodes
    if max_len is None:
        max_len = 2 * n
    if _walk_work_estimate(graph, 1) > _WORK_CAP:
        raise ConfigError("graph too large for exhaustive walk profiles")
    neighbors = graph.undirected_neighbors
    first: dict = {}
    signs: dict = {}
    self_first = None
    self_signs: set = set()
    seen = set()
    frontier = [(int(v), node, graph.sign_of(node, int(v)))
                for v in neighbors[node]]
    depth = 1
    while frontier and depth <= max_len:
        nxt = []
        for v, prev, sg in frontier:
            if v == node:
                if self_first is None:
                    self_first = depth
                if self_first == depth:
                    self_signs.add(sg)
            else:
                if v not in first:
                    first[v] = depth
                    signs[v] = set()
                if first[v] == depth:
                    signs[v].add(sg)
            for w in neighbors[v]:
                w = int(w)
                if w == prev:
                    continue
                state = (w, v, sg * graph.sign_of(v, w))
                if state not in seen:
                    seen.add(state)
                    nxt.append(state)
        frontier = nxt
        depth += 1
    unreached = (max_len + 1, 0)
    targets = tuple(sorted(
        (first[j], _SIGN_CODE[frozenset(signs[j])]) if j in first else unreached
        for j in range(n) if j != node))
    self_part = ((self_first, _SIGN_CODE[frozenset(self_signs)])
                 if self_first is not None else unreached)
    return targets, self_part


def walk_signature(graph: SignedGraph, max_len: int | None = None):
    """Sorted multiset of all node walk profiles; label-free."""
    if _walk_work_estimate(graph, graph.num_nodes) > _WORK_CAP:
        raise ConfigError("graph too large for exhaustive walk profiles")
    return tuple(sorted(node_walk_profile(graph, i, max_len)
                        for i in range(graph.num_nodes)))


def spe_signature(graph: SignedGraph, m_max: int | None = None):
    """Sorted multiset of sorted signed shortest-path rows."""
    enc = shortest_path_signed_encoding(graph, m_max=m_max)
    return tuple(sorted(tuple(sorted(row)) for row in enc.tolist()))


def _wl_round(graph: SignedGraph, labels):
    neighbors = graph.undirected_neighbors
    structs = []
    for i in range(graph.num_nodes):
        b_i, u_i = labels[i]
        b_side, u_side = [], []
        for v in neighbors[i]:
            v = int(v)
            b_v, u_v = labels[v]
            if graph.sign_of(i, v) > 0:
                b_side.append(b_v)
                u_side.append(u_v)
            else:
                b_side.append(u_v)
                u_side.append(b_v)
        structs.append(((0, b_i, tuple(sorted(b_side))),
                        (1, u_i, tuple(sorted(u_side)))))
    return structs


def wl_signatures(graph_a: SignedGraph, graph_b: SignedGraph,
                  rounds: int | None = None):
    """Stable color-refinement signatures of two graphs, jointly canonical.

    Each node carries a pair of colors playing the balanced and unbalanced
    roles; a positive edge passes a neighbor's colors through while a
    negative edge swaps them. Fresh colors are assigned from a pool shared
    by both graphs per round, so the returned sorted color multisets are
    directly comparable.
    """
    if rounds is None:
        rounds = graph_a.num_nodes + graph_b.num_nodes
    la = [(0, 1)] * graph_a.num_nodes
    lb = [(0, 1)] * graph_b.num_nodes
    distinct = 1
    for _ in range(rounds):
        sa = _wl_round(graph_a, la)
        sb = _wl_round(graph_b, lb)
        pool = sorted({part for s in sa + sb for part in s})
        lookup = {struct: i for i, struct in enumerate(pool)}
        la = [(lookup[p], lookup[q]) for p, q in sa]
        lb = [(lookup[p], lookup[q]) for p, q in sb]
        now = len(set(la) | set(lb))
        if now == distinct:
            break
        distinct = now
    return tuple(sorted(la)), tuple(sorted(lb))


def compare_encodings(graph_a: SignedGraph, graph_b: SignedGraph,
                      max_len: int | None = None,
                      m_max: int | None = None) -> dict:
    """Which encodings can tell two graphs apart.

    Returns ``{"spe": ..., "walk": ..., "wl": ...}`` with each value
    ``"same"`` or ``"different"``. Shared caps keep the comparison fair:
    shortest-path encodings use one ``m_max`` for both graphs and walk
    profiles one ``max_len``.
    """
    n = max(graph_a.num_nodes, graph_b.num_nodes)
    if m_max is None:
        m_max = n
    if max_len is None:
        max_len = 2 * n
    wl_a, wl_b = wl_signatures(graph_a, graph_b)

    def verdict(same):
        return "same" if same else "different"

    return {
        "spe": verdict(spe_signature(graph_a, m_max) == spe_signature(graph_b, m_max)),
        "walk": verdict(walk_signature(graph_a, max_len)
                        == walk_signature(graph_b, max_len)),
        "wl": verdict(wl_a == wl_b),
    }


def load_fixture_pair(kind: str):
    """Load a shipped blind pair, ``kind`` in {"spe_blind", "wl_blind"}."""
    if kind not in ("spe_blind", "wl_blind"):
        raise ConfigError(f"unknown fixture pair {kind!r}")
    out = []
    for suffix in ("a", "b"):
        ref = resources.files("signwalk").joinpath(
            "fixtures", f"{kind}_pair_{suffix}.tsv")
        with resources.as_file(ref) as path:
            out.append(load_edge_list(path))
    return tuple(out)
