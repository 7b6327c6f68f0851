"""Node features and attention-bias encodings derived from graph structure.

Three structural signals feed the encoder:

* spectral features from a truncated SVD of the signed adjacency,
* a degree-normalized copy of the signed adjacency used as an additive
  attention bias,
* signed random-walk distances turned into a learnable-weighted bias.

Everything here is plain numpy; the model wraps the learnable parts in
autodiff tensors but reuses these routines for the constant parts.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError, EdgeListError
from .graph import SignedGraph, graph_checksum

_WALKSET_FORMAT_VERSION = 1
_STREAM_WALKS = 1


def spectral_init(graph: SignedGraph, dim: int) -> np.ndarray:
    """Spectral node features: rows of ``U_d  sqrt(S_d)`` from a rank-``dim``
    truncated SVD of the signed adjacency.

    Each left singular vector's sign is fixed by making its largest-magnitude
    entry positive, so the output is deterministic. Uses a dense
    decomposition; fine at desk scale, minutes at tens of thousands of nodes.

    Raises
    ------
    ConfigError
        If ``dim`` exceeds the number of nodes.
    """
    n = graph.num_nodes
    if dim > n:
        raise ConfigError(f"spectral dim {dim} exceeds node count {n}")
    if dim < 1:
        raise ConfigError(f"spectral dim must be positive, got {dim}")
    A = graph.adjacency.toarray()
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    u = u[:, :dim].copy()
    s = s[:dim]
    for k in range(dim):
        pivot = np.argmax(np.abs(u[:, k]))
        if u[pivot, k] < 0:
            u[:, k] = -u[:, k]
    return u * np.sqrt(s)


def centrality_encode(x: np.ndarray, profile, pos_table: np.ndarray,
                      neg_table: np.ndarray) -> np.ndarray:
    """Add per-degree embeddings to node features.

    ``pos_table`` and ``neg_table`` have shape ``(max_degree + 1, dim)``;
    degrees beyond ``max_degree`` share the last row.
    """
    if pos_table.shape != neg_table.shape:
        raise ConfigError("degree tables must have matching shapes")
    if x.shape[1] != pos_table.shape[1]:
        raise ConfigError(
            f"feature dim {x.shape[1]} does not match table dim {pos_table.shape[1]}")
    cap = pos_table.shape[0] - 1
    pos_idx = np.clip(profile.pos, 0, cap)
    neg_idx = np.clip(profile.neg, 0, cap)
    return x + pos_table[pos_idx] + neg_table[neg_idx]


def adjacency_bias(graph: SignedGraph) -> np.ndarray:
    """Degree-normalized signed adjacency, ``D^{-1/2} A D^{-1/2}``.

    ``D`` holds row sums of ``|A|``. Rows and columns of degree-zero nodes
    are left at zero.
    """
    A = graph.adjacency.toarray()
    deg = np.abs(A).sum(axis=1)
    inv_sqrt = np.zeros_like(deg)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    return inv_sqrt[:, None] * A * inv_sqrt[None, :]


@dataclass(frozen=True)
class WalkSet:
    """Sampled random walks, ``walks[i, k, t]`` is the node at step ``t`` of
    walk ``k`` started at node ``i``; unused tail positions hold -1."""

    walks: np.ndarray
    seed: int
    graph_checksum: str

    @property
    def num_walks(self) -> int:
        return self.walks.shape[1]

    @property
    def walk_len(self) -> int:
        return self.walks.shape[2] - 1


def sample_signed_walks(graph: SignedGraph, num_walks: int, walk_len: int,
                        seed: int) -> WalkSet:
    """Sample ``num_walks`` walks of ``walk_len`` steps from every node.

    Walks move on the undirected view of the graph and are non-backtracking:
    the previous node is excluded from the candidates unless it is the only
    neighbor. Only an isolated start truncates a walk. Each ``(node, walk)``
    slot draws from its own seeded stream, so a walk is reproducible on its
    own and the set is invariant to sampling order.
    """
    if num_walks < 1 or walk_len < 1:
        raise ConfigError("num_walks and walk_len must be positive")
    n = graph.num_nodes
    neighbors = graph.undirected_neighbors
    walks = np.full((n, num_walks, walk_len + 1), -1, dtype=np.int64)
    for i in range(n):
        nbrs_i = neighbors[i]
        for k in range(num_walks):
            walks[i, k, 0] = i
            if len(nbrs_i) == 0:
                continue
            rng = np.random.default_rng(
                np.random.SeedSequence(seed, spawn_key=(_STREAM_WALKS, i, k)))
            prev = -1
            cur = i
            for t in range(1, walk_len + 1):
                cand = neighbors[cur]
                if len(cand) > 1 and prev >= 0:
                    cand = cand[cand != prev]
                nxt = int(cand[rng.integers(len(cand))])
                walks[i, k, t] = nxt
                prev, cur = cur, nxt
    return WalkSet(walks=walks, seed=seed, graph_checksum=graph_checksum(graph))


def signed_walk_distance(walk: np.ndarray, target: int, graph: SignedGraph,
                         m_max: int) -> int:
    """Signed distance from a walk's start to ``target`` along that walk.

    The distance is ``(product of edge signs between the two positions)
    times (position gap)``, minimized over the gap across all occurrence
    pairs of the start node and the target. Ties pick the earliest target
    position, then the earliest start position. A start-to-itself distance
    is 0; a target that never occurs gets ``m_max + 1``.
    """
    steps = walk[walk >= 0]
    start = int(steps[0])
    # prefix sign products, prefix[t] covers edges up to position t
    prefix = np.ones(len(steps), dtype=np.int64)
    for t in range(1, len(steps)):
        s = graph.sign_of(int(steps[t - 1]), int(steps[t]))
        if s == 0:
            raise EdgeListError(
                f"walk step ({steps[t - 1]}, {steps[t]}) is not an edge")
        prefix[t] = prefix[t - 1] * s
    occ_start = np.flatnonzero(steps == start)
    occ_target = np.flatnonzero(steps == target)
    if len(occ_target) == 0:
        return m_max + 1
    best = None
    for nn in occ_target:
        for mm in occ_start:
            key = (abs(int(mm) - int(nn)), int(nn), int(mm))
            if best is None or key < best:
                best = key
    gap, nn, mm = best
    return int(prefix[mm] * prefix[nn]) * gap


@dataclass(frozen=True)
class WalkDistances:
    """Per-walk signed distances between all node pairs.

    ``psi[k, i, j]`` is the signed distance from ``i`` to ``j`` along the
    ``k``-th walk started at ``i``; pairs that never co-occur hold
    ``m_max + 1``. Stored as int16; the float64 inverse-distance stack is
    materialized lazily (zero where the distance is zero).
    """

    psi: np.ndarray
    m_max: int

    @cached_property
    def inverse(self) -> np.ndarray:
        inv = np.zeros(self.psi.shape, dtype=np.float64)
        nz = self.psi != 0
        inv[nz] = 1.0 / self.psi[nz]
        return inv


def walk_distances(walkset: WalkSet, graph: SignedGraph,
                   m_max: int | None = None) -> WalkDistances:
    """Compute the signed-distance stack for every walk in a set."""
    if m_max is None:
        m_max = walkset.walk_len
    if not 0 < m_max + 1 <= np.iinfo(np.int16).max:
        raise ConfigError(f"m_max {m_max} out of range")
    n, r, _ = walkset.walks.shape
    psi = np.full((r, n, n), m_max + 1, dtype=np.int16)
    for i in range(n):
        for k in range(r):
            walk = walkset.walks[i, k]
            steps = walk[walk >= 0]
            prefix = np.ones(len(steps), dtype=np.int64)
            ok = True
            for t in range(1, len(steps)):
                s = graph.sign_of(int(steps[t - 1]), int(steps[t]))
                if s == 0:
                    raise EdgeListError(
                        f"walk step ({steps[t - 1]}, {steps[t]}) is not an edge")
                prefix[t] = prefix[t - 1] * s
            occ_start = np.flatnonzero(steps == i)
            # earliest position and best gap per distinct node in the walk
            best: dict = {}
            for nn, node in enumerate(steps):
                node = int(node)
                for mm in occ_start:
                    key = (abs(int(mm) - nn), nn, int(mm))
                    if node not in best or key < best[node]:
                        best[node] = key
            for node, (gap, nn, mm) in best.items():
                psi[k, i, node] = int(prefix[mm] * prefix[nn]) * gap
    return WalkDistances(psi=psi, m_max=m_max)


def walk_bias(dists: WalkDistances, weights: np.ndarray) -> np.ndarray:
    """Weighted sum of inverse walk distances, one weight per walk index."""
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (dists.psi.shape[0],):
        raise ConfigError(
            f"need {dists.psi.shape[0]} walk weights, got shape {weights.shape}")
    return np.tensordot(weights, dists.inverse, axes=1)


def shortest_path_signed_encoding(graph: SignedGraph,
                                  m_max: int | None = None) -> np.ndarray:
    """Signed shortest-path matrix on the undirected view.

    Entry ``(i, j)`` is the BFS distance from ``i`` to ``j`` times the
    product of edge signs along the BFS tree path (ties between equal-length
    paths resolve to the lexicographically earliest parent). Unreachable
    pairs hold ``m_max + 1``; the diagonal is 0.
    """
    n = graph.num_nodes
    if m_max is None:
        m_max = n
    neighbors = graph.undirected_neighbors
    out = np.full((n, n), m_max + 1, dtype=np.int64)
    for src in range(n):
        dist = np.full(n, -1, dtype=np.int64)
        sign = np.zeros(n, dtype=np.int64)
        dist[src], sign[src] = 0, 1
        frontier = [src]
        while frontier:
            nxt = []
            for u in frontier:
                for v in neighbors[u]:
                    if dist[v] == -1:
                        dist[v] = dist[u] + 1
                        sign[v] = sign[u] * graph.sign_of(int(u), int(v))
                        nxt.append(int(v))
            frontier = nxt
        reached = dist >= 0
        out[src, reached] = dist[reached] * sign[reached]
    return out


def assemble_attention_bias(adjacency_part: np.ndarray,
                            walk_part: np.ndarray) -> np.ndarray:
    """Combine bias components into the additive attention bias."""
    if adjacency_part.shape != walk_part.shape:
        raise ConfigError(
            f"bias shapes differ: {adjacency_part.shape} vs {walk_part.shape}")
    return adjacency_part + walk_part


def save_walkset(walkset: WalkSet, path) -> None:
    """Persist a walk set with a versioned header for cache reuse."""
    np.savez(path,
             format_version=np.int64(_WALKSET_FORMAT_VERSION),
             seed=np.int64(walkset.seed),
             graph_checksum=np.array(walkset.graph_checksum),
             walks=walkset.walks)


def load_walkset(path, expected_checksum: str | None = None) -> WalkSet:
    """Load a walk set saved by :func:`save_walkset`.

    When ``expected_checksum`` is given the stored graph hash must match,
    which keeps a stale cache from silently feeding walks of a different
    graph into training.
    """
    with np.load(path) as data:
        version = int(data["format_version"])
        if version != _WALKSET_FORMAT_VERSION:
            raise ConfigError(f"unsupported walk cache version {version}")
        checksum = str(data["graph_checksum"])
        if expected_checksum is not None and checksum != expected_checksum:
            raise ConfigError("walk cache was built for a different graph")
        return WalkSet(walks=data["walks"], seed=int(data["seed"]),
                       graph_checksum=checksum)
