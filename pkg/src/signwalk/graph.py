"""Signed directed graphs: construction, io, splits, and synthetic data.

The in-memory representation is a frozen :class:`SignedGraph` holding two
integer edge arrays (positive and negative) plus a sparse signed adjacency
matrix built on demand. Node ids are dense integers ``0 .. num_nodes - 1``;
ids appearing in an edge list are used as-is, so a file whose largest id is
``m`` yields a graph with ``m + 1`` nodes even when some ids never occur.

Edge-list file format: one edge per line, ``src dst sign`` separated by
whitespace (tabs in files we write), ``sign`` is ``1`` or ``-1``. Lines that
are blank or start with ``#`` are skipped. Duplicate identical lines are
collapsed; the same ordered pair with both signs is an error.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, EdgeListError

_SPLIT_FORMAT_VERSION = 1

# spawn-key constants so each consumer of a user seed gets its own stream
_STREAM_SPLIT = 2


def _as_edge_array(edges) -> np.ndarray:
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                     dtype=np.int64)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise EdgeListError(f"edge array must have shape (E, 2), got {arr.shape}")
    # canonical order: lexicographic, duplicates removed
    return np.unique(arr, axis=0)


@dataclass(frozen=True)
class SignedGraph:
    """Immutable signed directed graph.

    Parameters
    ----------
    num_nodes : int
        Number of nodes. Must cover every id referenced by an edge.
    pos_edges, neg_edges : array_like of shape (E, 2)
        Directed edges as ``(src, dst)`` rows. Stored lexicographically
        sorted and deduplicated.

    Notes
    -----
    Instances are treated as immutable after construction; the cached sparse
    matrix and neighbor tables must not be modified in place. Reads are safe
    from multiple threads.
    """

    num_nodes: int
    pos_edges: np.ndarray
    neg_edges: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pos_edges", _as_edge_array(self.pos_edges))
        object.__setattr__(self, "neg_edges", _as_edge_array(self.neg_edges))
        if self.num_nodes < 0:
            raise EdgeListError(f"num_nodes must be non-negative, got {self.num_nodes}")
        for name, arr in (("positive", self.pos_edges), ("negative", self.neg_edges)):
            if arr.size and arr.min() < 0:
                raise EdgeListError(f"{name} edges contain a negative node id")
            if arr.size and arr.max() >= self.num_nodes:
                raise EdgeListError(
                    f"{name} edges reference node {arr.max()} but num_nodes is {self.num_nodes}")
            if arr.size and np.any(arr[:, 0] == arr[:, 1]):
                bad = arr[arr[:, 0] == arr[:, 1]][0, 0]
                raise EdgeListError(f"self-loop on node {bad} is not allowed")
        pos_set = {tuple(e) for e in self.pos_edges}
        neg_set = {tuple(e) for e in self.neg_edges}
        both = pos_set & neg_set
        if both:
            u, v = sorted(both)[0]
            raise EdgeListError(f"edge ({u}, {v}) appears with both signs")

    @property
    def num_pos(self) -> int:
        return len(self.pos_edges)

    @property
    def num_neg(self) -> int:
        return len(self.neg_edges)

    @property
    def num_edges(self) -> int:
        return self.num_pos + self.num_neg

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Sparse signed adjacency, ``A[u, v]`` is +1, -1, or 0."""
        rows = np.concatenate([self.pos_edges[:, 0], self.neg_edges[:, 0]])
        cols = np.concatenate([self.pos_edges[:, 1], self.neg_edges[:, 1]])
        vals = np.concatenate([np.ones(self.num_pos), -np.ones(self.num_neg)])
        return sp.csr_matrix((vals, (rows, cols)),
                             shape=(self.num_nodes, self.num_nodes))

    @cached_property
    def _sign_table(self) -> dict:
        table = {}
        for u, v in self.pos_edges:
            table[(int(u), int(v))] = 1
        for u, v in self.neg_edges:
            table[(int(u), int(v))] = -1
        return table

    def sign_of(self, u: int, v: int) -> int:
        """Sign of the connection between ``u`` and ``v``.

        Checks the directed edge ``(u, v)`` first and falls back to the
        reverse direction, so symmetric graphs behave as undirected. Returns
        0 when neither direction is present.
        """
        s = self._sign_table.get((u, v))
        if s is None:
            s = self._sign_table.get((v, u), 0)
        return s

    @cached_property
    def undirected_neighbors(self) -> tuple:
        """Per-node sorted array of neighbors, ignoring edge direction."""
        sets: list = [set() for _ in range(self.num_nodes)]
        for arr in (self.pos_edges, self.neg_edges):
            for u, v in arr:
                sets[u].add(int(v))
                sets[v].add(int(u))
        return tuple(np.array(sorted(s), dtype=np.int64) for s in sets)

    @cached_property
    def is_symmetric(self) -> bool:
        """True when every edge has a reverse edge with the same sign."""
        pos = {tuple(e) for e in self.pos_edges}
        neg = {tuple(e) for e in self.neg_edges}
        return all((v, u) in pos for u, v in pos) and all((v, u) in neg for u, v in neg)

    def mirrored(self) -> "SignedGraph":
        """Return a copy with every edge present in both directions."""
        pos = np.concatenate([self.pos_edges, self.pos_edges[:, ::-1]], axis=0)
        neg = np.concatenate([self.neg_edges, self.neg_edges[:, ::-1]], axis=0)
        return SignedGraph(self.num_nodes, pos, neg)


@dataclass(frozen=True)
class DegreeProfile:
    """Per-node out-degree counts split by edge sign."""

    pos: np.ndarray
    neg: np.ndarray


def degree_profile(graph: SignedGraph) -> DegreeProfile:
    """Count outgoing positive and negative edges per node."""
    pos = np.zeros(graph.num_nodes, dtype=np.int64)
    neg = np.zeros(graph.num_nodes, dtype=np.int64)
    if graph.num_pos:
        src, counts = np.unique(graph.pos_edges[:, 0], return_counts=True)
        pos[src] = counts
    if graph.num_neg:
        src, counts = np.unique(graph.neg_edges[:, 0], return_counts=True)
        neg[src] = counts
    return DegreeProfile(pos=pos, neg=neg)


def load_edge_list(path, undirected: bool = False,
                   num_nodes: int | None = None) -> SignedGraph:
    """Parse an edge-list file into a :class:`SignedGraph`.

    Parameters
    ----------
    path : str or Path
        UTF-8 text file, one ``src dst sign`` triple per line.
    undirected : bool
        When True every edge is mirrored so the graph is symmetric.
    num_nodes : int, optional
        Explicit node count. Must be at least ``max id + 1``; useful for
        graphs with trailing isolated nodes.

    Raises
    ------
    EdgeListError
        On malformed lines, non-unit signs, negative ids, self-loops, or an
        ordered pair appearing with both signs. The message carries the
        1-based line number.
    """
    pos: list = []
    neg: list = []
    seen: dict = {}
    max_id = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise EdgeListError(
                    f"expected 'src dst sign', got {len(parts)} fields", line=lineno)
            try:
                u, v, s = int(parts[0]), int(parts[1]), int(parts[2])
            except ValueError:
                raise EdgeListError(f"non-integer field in {parts!r}", line=lineno)
            if s not in (1, -1):
                raise EdgeListError(
                    f"sign must be 1 or -1, got {parts[2]!r} (weighted edges are "
                    f"not supported)", line=lineno)
            if u < 0 or v < 0:
                raise EdgeListError(f"negative node id in {parts!r}", line=lineno)
            if u == v:
                raise EdgeListError(f"self-loop on node {u}", line=lineno)
            prev = seen.get((u, v))
            if prev is not None and prev != s:
                raise EdgeListError(
                    f"edge ({u}, {v}) already seen with opposite sign", line=lineno)
            if prev is None:
                seen[(u, v)] = s
                (pos if s == 1 else neg).append((u, v))
                max_id = max(max_id, u, v)
    n = max_id + 1
    if num_nodes is not None:
        if num_nodes < n:
            raise EdgeListError(
                f"num_nodes={num_nodes} is below the largest referenced id {max_id}")
        n = num_nodes
    g = SignedGraph(n, pos, neg)
    return g.mirrored() if undirected else g


def save_edge_list(graph: SignedGraph, path) -> None:
    """Write the graph in the tab-separated edge-list format."""
    rows = [(int(u), int(v), 1) for u, v in graph.pos_edges]
    rows += [(int(u), int(v), -1) for u, v in graph.neg_edges]
    rows.sort()
    with open(path, "w", encoding="utf-8") as fh:
        for u, v, s in rows:
            fh.write(f"{u}\t{v}\t{s}\n")


def graph_checksum(graph: SignedGraph) -> str:
    """Stable content hash of a graph (node count plus signed edge set)."""
    h = hashlib.sha256()
    h.update(b"signwalk-graph-v1\n")
    h.update(str(graph.num_nodes).encode())
    rows = [(int(u), int(v), 1) for u, v in graph.pos_edges]
    rows += [(int(u), int(v), -1) for u, v in graph.neg_edges]
    for u, v, s in sorted(rows):
        h.update(f"\n{u} {v} {s}".encode())
    return h.hexdigest()


@dataclass(frozen=True)
class EdgeSplit:
    """Train/test partition of a graph's edges.

    ``train`` and ``test`` are ``(E, 3)`` integer arrays of ``(u, v, sign)``
    units. For a symmetric graph each unit stands for the undirected pair
    (stored once with ``u < v``) and both directions are restored by
    :func:`training_graph`; otherwise a unit is a single directed edge.
    """

    train: np.ndarray
    test: np.ndarray
    ratio: float
    seed: int
    symmetric: bool


def _split_units(graph: SignedGraph):
    """Edges grouped into leak-free units: one per undirected pair when the
    graph is symmetric, one per directed edge otherwise."""
    if graph.is_symmetric:
        pos = {(min(u, v), max(u, v)) for u, v in map(tuple, graph.pos_edges)}
        neg = {(min(u, v), max(u, v)) for u, v in map(tuple, graph.neg_edges)}
        pos_units = np.array(sorted(pos), dtype=np.int64).reshape(-1, 2)
        neg_units = np.array(sorted(neg), dtype=np.int64).reshape(-1, 2)
        return pos_units, neg_units, True
    return graph.pos_edges, graph.neg_edges, False


def split_edges(graph: SignedGraph, ratio: float, seed: int) -> EdgeSplit:
    """Stratified train/test edge split.

    Each sign class is shuffled and cut independently so the train side
    keeps roughly ``ratio`` of both classes. The train count per class is
    ``min(n, max(1, round(ratio * n)))``. Symmetric graphs are split by
    undirected pair so a held-out edge never leaks through its mirror.

    Raises
    ------
    ConfigError
        If ``ratio`` is outside (0, 1) or either sign class has fewer than
        2 units.
    """
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f"split ratio must be in (0, 1), got {ratio}")
    pos_units, neg_units, symmetric = _split_units(graph)
    for name, units in (("positive", pos_units), ("negative", neg_units)):
        if len(units) < 2:
            raise ConfigError(
                f"need at least 2 {name} edges to split, got {len(units)}")
    train_rows = []
    test_rows = []
    for class_idx, (units, sign) in enumerate([(pos_units, 1), (neg_units, -1)]):
        rng = np.random.default_rng(
            np.random.SeedSequence(seed, spawn_key=(_STREAM_SPLIT, class_idx)))
        order = rng.permutation(len(units))
        n_train = min(len(units), max(1, round(ratio * len(units))))
        for rank, idx in enumerate(order):
            u, v = units[idx]
            (train_rows if rank < n_train else test_rows).append((int(u), int(v), sign))
    train = np.array(sorted(train_rows), dtype=np.int64).reshape(-1, 3)
    test = np.array(sorted(test_rows), dtype=np.int64).reshape(-1, 3)
    return EdgeSplit(train=train, test=test, ratio=ratio, seed=seed,
                     symmetric=symmetric)


def training_graph(graph: SignedGraph, split: EdgeSplit) -> SignedGraph:
    """Graph containing only the split's train edges.

    Everything downstream of a split (features, walks, diffusion, neighbor
    contexts) must be computed on this graph, never on the full one, or
    held-out signs leak into the encoder.
    """
    pos = [(u, v) for u, v, s in split.train if s == 1]
    neg = [(u, v) for u, v, s in split.train if s == -1]
    g = SignedGraph(graph.num_nodes, pos, neg)
    return g.mirrored() if split.symmetric else g


def save_split(split: EdgeSplit, out_dir) -> None:
    """Persist a split as two edge-list files plus a JSON manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payloads = {}
    for name, arr in (("train", split.train), ("test", split.test)):
        lines = "".join(f"{u}\t{v}\t{s}\n" for u, v, s in arr)
        payloads[name] = lines.encode()
        (out / f"{name}.tsv").write_bytes(payloads[name])
    checksum = hashlib.sha256(payloads["train"] + payloads["test"]).hexdigest()
    manifest = {
        "format_version": _SPLIT_FORMAT_VERSION,
        "ratio": split.ratio,
        "seed": split.seed,
        "symmetric": split.symmetric,
        "checksum": checksum,
    }
    (out / "split.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                    encoding="utf-8")


def load_split(in_dir) -> EdgeSplit:
    """Load a split saved by :func:`save_split`, verifying its checksum."""
    src = Path(in_dir)
    manifest = json.loads((src / "split.json").read_text(encoding="utf-8"))
    if manifest.get("format_version") != _SPLIT_FORMAT_VERSION:
        raise ConfigError(
            f"unsupported split format version {manifest.get('format_version')}")
    raw_train = (src / "train.tsv").read_bytes()
    raw_test = (src / "test.tsv").read_bytes()
    checksum = hashlib.sha256(raw_train + raw_test).hexdigest()
    if checksum != manifest["checksum"]:
        raise EdgeListError("split files do not match the manifest checksum")
    def parse(raw: bytes) -> np.ndarray:
        rows = [tuple(int(x) for x in line.split())
                for line in raw.decode().splitlines() if line.strip()]
        return np.array(rows, dtype=np.int64).reshape(-1, 3)
    return EdgeSplit(train=parse(raw_train), test=parse(raw_test),
                     ratio=float(manifest["ratio"]), seed=int(manifest["seed"]),
                     symmetric=bool(manifest["symmetric"]))


def generate_balanced_graph(num_nodes: int, p_intra: float = 0.2,
                            p_inter: float = 0.2, noise: float = 0.0,
                            seed: int = 0) -> SignedGraph:
    """Sample a two-block signed graph that is balanced before noise.

    Nodes split into two blocks (first ``num_nodes // 2`` ids, then the
    rest). Each within-block pair gets a positive edge with probability
    ``p_intra``; each cross-block pair gets a negative edge with probability
    ``p_inter``. Every sampled edge sign then flips independently with
    probability ``noise``. The result is symmetric (both directions stored).

    With ``noise=0`` every cycle carries an even number of negative edges,
    the classic structural-balance condition, and the two blocks are exactly
    the hostile camps.
    """
    if num_nodes < 2:
        raise ConfigError(f"need at least 2 nodes, got {num_nodes}")
    for name, p in (("p_intra", p_intra), ("p_inter", p_inter), ("noise", noise)):
        if not 0.0 <= p <= 1.0:
            raise ConfigError(f"{name} must be a probability, got {p}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    half = num_nodes // 2
    block = (np.arange(num_nodes) >= half).astype(np.int64)
    iu, ju = np.triu_indices(num_nodes, k=1)
    same = block[iu] == block[ju]
    draw = rng.random(len(iu))
    keep = np.where(same, draw < p_intra, draw < p_inter)
    sign = np.where(same, 1, -1)
    flip = rng.random(len(iu)) < noise
    sign = np.where(flip, -sign, sign)
    iu, ju, sign = iu[keep], ju[keep], sign[keep]
    pos = np.stack([iu[sign == 1], ju[sign == 1]], axis=1)
    neg = np.stack([iu[sign == -1], ju[sign == -1]], axis=1)
    return SignedGraph(num_nodes, pos, neg).mirrored()
