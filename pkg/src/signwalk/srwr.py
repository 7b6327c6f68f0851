"""Signed random walk with restart and the inferred-sign diffusion matrix.

A surfer walks the semi-row-normalized graph carrying an attitude that
edges can flip: positive mass crossing a negative edge becomes negative
mass, while ``beta`` and ``gamma`` control how readily negative mass turns
back ("the enemy of my enemy"). Per-seed stationary distributions give a
signed relevance score for every node pair; thresholding the symmetrized
scores yields a sparse matrix of inferred signs used as a fallback
neighborhood where real negative edges are scarce.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, ConvergenceError, EdgeListError
from .graph import SignedGraph

_DIFFUSION_FORMAT_VERSION = 1


@dataclass(frozen=True)
class SrwrConfig:
    """Walk parameters and score thresholds.

    ``restart`` is the teleport probability back to the seed. ``beta`` and
    ``gamma`` weight the sign-flip rules for negative mass. Stationary
    scores above ``pos_threshold`` (below ``neg_threshold``) become +1 (-1)
    entries of the diffusion matrix.
    """

    restart: float = 0.15
    beta: float = 0.5
    gamma: float = 0.5
    tol: float = 1e-9
    max_iters: int = 1000
    pos_threshold: float = 1e-4
    neg_threshold: float = -1e-4

    def __post_init__(self):
        if not 0.0 < self.restart < 1.0:
            raise ConfigError(f"restart must be in (0, 1), got {self.restart}")
        for name in ("beta", "gamma"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {v}")
        if self.tol <= 0 or self.max_iters < 1:
            raise ConfigError("tol must be positive and max_iters at least 1")
        if self.neg_threshold >= 0 or self.pos_threshold <= 0:
            raise ConfigError("thresholds must straddle zero")


def semi_row_normalize(graph: SignedGraph):
    """Split ``D^{-1} A`` into its positive part and absolute negative part.

    ``D`` holds row sums of ``|A|``; rows of dangling nodes stay zero and
    their escaping mass is reassigned to the restart during iteration.
    """
    A = graph.adjacency.tocsr().astype(np.float64)
    deg = np.asarray(np.abs(A).sum(axis=1)).ravel()
    inv = np.where(deg > 0, 1.0 / np.maximum(deg, 1e-300), 0.0)
    An = sp.diags(inv) @ A
    pos = An.maximum(0).tocsr()
    neg = (-An).maximum(0).tocsr()
    pos.eliminate_zeros()
    neg.eliminate_zeros()
    return pos, neg


@dataclass(frozen=True)
class SrwrResult:
    """Stationary positive and negative mass for one seed."""

    r_pos: np.ndarray
    r_neg: np.ndarray
    residuals: np.ndarray

    @property
    def iterations(self) -> int:
        return len(self.residuals)

    @property
    def signed(self) -> np.ndarray:
        return self.r_pos - self.r_neg


def srwr_rank(graph: SignedGraph, seed_node: int, cfg: SrwrConfig | None = None,
              _ops=None) -> SrwrResult:
    """Power-iterate the signed walk equations from one seed node.

    Raises
    ------
    ConvergenceError
        If the L1 change is still above ``cfg.tol`` after
        ``cfg.max_iters`` iterations; carries the last residual.
    """
    cfg = cfg or SrwrConfig()
    if not 0 <= seed_node < graph.num_nodes:
        raise EdgeListError(f"seed node {seed_node} out of range")
    if _ops is None:
        _ops = _build_ops(graph)
    pos_t, neg_t, dangling = _ops
    n = graph.num_nodes
    c = cfg.restart
    q = np.zeros(n)
    q[seed_node] = 1.0
    r_pos, r_neg = q.copy(), np.zeros(n)
    residuals = []
    for _ in range(cfg.max_iters):
        # mass sitting on dangling nodes has nowhere to walk; send it home
        lost = (1.0 - c) * (r_pos[dangling].sum() + r_neg[dangling].sum())
        new_pos = (1.0 - c) * (pos_t @ r_pos
                               + cfg.beta * (neg_t @ r_neg)
                               + (1.0 - cfg.gamma) * (pos_t @ r_neg))
        new_neg = (1.0 - c) * (neg_t @ r_pos
                               + cfg.gamma * (pos_t @ r_neg)
                               + (1.0 - cfg.beta) * (neg_t @ r_neg))
        new_pos += (c + lost) * q
        residual = (np.abs(new_pos - r_pos).sum() + np.abs(new_neg - r_neg).sum())
        residuals.append(residual)
        r_pos, r_neg = new_pos, new_neg
        if residual < cfg.tol:
            return SrwrResult(r_pos=r_pos, r_neg=r_neg,
                              residuals=np.array(residuals))
    raise ConvergenceError(
        f"signed walk did not reach tol={cfg.tol} in {cfg.max_iters} iterations",
        residual=residuals[-1], iterations=len(residuals))


def _build_ops(graph: SignedGraph):
    pos, neg = semi_row_normalize(graph)
    deg = np.asarray(np.abs(graph.adjacency).sum(axis=1)).ravel()
    dangling = np.flatnonzero(deg == 0)
    return pos.T.tocsr(), neg.T.tocsr(), dangling


@dataclass(frozen=True)
class DiffusionMatrix:
    """Symmetrized inferred signs. ``signs`` is sparse with entries in
    {-1, +1}; ``scores`` holds the thresholded relevance values on the same
    sparsity pattern. The diagonal is always empty."""

    signs: sp.csr_matrix
    scores: sp.csr_matrix
    config_hash: str


def build_diffusion_matrix(graph: SignedGraph, cfg: SrwrConfig | None = None,
                           config_hash: str = "", threads: int = 1) -> DiffusionMatrix:
    """Run the signed walk from every seed and threshold the scores.

    Per-pair relevance takes the larger positive mass and the larger
    negative mass across the two walk directions, so the result is
    symmetric. Seeds are independent; ``threads`` only parallelizes, the
    output is identical for any thread count.
    """
    cfg = cfg or SrwrConfig()
    n = graph.num_nodes
    ops = _build_ops(graph)
    r_pos = np.zeros((n, n))
    r_neg = np.zeros((n, n))

    def run(seed):
        res = srwr_rank(graph, seed, cfg, _ops=ops)
        return seed, res

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for seed, res in pool.map(run, range(n)):
                r_pos[seed], r_neg[seed] = res.r_pos, res.r_neg
    else:
        for seed in range(n):
            _, res = run(seed)
            r_pos[seed], r_neg[seed] = res.r_pos, res.r_neg

    sym_pos = np.maximum(r_pos, r_pos.T)
    sym_neg = np.maximum(r_neg, r_neg.T)
    diff = sym_pos - sym_neg
    signs = np.where(diff > cfg.pos_threshold, 1,
                     np.where(diff < cfg.neg_threshold, -1, 0)).astype(np.int8)
    np.fill_diagonal(signs, 0)
    scores = np.where(signs != 0, diff, 0.0)
    return DiffusionMatrix(signs=sp.csr_matrix(signs),
                           scores=sp.csr_matrix(scores),
                           config_hash=config_hash)


def save_diffusion(diff: DiffusionMatrix, path) -> None:
    """Write the diffusion matrix as ``i j sign score`` rows with a header."""
    coo = diff.signs.tocoo()
    scores = diff.scores.tocsr()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# format_version {_DIFFUSION_FORMAT_VERSION}\n")
        fh.write(f"# config_hash {diff.config_hash}\n")
        fh.write(f"# shape {diff.signs.shape[0]}\n")
        order = np.lexsort((coo.col, coo.row))
        for idx in order:
            i, j, s = int(coo.row[idx]), int(coo.col[idx]), int(coo.data[idx])
            fh.write(f"{i}\t{j}\t{s}\t{float(scores[i, j])!r}\n")


def load_diffusion(path) -> DiffusionMatrix:
    rows, cols, signs, scores = [], [], [], []
    header = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2:
                    header[parts[0]] = parts[1]
                continue
            parts = line.split()
            if len(parts) != 4:
                raise EdgeListError("expected 'i j sign score'", line=lineno)
            rows.append(int(parts[0]))
            cols.append(int(parts[1]))
            signs.append(int(parts[2]))
            scores.append(float(parts[3]))
    if int(header.get("format_version", -1)) != _DIFFUSION_FORMAT_VERSION:
        raise ConfigError(
            f"unsupported diffusion format version {header.get('format_version')}")
    n = int(header["shape"])
    return DiffusionMatrix(
        signs=sp.csr_matrix((signs, (rows, cols)), shape=(n, n), dtype=np.int8),
        scores=sp.csr_matrix((scores, (rows, cols)), shape=(n, n)),
        config_hash=header.get("config_hash", ""))
