"""Batch construction, loss, optimizer, and the training loop.

The loss over a batch ``M`` of labeled pairs (positive edge, negative edge,
or sampled non-edge) is a class-weighted cross entropy on 3-way logits
``[z_i, z_j] @ scorer``, plus a hinge term that pushes positive pairs
closer than sampled non-edges and negative pairs farther, plus an L2
penalty on the weight matrices. Everything is full batch: one loss and one
optimizer step per epoch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor, concat, gather_rows, zero_grads
from .errors import ConfigError, DivergenceError, SamplingError
from .graph import SignedGraph
from .model import (EncoderInputs, ModelConfig, ModelParams,
                    build_encoder_inputs, encode, init_params, save_checkpoint)

LABEL_POS = 0
LABEL_NEG = 1
LABEL_NONE = 2

_STREAM_BATCH = 3


@dataclass(frozen=True)
class TrainBatch:
    """Labeled node pairs plus distance-contrast triplets.

    ``pairs`` is ``(M, 3)``: source, target, label index. ``triplets_pos``
    rows ``(i, j, k)`` pair a positive edge ``(i, j)`` with a sampled
    non-neighbor ``k`` of ``i``; ``triplets_neg`` does the same for negative
    edges. Non-edge means no edge in either direction.
    """

    pairs: np.ndarray
    triplets_pos: np.ndarray
    triplets_neg: np.ndarray


def edge_units(graph: SignedGraph) -> np.ndarray:
    """All edges as split-style ``(u, v, sign)`` units (undirected pairs when
    the graph is symmetric)."""
    if graph.is_symmetric:
        pos = {(min(u, v), max(u, v)) for u, v in map(tuple, graph.pos_edges)}
        neg = {(min(u, v), max(u, v)) for u, v in map(tuple, graph.neg_edges)}
    else:
        pos = set(map(tuple, graph.pos_edges))
        neg = set(map(tuple, graph.neg_edges))
    rows = [(u, v, 1) for u, v in pos] + [(u, v, -1) for u, v in neg]
    return np.array(sorted(rows), dtype=np.int64).reshape(-1, 3)


def sample_batch(graph: SignedGraph, train_units: np.ndarray,
                 no_link_ratio: float, seed: int) -> TrainBatch:
    """Build the training batch from train edges plus sampled non-edges.

    Every train unit becomes a labeled pair. ``round(no_link_ratio *
    len(train_units))`` distinct non-edge pairs are added with the
    "no link" label, and each train edge gets one sampled non-neighbor to
    form its contrast triplet. With ``no_link_ratio=0`` the batch holds
    only signed pairs and both triplet sets stay empty.

    Raises
    ------
    SamplingError
        When rejection sampling cannot find enough non-edges within
        ``100 * len(train_units)`` attempts (dense graphs).
    ConfigError
        On an empty train set or a negative ratio.
    """
    if len(train_units) == 0:
        raise ConfigError("train split has no edges")
    if no_link_ratio < 0:
        raise ConfigError(f"no_link_ratio must be non-negative, got {no_link_ratio}")
    n = graph.num_nodes
    rng = np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(_STREAM_BATCH,)))
    pairs = [(int(u), int(v), LABEL_POS if s == 1 else LABEL_NEG)
             for u, v, s in train_units]
    budget = 100 * len(train_units)

    def draw_non_edge(src=None, forbid=()):
        nonlocal budget
        while budget > 0:
            budget -= 1
            u = int(rng.integers(n)) if src is None else src
            v = int(rng.integers(n))
            if u != v and v not in forbid and graph.sign_of(u, v) == 0:
                return u, v
        raise SamplingError(
            "could not sample enough non-edges; the graph is too dense")

    target = round(no_link_ratio * len(train_units))
    chosen: set = set()
    while len(chosen) < target:
        pair = draw_non_edge()
        if pair not in chosen:
            chosen.add(pair)
    pairs += [(u, v, LABEL_NONE) for u, v in sorted(chosen)]

    triplets_pos = []
    triplets_neg = []
    if no_link_ratio > 0:
        for u, v, s in train_units:
            u, v = int(u), int(v)
            _, k = draw_non_edge(src=u, forbid=(v,))
            (triplets_pos if s == 1 else triplets_neg).append((u, v, k))
    return TrainBatch(
        pairs=np.array(pairs, dtype=np.int64).reshape(-1, 3),
        triplets_pos=np.array(triplets_pos, dtype=np.int64).reshape(-1, 3),
        triplets_neg=np.array(triplets_neg, dtype=np.int64).reshape(-1, 3),
    )


@dataclass(frozen=True)
class LossConfig:
    """Loss hyperparameters.

    ``class_weights`` of ``None`` balances by inverse class frequency,
    ``|M| / (3 * count_class)``. ``weight_decay`` multiplies the summed
    squared Frobenius norms of the weight matrices passed as
    ``reg_tensors``.
    """

    lam: float = 5.0
    weight_decay: float = 5e-4
    class_weights: tuple | None = None


def _squared_distances(z: Tensor, a: np.ndarray, b: np.ndarray) -> Tensor:
    diff = gather_rows(z, a) - gather_rows(z, b)
    return (diff * diff).sum(axis=1)


def loss_forward(z: Tensor, scorer: Tensor, batch: TrainBatch,
                 cfg: LossConfig, reg_tensors=()):
    """Total training loss; returns ``(loss, parts)`` with float parts for
    logging (``ce``, ``hinge``, ``reg``)."""
    if len(batch.pairs) == 0:
        raise ConfigError("loss needs a non-empty batch")
    src, dst, labels = batch.pairs.T
    logits = concat([gather_rows(z, src), gather_rows(z, dst)], axis=1) @ scorer
    logp = logits.log_softmax(axis=-1)
    onehot = np.zeros((len(labels), 3))
    onehot[np.arange(len(labels)), labels] = 1.0
    nll = (logp * onehot).sum(axis=1) * -1.0

    if cfg.class_weights is None:
        counts = np.bincount(labels, minlength=3)
        weights = len(labels) / (3.0 * np.maximum(counts, 1))
    else:
        weights = np.asarray(cfg.class_weights, dtype=np.float64)
        if weights.shape != (3,):
            raise ConfigError("class_weights must have 3 entries")
    ce = (nll * weights[labels]).sum() * (1.0 / len(labels))

    loss = ce
    hinge_value = 0.0
    for trips, flip in ((batch.triplets_pos, 1.0), (batch.triplets_neg, -1.0)):
        if len(trips) == 0:
            continue
        i, j, k = trips.T
        margin = (_squared_distances(z, i, j) - _squared_distances(z, i, k)) * flip
        hinge = margin.relu().mean()
        hinge_value += float(hinge.data)
        loss = loss + cfg.lam * hinge

    reg_value = 0.0
    if cfg.weight_decay > 0 and reg_tensors:
        reg = None
        for t in reg_tensors:
            term = (t * t).sum()
            reg = term if reg is None else reg + term
        loss = loss + cfg.weight_decay * reg
        reg_value = cfg.weight_decay * float(reg.data)

    parts = {"ce": float(ce.data), "hinge": hinge_value, "reg": reg_value}
    return loss, parts


def regularized_tensors(params: ModelParams) -> list:
    """Weight matrices covered by the L2 penalty: attention and feed-forward
    maps, the centrality tables, and the pair scorer. Gains, biases, and the
    walk weights stay unpenalized."""
    picked = []
    for name in params.names():
        if (".ln" in name or name.endswith((".b1", ".b2", ".bias"))
                or name == "walk_weights"):
            continue
        picked.append(params[name])
    return picked


@dataclass
class AdamState:
    """First and second moment accumulators keyed by parameter name."""

    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: int = 0


def adam_step(params: ModelParams, state: AdamState, lr: float,
              betas=(0.9, 0.999), eps: float = 1e-8,
              weight_decay: float = 0.0) -> None:
    """One Adam update with bias correction.

    ``weight_decay`` here is decoupled (applied to the parameter directly);
    the training loop keeps it at zero because the decay already lives in
    the loss.
    """
    b1, b2 = betas
    state.t += 1
    for name in params.names():
        t = params[name]
        g = t.grad
        if not np.all(np.isfinite(g)):
            raise DivergenceError(f"non-finite gradient for parameter {name!r}")
        if name not in state.m:
            state.m[name] = np.zeros_like(t.data)
            state.v[name] = np.zeros_like(t.data)
        state.m[name] = b1 * state.m[name] + (1 - b1) * g
        state.v[name] = b2 * state.v[name] + (1 - b2) * g * g
        m_hat = state.m[name] / (1 - b1 ** state.t)
        v_hat = state.v[name] / (1 - b2 ** state.t)
        t.data = t.data - lr * (m_hat / (np.sqrt(v_hat) + eps)
                                + weight_decay * t.data)


def save_optimizer_state(state: AdamState, path) -> None:
    arrays = {f"m.{k}": v for k, v in state.m.items()}
    arrays.update({f"v.{k}": v for k, v in state.v.items()})
    np.savez(path, t=np.int64(state.t), **arrays)


def load_optimizer_state(path) -> AdamState:
    with np.load(path) as data:
        state = AdamState(t=int(data["t"]))
        for key in data.files:
            if key.startswith("m."):
                state.m[key[2:]] = data[key]
            elif key.startswith("v."):
                state.v[key[2:]] = data[key]
    return state


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    weight_decay: float = 5e-4
    lam: float = 5.0
    no_link_ratio: float = 1.0
    max_epochs: int = 200
    patience: int = 20
    rel_tol: float = 1e-4
    class_weights: tuple | None = None
    seed: int = 0

    def __post_init__(self):
        if self.lr <= 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        if self.max_epochs < 0 or self.patience < 1:
            raise ConfigError("max_epochs must be >= 0 and patience >= 1")


@dataclass
class TrainResult:
    params: ModelParams
    loss_trace: list
    loss_parts: list
    epochs_run: int
    stopped_early: bool


def train(graph: SignedGraph, train_units: np.ndarray, config: ModelConfig,
          tcfg: TrainConfig, inputs: EncoderInputs | None = None,
          params: ModelParams | None = None,
          checkpoint_path=None) -> TrainResult:
    """Full-batch training loop.

    Runs at most ``max_epochs`` epochs and stops early when the loss has
    not improved on its best value by a relative ``rel_tol`` for
    ``patience`` consecutive epochs. With ``max_epochs=0`` the initial
    parameters are returned untouched and the trace is empty.

    Raises
    ------
    DivergenceError
        On a non-finite loss; ``last_params`` carries the most recent
        parameters that produced a finite loss (also written to
        ``checkpoint_path`` when given).
    """
    if inputs is None:
        inputs = build_encoder_inputs(graph, config)
    if params is None:
        params = init_params(config)
    batch = sample_batch(graph, train_units, tcfg.no_link_ratio, tcfg.seed)
    loss_cfg = LossConfig(lam=tcfg.lam, weight_decay=tcfg.weight_decay,
                          class_weights=tcfg.class_weights)
    reg = regularized_tensors(params)
    state = AdamState()
    tensors = params.all()

    trace: list = []
    parts_log: list = []
    best = np.inf
    streak = 0
    stopped_early = False
    last_good: dict | None = None
    for epoch in range(tcfg.max_epochs):
        zero_grads(tensors)
        z = encode(inputs, params, config)
        loss, parts = loss_forward(z, params["edge_scorer"], batch, loss_cfg, reg)
        value = float(loss.data)
        if not np.isfinite(value):
            if last_good is not None:
                params.load_arrays(last_good)
                if checkpoint_path is not None:
                    save_checkpoint(checkpoint_path, params, config)
            raise DivergenceError(
                f"loss became non-finite at epoch {epoch}",
                last_params=last_good, epoch=epoch)
        trace.append(value)
        parts_log.append(parts)
        last_good = params.as_arrays()
        loss.backward()
        adam_step(params, state, lr=tcfg.lr)
        if not np.isfinite(best) or best - value > tcfg.rel_tol * max(1.0, abs(best)):
            best = value
            streak = 0
        else:
            streak += 1
            if streak >= tcfg.patience:
                stopped_early = True
                break
    return TrainResult(params=params, loss_trace=trace, loss_parts=parts_log,
                       epochs_run=len(trace), stopped_early=stopped_early)
