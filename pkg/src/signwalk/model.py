"""Transformer encoder over signed-graph structure.

The encoder starts from spectral node features plus learned per-degree
embeddings, then applies pre-norm transformer layers whose attention logits
carry two additive structural biases: the degree-normalized signed adjacency
and a learnable-weighted combination of inverse signed walk distances. The
final hidden states are the node embeddings consumed by the decoder.
"""

from __future__ import annotations

import json
import hashlib
from dataclasses import asdict, dataclass

import numpy as np

from . import encoding
from .autodiff import Tensor, concat, gather_rows, stack_weight
from .errors import ConfigError
from .graph import SignedGraph, degree_profile, graph_checksum

_CHECKPOINT_FORMAT_VERSION = 1
_STREAM_INIT = 4
_LN_EPS = 1e-5


@dataclass(frozen=True)
class ModelConfig:
    """Architecture and encoding hyperparameters.

    ``embed_dim`` must be divisible by ``num_heads``. ``max_path_len`` is
    the walk-distance cap; ``None`` means use ``walk_len``. Attention is
    dense, so graphs above ``max_dense_nodes`` are refused unless
    ``allow_large`` is set.
    """

    embed_dim: int = 128
    num_layers: int = 1
    num_heads: int = 4
    max_degree: int = 10
    num_walks: int = 8
    walk_len: int = 20
    max_path_len: int | None = None
    ffn_activation: str = "gelu"
    use_adjacency_bias: bool = True
    use_walk_bias: bool = True
    use_centrality: bool = True
    max_dense_nodes: int = 4000
    allow_large: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.embed_dim < 1 or self.num_layers < 0 or self.num_heads < 1:
            raise ConfigError("embed_dim and num_heads must be positive, "
                              "num_layers non-negative")
        if self.embed_dim % self.num_heads != 0:
            raise ConfigError(
                f"embed_dim {self.embed_dim} not divisible by num_heads {self.num_heads}")
        if self.ffn_activation not in ("gelu", "relu"):
            raise ConfigError(f"unknown ffn_activation {self.ffn_activation!r}")
        if self.num_walks < 1 or self.walk_len < 1:
            raise ConfigError("num_walks and walk_len must be positive")
        if self.max_degree < 0:
            raise ConfigError("max_degree must be non-negative")

    @property
    def head_dim(self) -> int:
        return self.embed_dim // self.num_heads

    @property
    def path_cap(self) -> int:
        return self.walk_len if self.max_path_len is None else self.max_path_len


def config_fingerprint(config: ModelConfig) -> str:
    """Short stable hash of a config, stamped into artifacts."""
    payload = json.dumps(asdict(config), sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


class ModelParams:
    """Named collection of learnable tensors with deterministic ordering."""

    def __init__(self, tensors: dict):
        self._tensors = dict(tensors)

    def __getitem__(self, name: str) -> Tensor:
        return self._tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def names(self) -> list:
        return sorted(self._tensors)

    def all(self) -> list:
        return [self._tensors[name] for name in self.names()]

    def as_arrays(self) -> dict:
        return {name: self._tensors[name].data.copy() for name in self.names()}

    def copy(self) -> "ModelParams":
        return ModelParams({name: Tensor(t.data.copy())
                            for name, t in self._tensors.items()})

    def load_arrays(self, arrays: dict) -> None:
        for name, arr in arrays.items():
            if name not in self._tensors:
                raise ConfigError(f"unknown parameter {name!r}")
            if self._tensors[name].data.shape != arr.shape:
                raise ConfigError(f"shape mismatch for parameter {name!r}")
            self._tensors[name].data = np.array(arr, dtype=np.float64)


def _param_shapes(config: ModelConfig) -> dict:
    d, dk = config.embed_dim, config.head_dim
    shapes = {
        "centrality.pos_table": (config.max_degree + 1, d),
        "centrality.neg_table": (config.max_degree + 1, d),
        "walk_weights": (config.num_walks,),
        "edge_scorer": (2 * d, 3),
    }
    for layer in range(config.num_layers):
        p = f"layer{layer}."
        for h in range(config.num_heads):
            shapes[f"{p}head{h}.wq"] = (d, dk)
            shapes[f"{p}head{h}.wk"] = (d, dk)
            shapes[f"{p}head{h}.wv"] = (d, dk)
        shapes[f"{p}wo"] = (d, d)
        shapes[f"{p}ln1.gain"] = (1, d)
        shapes[f"{p}ln1.bias"] = (1, d)
        shapes[f"{p}ln2.gain"] = (1, d)
        shapes[f"{p}ln2.bias"] = (1, d)
        shapes[f"{p}ffn.w1"] = (d, d)
        shapes[f"{p}ffn.b1"] = (1, d)
        shapes[f"{p}ffn.w2"] = (d, d)
        shapes[f"{p}ffn.b2"] = (1, d)
    return shapes


def init_params(config: ModelConfig) -> ModelParams:
    """Seeded parameter init.

    Weight matrices draw from a scaled uniform ``[-1/sqrt(fan_in),
    1/sqrt(fan_in)]`` in sorted name order from a single stream, so the same
    config and seed always produce the same parameters. Layer-norm gains
    start at one, biases at zero, and the walk weights at ``1/num_walks``.
    """
    rng = np.random.default_rng(
        np.random.SeedSequence(config.seed, spawn_key=(_STREAM_INIT,)))
    tensors = {}
    for name, shape in sorted(_param_shapes(config).items()):
        if name.endswith(".gain"):
            data = np.ones(shape)
        elif name.endswith((".bias", ".b1", ".b2")):
            data = np.zeros(shape)
        elif name == "walk_weights":
            data = np.full(shape, 1.0 / shape[0])
        else:
            fan_in = shape[-1] if name.endswith("_table") else shape[0]
            bound = 1.0 / np.sqrt(fan_in)
            data = rng.uniform(-bound, bound, size=shape)
        tensors[name] = Tensor(data)
    return ModelParams(tensors)


@dataclass(frozen=True)
class EncoderInputs:
    """Constant per-graph arrays the encoder consumes.

    Built once per (graph, config) and reused across epochs: spectral
    features, clipped degree indices, the adjacency bias, the per-walk
    inverse-distance stack, and the walk set that produced it.
    """

    features: np.ndarray
    pos_degree_idx: np.ndarray
    neg_degree_idx: np.ndarray
    adjacency_bias: np.ndarray
    walk_inverse: np.ndarray
    walkset: encoding.WalkSet

    def __post_init__(self):
        for name in ("features", "adjacency_bias", "walk_inverse"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ConfigError(f"non-finite values in encoder input {name!r}")


def build_encoder_inputs(graph: SignedGraph, config: ModelConfig,
                         walkset: encoding.WalkSet | None = None) -> EncoderInputs:
    """Precompute every graph-dependent constant the encoder needs.

    ``walkset`` may come from a cache; its graph checksum and shape must
    match, otherwise fresh walks are refused rather than silently resampled.
    """
    n = graph.num_nodes
    if n > config.max_dense_nodes and not config.allow_large:
        raise ConfigError(
            f"{n} nodes exceeds max_dense_nodes={config.max_dense_nodes}; "
            f"attention is dense, set allow_large to override")
    if walkset is None:
        walkset = encoding.sample_signed_walks(
            graph, config.num_walks, config.walk_len, config.seed)
    else:
        if walkset.graph_checksum != graph_checksum(graph):
            raise ConfigError("walk set was sampled from a different graph")
        if (walkset.num_walks, walkset.walk_len) != (config.num_walks, config.walk_len):
            raise ConfigError("walk set shape does not match the config")
    dists = encoding.walk_distances(walkset, graph, m_max=config.path_cap)
    profile = degree_profile(graph)
    return EncoderInputs(
        features=encoding.spectral_init(graph, config.embed_dim),
        pos_degree_idx=np.clip(profile.pos, 0, config.max_degree),
        neg_degree_idx=np.clip(profile.neg, 0, config.max_degree),
        adjacency_bias=encoding.adjacency_bias(graph),
        walk_inverse=dists.inverse,
        walkset=walkset,
    )


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor) -> Tensor:
    mu = x.mean(axis=1, keepdims=True)
    centered = x - mu
    var = (centered * centered).mean(axis=1, keepdims=True)
    return centered * (var + _LN_EPS) ** -0.5 * gain + bias


def attention_head(h: Tensor, wq: Tensor, wk: Tensor, wv: Tensor,
                   bias: Tensor) -> Tensor:
    """Single attention head with an additive logit bias."""
    dk = wq.shape[1]
    scores = (h @ wq) @ (h @ wk).T * (1.0 / np.sqrt(dk)) + bias
    return scores.softmax(axis=-1) @ (h @ wv)


def transformer_layer(h: Tensor, bias: Tensor, params: ModelParams,
                      layer: int, config: ModelConfig) -> Tensor:
    """Pre-norm transformer block: attention with bias, then feed-forward,
    each wrapped in a residual connection."""
    p = f"layer{layer}."
    normed = layer_norm(h, params[p + "ln1.gain"], params[p + "ln1.bias"])
    heads = [attention_head(normed, params[f"{p}head{i}.wq"],
                            params[f"{p}head{i}.wk"], params[f"{p}head{i}.wv"], bias)
             for i in range(config.num_heads)]
    attended = concat(heads, axis=1) @ params[p + "wo"] + h
    normed2 = layer_norm(attended, params[p + "ln2.gain"], params[p + "ln2.bias"])
    hidden = normed2 @ params[p + "ffn.w1"] + params[p + "ffn.b1"]
    hidden = hidden.gelu() if config.ffn_activation == "gelu" else hidden.relu()
    return hidden @ params[p + "ffn.w2"] + params[p + "ffn.b2"] + attended


def attention_bias(inputs: EncoderInputs, params: ModelParams,
                   config: ModelConfig) -> Tensor:
    """Additive attention-logit bias, shared by every head and layer."""
    n = inputs.features.shape[0]
    bias = Tensor(np.zeros((n, n)))
    if config.use_walk_bias:
        bias = bias + stack_weight(params["walk_weights"], inputs.walk_inverse)
    if config.use_adjacency_bias:
        bias = bias + Tensor(inputs.adjacency_bias)
    return bias

def encode(inputs: EncoderInputs, params: ModelParams,
           config: ModelConfig) -> Tensor:
    """Run the encoder; returns the node embedding matrix as a graph node."""
    h = Tensor(inputs.features)
    if config.use_centrality:
        h = h + gather_rows(params["centrality.pos_table"], inputs.pos_degree_idx)
        h = h + gather_rows(params["centrality.neg_table"], inputs.neg_degree_idx)
    bias = attention_bias(inputs, params, config)
    for layer in range(config.num_layers):
        h = transformer_layer(h, bias, params, layer, config)
    return h


def save_checkpoint(path, params: ModelParams, config: ModelConfig) -> None:
    """Write params plus config to a versioned npz; round trips bit-exact."""
    arrays = {f"param.{name}": params[name].data for name in params.names()}
    np.savez(path,
             format_version=np.int64(_CHECKPOINT_FORMAT_VERSION),
             config_json=np.array(json.dumps(asdict(config), sort_keys=True)),
             config_hash=np.array(config_fingerprint(config)),
             **arrays)


def load_checkpoint(path):
    """Load a checkpoint; returns ``(params, config)``.

    Refuses unknown format versions and configs whose stored hash does not
    match their own payload (a corrupted or hand-edited file).
    """
    with np.load(path) as data:
        version = int(data["format_version"])
        if version != _CHECKPOINT_FORMAT_VERSION:
            raise ConfigError(f"unsupported checkpoint version {version}")
        raw = json.loads(str(data["config_json"]))
        config = ModelConfig(**raw)
        if str(data["config_hash"]) != config_fingerprint(config):
            raise ConfigError("checkpoint config hash mismatch")
        tensors = {}
        for key in data.files:
            if key.startswith("param."):
                tensors[key[len("param."):]] = Tensor(data[key])
    params = ModelParams(tensors)
    expected = set(_param_shapes(config))
    if set(params.names()) != expected:
        raise ConfigError("checkpoint parameters do not match the config")
    return params, config
