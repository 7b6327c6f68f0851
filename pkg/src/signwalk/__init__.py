"""Signed graph embeddings with explainable sign prediction.

The package trains a small transformer encoder over signed graphs using
spectral features, degree encodings, and walk-derived attention biases,
ranks node attitudes with a signed random walk diffusion, and predicts
edge signs through a nearest-positive / farthest-negative distance rule
whose chosen reference nodes double as the explanation.
"""

from .errors import (
    ConfigError,
    ConvergenceError,
    DivergenceError,
    EdgeListError,
    SamplingError,
    SignwalkError,
    StageError,
)
from .graph import (
    EdgeSplit,
    SignedGraph,
    degree_profile,
    generate_balanced_graph,
    graph_checksum,
    load_edge_list,
    load_split,
    save_edge_list,
    save_split,
    split_edges,
    training_graph,
)
from .encoding import (
    WalkSet,
    adjacency_bias,
    load_walkset,
    sample_signed_walks,
    save_walkset,
    shortest_path_signed_encoding,
    spectral_init,
    walk_distances,
)
from .model import (
    EncoderInputs,
    ModelConfig,
    ModelParams,
    build_encoder_inputs,
    config_fingerprint,
    encode,
    init_params,
    load_checkpoint,
    save_checkpoint,
)
from .training import (
    TrainConfig,
    TrainResult,
    edge_units,
    sample_batch,
    train,
)
from .srwr import (
    DiffusionMatrix,
    SrwrConfig,
    build_diffusion_matrix,
    load_diffusion,
    save_diffusion,
    srwr_rank,
)
from .explain import (
    DecoderConfig,
    NeighborContext,
    NeighborEntry,
    build_context,
    decode,
    precision_at_k,
    predict_sign,
    read_explanations,
    reference_neighbors,
    write_explanations,
)
from .evaluation import EvalReport, evaluate, explanation_precision
from .expressivity import (
    compare_encodings,
    load_fixture_pair,
    node_walk_profile,
    spe_signature,
    walk_signature,
    wl_signatures,
)
from .pipeline import (
    PipelineSettings,
    load_embedding_context,
    load_settings,
    parse_config_file,
    resolve_settings,
    run_pipeline,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DivergenceError",
    "EdgeListError",
    "SamplingError",
    "SignwalkError",
    "StageError",
    "EdgeSplit",
    "SignedGraph",
    "degree_profile",
    "generate_balanced_graph",
    "graph_checksum",
    "load_edge_list",
    "load_split",
    "save_edge_list",
    "save_split",
    "split_edges",
    "training_graph",
    "WalkSet",
    "adjacency_bias",
    "load_walkset",
    "sample_signed_walks",
    "save_walkset",
    "shortest_path_signed_encoding",
    "spectral_init",
    "walk_distances",
    "EncoderInputs",
    "ModelConfig",
    "ModelParams",
    "build_encoder_inputs",
    "config_fingerprint",
    "encode",
    "init_params",
    "load_checkpoint",
    "save_checkpoint",
    "TrainConfig",
    "TrainResult",
    "edge_units",
    "sample_batch",
    "train",
    "DiffusionMatrix",
    "SrwrConfig",
    "build_diffusion_matrix",
    "load_diffusion",
    "save_diffusion",
    "srwr_rank",
    "DecoderConfig",
    "NeighborContext",
    "NeighborEntry",
    "build_context",
    "decode",
    "precision_at_k",
    "predict_sign",
    "read_explanations",
    "reference_neighbors",
    "write_explanations",
    "EvalReport",
    "evaluate",
    "explanation_precision",
    "compare_encodings",
    "load_fixture_pair",
    "node_walk_profile",
    "spe_signature",
    "walk_signature",
    "wl_signatures",
    "PipelineSettings",
    "load_embedding_context",
    "load_settings",
    "parse_config_file",
    "resolve_settings",
    "run_pipeline",
    "__version__",
]
