"""Staged end-to-end runs with on-disk artifacts.

A run reads an edge list, splits it, trains the encoder, builds the
diffusion matrix, and scores the held-out edges. Any subset of stages can
be requested; artifacts a later stage needs are loaded from the output
directory when the producing stage is skipped, except cheap ones (the
split), which are recomputed in memory from the same seed.

Everything downstream of the split sees the training graph only, so no
held-out edge leaks into walks, the diffusion matrix, or decoder contexts.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path

from .encoding import load_walkset, save_walkset, spectral_init
from .errors import ConfigError, StageError
from .evaluation import evaluate
from .explain import DecoderConfig, write_explanations
from .graph import (graph_checksum, load_edge_list, load_split, save_split,
                    split_edges, training_graph)
from .model import (ModelConfig, build_encoder_inputs, encode,
                    load_checkpoint, save_checkpoint)
from .srwr import SrwrConfig, build_diffusion_matrix, load_diffusion, save_diffusion
from .training import TrainConfig, train

STAGES = ("ingest", "split", "train", "srwr", "eval")

# key -> (parser, default); config files use exactly these names
_SCHEMA = {
    "d": (int, 128),
    "layers": (int, 1),
    "heads": (int, 4),
    "D": (int, 10),
    "r": (int, 8),
    "l": (int, 20),
    "m_max": (int, None),
    "ffn": (str, "gelu"),
    "use_adjacency_bias": (bool, True),
    "use_walk_bias": (bool, True),
    "use_centrality": (bool, True),
    "allow_large": (bool, False),
    "seed": (int, 0),
    "lr": (float, 1e-3),
    "weight_decay": (float, 5e-4),
    "lambda": (float, 5.0),
    "no_link_ratio": (float, 1.0),
    "max_epochs": (int, 200),
    "patience": (int, 20),
    "rel_tol": (float, 1e-4),
    "ratio": (float, 0.8),
    "restart": (float, 0.15),
    "beta": (float, 0.5),
    "gamma": (float, 0.5),
    "srwr_tol": (float, 1e-9),
    "srwr_max_iters": (int, 1000),
    "pos_threshold": (float, 1e-4),
    "neg_threshold": (float, -1e-4),
    "K": (int, 40),
    "n_sample": (int, 200),
    "symmetric_decode": (bool, False),
    "precision_k": (int, 5),
    "undirected": (bool, False),
    "threads": (int, 1),
}

# capacity knobs that cannot change any produced numbers
_HASH_EXEMPT = ("threads", "allow_large")

_BOOL_WORDS = {"true": True, "yes": True, "1": True,
               "false": False, "no": False, "0": False}


def _parse_value(key: str, raw: str, lineno: int):
    kind = _SCHEMA[key][0]
    try:
        if kind is bool:
            try:
                return _BOOL_WORDS[raw.lower()]
            except KeyError:
                raise ValueError(raw)
        return kind(raw)
    except ValueError:
        raise ConfigError(
            f"line {lineno}: cannot read {raw!r} as {kind.__name__} for {key!r}")


def parse_config_file(path) -> dict:
    """Read a flat ``key = value`` file; '#' starts a comment."""
    values: dict = {}
    for lineno, raw in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, value, lineno)
    return values


@dataclass(frozen=True)
class PipelineSettings:
    model: ModelConfig
    train: TrainConfig
    srwr: SrwrConfig
    decoder: DecoderConfig
    ratio: float
    precision_k: int
    undirected: bool
    threads: int
    settings_hash: str


def resolve_settings(values: dict | None = None) -> PipelineSettings:
    """Merge overrides into the defaults and build the stage configs.

    The settings hash covers every value that can alter produced numbers;
    capacity knobs like thread count are exempt so that runs differing
    only in them stay byte-identical.
    """
    values = dict(values or {})
    unknown = set(values) - set(_SCHEMA)
    if unknown:
        raise ConfigError(f"unknown settings: {sorted(unknown)}")
    merged = {key: values.get(key, default) for key, (_, default) in _SCHEMA.items()}
    hashed = {k: v for k, v in sorted(merged.items()) if k not in _HASH_EXEMPT}
    digest = hashlib.sha256(
        json.dumps(hashed, sort_keys=True).encode()).hexdigest()[:12]
    seed = merged["seed"]
    model = ModelConfig(
        embed_dim=merged["d"],
        num_layers=merged["layers"],
        num_heads=merged["heads"],
        max_degree=merged["D"],
        num_walks=merged["r"],
        walk_len=merged["l"],
        max_path_len=merged["m_max"],
        ffn_activation=merged["ffn"],
        use_adjacency_bias=merged["use_adjacency_bias"],
        use_walk_bias=merged["use_walk_bias"],
        use_centrality=merged["use_centrality"],
        allow_large=merged["allow_large"],
        seed=seed,
    )
    tcfg = TrainConfig(
        lr=merged["lr"],
        weight_decay=merged["weight_decay"],
        lam=merged["lambda"],
        no_link_ratio=merged["no_link_ratio"],
        max_epochs=merged["max_epochs"],
        patience=merged["patience"],
        rel_tol=merged["rel_tol"],
        seed=seed,
    )
    srwr = SrwrConfig(
        restart=merged["restart"],
        beta=merged["beta"],
        gamma=merged["gamma"],
        tol=merged["srwr_tol"],
        max_iters=merged["srwr_max_iters"],
        pos_threshold=merged["pos_threshold"],
        neg_threshold=merged["neg_threshold"],
    )
    decoder = DecoderConfig(
        k=merged["K"],
        n_sample=merged["n_sample"],
        symmetric=merged["symmetric_decode"],
        seed=seed,
    )
    return PipelineSettings(
        model=model, train=tcfg, srwr=srwr, decoder=decoder,
        ratio=merged["ratio"], precision_k=merged["precision_k"],
        undirected=merged["undirected"], threads=merged["threads"],
        settings_hash=digest)


def load_settings(config_path=None, overrides: dict | None = None) -> PipelineSettings:
    """Settings from an optional config file plus programmatic overrides."""
    values = parse_config_file(config_path) if config_path else {}
    values.update(overrides or {})
    return resolve_settings(values)


def _canonical_stages(stages) -> tuple:
    if stages is None:
        return STAGES
    requested = set(stages)
    unknown = requested - set(STAGES)
    if unknown:
        raise ConfigError(f"unknown stages: {sorted(unknown)}")
    return tuple(s for s in STAGES if s in requested)


def _obtain_walkset(train_graph, model_cfg, cache_path: Path):
    """Reuse a cached walk set when it matches this graph and shape."""
    checksum = graph_checksum(train_graph)
    if cache_path.exists():
        try:
            cached = load_walkset(cache_path, expected_checksum=checksum)
            if (cached.num_walks, cached.walk_len) == (model_cfg.num_walks,
                                                       model_cfg.walk_len):
                return cached, False
        except ConfigError:
            pass
    return None, True


def load_embedding_context(edge_path, out_dir,
                           settings: PipelineSettings | None = None):
    """Reconstruct what sign prediction needs from stored artifacts.

    Returns ``(z, train_graph, diffusion, model_cfg)``. The checkpoint must
    exist in ``out_dir``; the diffusion matrix is optional and ``None``
    when absent. The split is reloaded, or recomputed from the seed when
    its files are missing, so contexts never see held-out edges.
    """
    settings = settings or resolve_settings()
    out = Path(out_dir)
    if not (out / "checkpoint.npz").exists():
        raise StageError("predict", "checkpoint.npz not found; run the "
                                    "train stage first")
    params, model_cfg = load_checkpoint(out / "checkpoint.npz")
    graph = load_edge_list(edge_path, undirected=settings.undirected)
    if (out / "split.json").exists():
        split = load_split(out)
    else:
        split = split_edges(graph, settings.ratio, settings.model.seed)
    train_graph = training_graph(graph, split)
    diffusion = (load_diffusion(out / "diffusion.tsv")
                 if (out / "diffusion.tsv").exists() else None)
    cached, _ = _obtain_walkset(train_graph, model_cfg, out / "walks.npz")
    inputs = build_encoder_inputs(train_graph, model_cfg, walkset=cached)
    z = encode(inputs, params, model_cfg).data
    return z, train_graph, diffusion, model_cfg


def run_pipeline(edge_path, out_dir, settings: PipelineSettings | None = None,
                 stages=None) -> dict:
    """Run the requested stages and return a summary.

    The summary maps artifact names to paths and carries the graph counts,
    the training trace tail, and the report when the eval stage ran.
    """
    settings = settings or resolve_settings()
    stages = _canonical_stages(stages)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    summary: dict = {"stages": list(stages), "artifacts": {},
                     "settings_hash": settings.settings_hash}

    graph = load_edge_list(edge_path, undirected=settings.undirected)
    summary["graph"] = {"nodes": graph.num_nodes, "pos_edges": graph.num_pos,
                        "neg_edges": graph.num_neg}

    needs_split = any(s in stages for s in ("split", "train", "srwr", "eval"))
    split = None
    if needs_split:
        if "split" in stages:
            split = split_edges(graph, settings.ratio, settings.model.seed)
            save_split(split, out)
            summary["artifacts"]["split"] = str(out / "split.json")
        elif (out / "split.json").exists():
            split = load_split(out)
        else:
            split = split_edges(graph, settings.ratio, settings.model.seed)
    train_graph = training_graph(graph, split) if split is not None else graph

    result = None
    if "train" in stages:
        cached, fresh = _obtain_walkset(train_graph, settings.model,
                                        out / "walks.npz")
        inputs = build_encoder_inputs(train_graph, settings.model,
                                      walkset=cached)
        if fresh:
            save_walkset(inputs.walkset, out / "walks.npz")
        summary["artifacts"]["walks"] = str(out / "walks.npz")
        result = train(train_graph, split.train, settings.model,
                       settings.train, inputs=inputs,
                       checkpoint_path=out / "checkpoint.npz")
        save_checkpoint(out / "checkpoint.npz", result.params, settings.model)
        trace = "epoch,loss\n" + "".join(
            f"{i},{value!r}\n" for i, value in enumerate(result.loss_trace))
        (out / "loss_trace.csv").write_text(trace, encoding="utf-8")
        summary["artifacts"]["checkpoint"] = str(out / "checkpoint.npz")
        summary["artifacts"]["loss_trace"] = str(out / "loss_trace.csv")
        summary["train"] = {"epochs_run": result.epochs_run,
                            "stopped_early": result.stopped_early,
                            "final_loss": result.loss_trace[-1] if result.loss_trace else None}

    diffusion = None
    if "srwr" in stages:
        diffusion = build_diffusion_matrix(train_graph, settings.srwr,
                                           config_hash=settings.settings_hash,
                                           threads=settings.threads)
        save_diffusion(diffusion, out / "diffusion.tsv")
        summary["artifacts"]["diffusion"] = str(out / "diffusion.tsv")

    if "eval" in stages:
        if result is not None:
            params, model_cfg = result.params, settings.model
        elif (out / "checkpoint.npz").exists():
            params, model_cfg = load_checkpoint(out / "checkpoint.npz")
        else:
            raise StageError("eval", "checkpoint.npz not found; run the "
                                     "train stage first")
        if diffusion is None:
            if (out / "diffusion.tsv").exists():
                diffusion = load_diffusion(out / "diffusion.tsv")
            else:
                raise StageError("eval", "diffusion.tsv not found; run the "
                                         "srwr stage first")
        cached, _ = _obtain_walkset(train_graph, model_cfg, out / "walks.npz")
        inputs = build_encoder_inputs(train_graph, model_cfg, walkset=cached)
        z = encode(inputs, params, model_cfg).data
        z_ref = spectral_init(train_graph, model_cfg.embed_dim)
        report, records = evaluate(
            z, train_graph, diffusion, split.test, z_ref,
            cfg=settings.decoder, precision_k=settings.precision_k,
            config_hash=settings.settings_hash)
        write_explanations(records, out / "explanations.jsonl")
        (out / "report.json").write_text(report.to_json(), encoding="utf-8")
        meta = {"wall_time_s": time.monotonic() - started,
                "stages": list(stages)}
        (out / "run_meta.json").write_text(
            json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        summary["artifacts"]["explanations"] = str(out / "explanations.jsonl")
        summary["artifacts"]["report"] = str(out / "report.json")
        summary["report"] = report
    return summary
