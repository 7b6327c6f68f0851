"""Command line interface.

Exit codes: 0 on success, 2 for configuration or input errors, 3 for
stage failures (missing artifacts, divergence, convergence problems).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import (ConfigError, ConvergenceError, DivergenceError,
                     EdgeListError, SamplingError, StageError)
from .explain import decode, write_explanations
from .expressivity import compare_encodings, load_fixture_pair
from .graph import generate_balanced_graph, load_edge_list, save_edge_list
from .pipeline import load_embedding_context, load_settings, run_pipeline


def read_pairs(path) -> np.ndarray:
    """Parse a file of ``src dst`` node pairs, one per line."""
    rows = []
    for lineno, raw in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise EdgeListError("expected 'src dst'", line=lineno)
        try:
            rows.append((int(fields[0]), int(fields[1])))
        except ValueError:
            raise EdgeListError(f"non-integer node id in {line!r}", line=lineno)
    if not rows:
        raise EdgeListError("no pairs found")
    return np.array(rows, dtype=np.int64)


def _add_run_arguments(parser, need_out=True):
    parser.add_argument("--edges", required=True, help="edge list file")
    if need_out:
        parser.add_argument("--out", required=True, help="artifact directory")
    parser.add_argument("--config", help="flat key = value settings file")
    parser.add_argument("--seed", type=int, help="override the run seed")
    parser.add_argument("--walks", type=int, help="walks sampled per node")
    parser.add_argument("--walk-len", type=int, help="length of each walk")
    parser.add_argument("--ratio", type=float, help="training fraction")
    parser.add_argument("--threads", type=int, help="diffusion worker count")
    parser.add_argument("--undirected", action="store_true", default=None,
                        help="treat input lines as undirected edges")


def _collect_overrides(args) -> dict:
    mapping = {"seed": "seed", "walks": "r", "walk_len": "l",
               "ratio": "ratio", "threads": "threads",
               "undirected": "undirected"}
    out = {}
    for attr, key in mapping.items():
        value = getattr(args, attr, None)
        if value is not None:
            out[key] = value
    return out


def _settings(args):
    return load_settings(getattr(args, "config", None), _collect_overrides(args))


def _print_summary(summary) -> None:
    graph = summary["graph"]
    print(f"nodes {graph['nodes']}")
    print(f"pos_edges {graph['pos_edges']}")
    print(f"neg_edges {graph['neg_edges']}")
    if "train" in summary:
        print(f"epochs_run {summary['train']['epochs_run']}")
        print(f"final_loss {summary['train']['final_loss']}")
    for name, path in sorted(summary["artifacts"].items()):
        print(f"{name} {path}")


def _cmd_train(args) -> int:
    settings = _settings(args)
    summary = run_pipeline(args.edges, args.out, settings,
                           stages=("ingest", "split", "train"))
    _print_summary(summary)
    return 0


def _cmd_srwr(args) -> int:
    settings = _settings(args)
    summary = run_pipeline(args.edges, args.out, settings, stages=("srwr",))
    _print_summary(summary)
    return 0


def _cmd_eval(args) -> int:
    settings = _settings(args)
    summary = run_pipeline(args.edges, args.out, settings, stages=("eval",))
    sys.stdout.write(summary["report"].to_json())
    return 0


def _predictions(args):
    settings = _settings(args)
    pairs = read_pairs(args.pairs)
    z, train_graph, diffusion, _ = load_embedding_context(
        args.edges, args.out, settings)
    bad = pairs[(pairs < 0) | (pairs >= train_graph.num_nodes)]
    if bad.size:
        raise EdgeListError(f"node id {int(bad.flat[0])} outside the graph")
    signs, records = decode(z, train_graph, diffusion, pairs, settings.decoder)
    return pairs, signs, records


def _cmd_predict(args) -> int:
    pairs, signs, _ = _predictions(args)
    lines = "".join(f"{u}\t{v}\t{s}\n" for (u, v), s in zip(pairs, signs))
    if args.output:
        Path(args.output).write_text(lines, encoding="utf-8")
    else:
        sys.stdout.write(lines)
    return 0


def _cmd_explain(args) -> int:
    _, _, records = _predictions(args)
    if args.output:
        write_explanations(records, args.output)
    else:
        for record in records:
            sys.stdout.write(json.dumps(record, sort_keys=True) + "\n")
    return 0


def _cmd_expressivity(args) -> int:
    if args.fixture:
        graph_a, graph_b = load_fixture_pair(args.fixture)
    else:
        graph_a = load_edge_list(args.pair[0])
        graph_b = load_edge_list(args.pair[1])
    result = compare_encodings(graph_a, graph_b, max_len=args.max_len)
    print(json.dumps(result, sort_keys=True))
    return 0


def _cmd_gen_synthetic(args) -> int:
    graph = generate_balanced_graph(args.nodes, p_intra=args.p_intra,
                                    p_inter=args.p_inter, noise=args.noise,
                                    seed=args.seed)
    save_edge_list(graph, args.output)
    print(f"nodes {graph.num_nodes}")
    print(f"pos_edges {graph.num_pos}")
    print(f"neg_edges {graph.num_neg}")
    print(f"output {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signwalk",
        description="signed graph embeddings with explainable sign prediction")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="split the graph and train the encoder")
    _add_run_arguments(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("srwr", help="build the diffusion matrix")
    _add_run_arguments(p)
    p.set_defaults(func=_cmd_srwr)

    p = sub.add_parser("eval", help="score held-out edges, print the report")
    _add_run_arguments(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("predict", help="predict signs for node pairs")
    _add_run_arguments(p)
    p.add_argument("--pairs", required=True, help="file of 'src dst' lines")
    p.add_argument("--output", help="write predictions here instead of stdout")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("explain", help="emit explanation records for pairs")
    _add_run_arguments(p)
    p.add_argument("--pairs", required=True, help="file of 'src dst' lines")
    p.add_argument("--output", help="write JSON lines here instead of stdout")
    p.set_defaults(func=_cmd_explain)

    p = sub.add_parser("expressivity-check",
                       help="compare what three encodings can distinguish")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--pair", nargs=2, metavar=("A", "B"),
                       help="two edge list files")
    group.add_argument("--fixture", choices=("spe_blind", "wl_blind"),
                       help="shipped six-node pair")
    p.add_argument("--max-len", type=int, default=None,
                   help="walk length cap for the walk profile")
    p.set_defaults(func=_cmd_expressivity)

    p = sub.add_parser("gen-synthetic",
                       help="write a two-community synthetic edge list")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--noise", type=float, default=0.0,
                   help="independent sign flip probability")
    p.add_argument("--p-intra", type=float, default=0.2)
    p.add_argument("--p-inter", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_gen_synthetic)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, EdgeListError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (StageError, SamplingError, ConvergenceError,
            DivergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
