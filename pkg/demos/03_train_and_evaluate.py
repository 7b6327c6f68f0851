#!/usr/bin/env python3
"""Train the encoder on a two-block graph and score held-out edges.

Runs the whole pipeline in memory: split, train with early stopping,
diffusion, then the explainable decoder over the test edges.
"""

from pathlib import Path

from signwalk import generate_balanced_graph, save_edge_list
from signwalk.pipeline import resolve_settings, run_pipeline

out = Path("demo_out")
out.mkdir(exist_ok=True)

graph = generate_balanced_graph(80, noise=0.05, seed=7)
edge_path = out / "train_demo.tsv"
save_edge_list(graph, edge_path)

settings = resolve_settings({
    "d": 32,
    "heads": 2,
    "layers": 1,
    "lambda": 3.0,
    "max_epochs": 120,
    "patience": 15,
    "K": 10,
    "precision_k": 5,
    "seed": 7,
})
print(f"settings hash: {settings.settings_hash}")

summary = run_pipeline(edge_path, out / "train_demo", settings)

report = summary["report"]
print(f"test units scored: {report.n_test_edges}")
print(f"accuracy: {report.accuracy:.4f}")
print(f"explanation precision@5: {report.precision_at_k:.4f}")
for label, stats in report.per_class.items():
    print(f"  {label}: {stats['correct']}/{stats['total']} "
          f"(recall {stats['recall']:.3f})")

trace = (out / "train_demo" / "loss_trace.csv").read_text().strip().splitlines()
print(f"epochs run: {len(trace) - 1}")
print("last three loss values:")
for line in trace[-3:]:
    print(f"  {line}")
