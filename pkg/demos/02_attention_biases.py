#!/usr/bin/env python3
"""Inspect the structural signals the encoder feeds into attention.

A small graph keeps the matrices readable. Three ingredients show up:
spectral node features, the degree-normalized signed adjacency, and
inverse walk distances estimated from non-backtracking random walks.
"""

import numpy as np

from signwalk import (ModelConfig, SignedGraph, adjacency_bias,
                      build_encoder_inputs, sample_signed_walks,
                      shortest_path_signed_encoding, spectral_init,
                      walk_distances)

np.set_printoptions(precision=3, suppress=True, linewidth=100)

# A balanced square plus one hostile node attached to two corners.
graph = SignedGraph(
    5,
    [(0, 1), (1, 0), (1, 2), (2, 1), (2, 3), (3, 2), (3, 0), (0, 3)],
    [(4, 0), (0, 4), (4, 2), (2, 4)],
)

print("spectral features (first two dims):")
print(spectral_init(graph, dim=2))

print("\ndegree-normalized signed adjacency:")
print(adjacency_bias(graph))

walks = sample_signed_walks(graph, num_walks=6, walk_len=8, seed=2)
dists = walk_distances(walks, graph, m_max=8)
print("\nsigned distances along the first walk of each node:")
print(dists.psi[0])

print("\nsigned shortest-path encoding:")
print(shortest_path_signed_encoding(graph))

cfg = ModelConfig(embed_dim=4, num_layers=1, num_heads=2, max_degree=4,
                  num_walks=6, walk_len=8, seed=2)
inputs = build_encoder_inputs(graph, cfg)
print(f"\nencoder input features: {inputs.features.shape}")
print(f"walk distance stack: {dists.psi.shape} (walks, nodes, nodes)")
