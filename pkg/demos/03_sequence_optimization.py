"""Optimizing the configuration sequence instead of drawing it at random.

The sensing matrix stacks the far-field responses of the K configurations
over a direction subset.  Its effective rank (exponentiated singular-value
entropy) measures how diverse the sequence is; greedy bit-flipping pushes it
several standard deviations above the random-sequence baseline.

Run:  python demos/03_sequence_optimization.py
"""

import numpy as np

from dmasense import (
    OBJECTIVE_KINDS,
    OptimizerConfig,
    build_grid,
    build_sensing_matrix,
    effective_rank,
    greedy_optimize,
    objective,
    optimization_subset,
    random_configs,
    random_sequence_stats,
    synthesize_model,
)

grid = build_grid(15.0, 15.0)
model = synthesize_model(48, grid, seed=5)
subset = optimization_subset(grid)  # every 10th non-polar direction
print(f"optimizing over {subset.size} directions -> {2 * subset.size} sensing-matrix columns")

# ----------------------------------------------------------------------
# 1. The objective on a random sequence
# ----------------------------------------------------------------------
K = 12
V = random_configs(K, model.n_meta, 6)
sm = build_sensing_matrix(model, V, subset)
print(f"\nrandom sequence of K={K}: sensing matrix {sm.H.shape}")
for kind in OBJECTIVE_KINDS:
    print(f"  {kind:28s}: {objective(sm, kind):.4f}  (upper bound {K})")

# ----------------------------------------------------------------------
# 2. Greedy coordinate ascent over the K * N_M control bits
#
# Every bit is tentatively flipped, only the affected sensing-matrix row is
# recomputed, and the flip sticks only if the objective strictly increases.
# The trace lists the value after each accepted flip of each restart.
# ----------------------------------------------------------------------
cfg = OptimizerConfig(restarts=2, max_sweeps=10, seed=7)
result = greedy_optimize(model, K, subset, "column_normalized", cfg)
print(f"\noptimized value: {result.best_value:.4f}")
print(f"sweeps per restart: {result.sweeps_used}")
print(f"accepted flips per restart: {[len(t) - 1 for t in result.trace]}")
first = result.trace[0]
print(f"restart 0 trace: {first[0]:.4f} -> {first[len(first)//2]:.4f} -> {first[-1]:.4f}")

# ----------------------------------------------------------------------
# 3. Separation from the random baseline
# ----------------------------------------------------------------------
print(f"\n{'K':>4s} {'random mean':>12s} {'random std':>11s} {'optimized':>10s} {'separation':>11s}")
for K in (5, 10, 20):
    mean, std, _ = random_sequence_stats(model, K, subset, "column_normalized", 100, seed=K)
    res = greedy_optimize(
        model, K, subset, "column_normalized",
        OptimizerConfig(restarts=2, max_sweeps=10, seed=50 + K),
    )
    sep = (res.best_value - mean) / std
    print(f"{K:>4d} {mean:>12.4f} {std:>11.5f} {res.best_value:>10.4f} {sep:>9.1f} sd")

print("\nthe normalized improvement grows with K: longer sequences leave more")
print("room above what random diversity already provides")
