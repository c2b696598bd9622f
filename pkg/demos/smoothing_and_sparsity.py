"""Show where Dirichlet smoothing earns its keep: sparse graphs.

The smoothed model STLGM blends the local estimate (counts around the two
endpoints) with the cluster-level estimate, weighting the global side by
lambda = mu / (n + mu) where n is the local evidence count. When edges are
plentiful the local counts dominate and STLGM behaves like plain LTLGM;
when they are thin it leans on the clustering. Sweeping the same planted
graph family across edge densities makes the crossover visible: the
accuracy gap between STLGM and LTLGM is widest at the sparse end.

Runs three seeds at three densities; takes roughly half a minute.
"""

import numpy as np

from linklabel import ClusterConfig, SmoothingConfig, generate_planted, sparsity_sweep

DENSITIES = (0.15, 0.5, 1.0)
SEEDS = (0, 1, 2)

scores = {(d, m): [] for d in DENSITIES for m in ("ltlgm", "stlgm")}
for seed in SEEDS:
    graph, _roles = generate_planted(
        n_nodes=120, n_roles=3, edge_prob=0.3, noise=0.1, seed=seed)
    records = sparsity_sweep(
        graph, DENSITIES, ["ltlgm", "stlgm"],
        model_config=SmoothingConfig(mu=2.0),
        cluster_config=ClusterConfig(K=3, restarts=2, max_sweeps=10, seed=seed),
        folds=3, seed=seed, threads=4)
    for r in records:
        scores[(r["density"], r["model"])].append(r["balanced_accuracy"])

print(f"mean balanced accuracy over {len(SEEDS)} seeds "
      f"(120 nodes, 3 roles, 10% label noise):\n")
print(f"{'density':>8} {'ltlgm':>8} {'stlgm':>8} {'gap':>8}")
for d in DENSITIES:
    lt = float(np.mean(scores[(d, 'ltlgm')]))
    st = float(np.mean(scores[(d, 'stlgm')]))
    print(f"{d:>8.2f} {lt:>8.3f} {st:>8.3f} {st - lt:>+8.3f}")

print("\nAt full density solid local evidence drives lambda toward zero and")
print("the models converge; at the sparse end the cluster backoff does the")
print("work. In between both effects are in play and the gap peaks.")
