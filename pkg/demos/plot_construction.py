"""
Building a generating vector at random
======================================

The construction draws a prime N from (M/2, M], fixes z_1 = 1 and, for each
further coordinate, picks uniformly among the best-scoring fraction tau of
all candidates. Here we look at the score landscape of one step.
"""

import numpy as np
import matplotlib.pyplot as plt

from randlattice import CbcConfig, candidate_scores, randomized_cbc, select_candidate_set
from randlattice.analysis import theorem3_bound

cfg = CbcConfig(M=1000, d=3, alpha=1, gamma=(1.0, 0.5, 0.25), tau=0.5, seed=7)
res = randomized_cbc(cfg)
N = res.rule.n_points
print("N =", N, " z =", res.rule.gen)

# scores of every candidate for the second coordinate
scores = candidate_scores(N, [1], cfg.alpha, cfg.gamma[:2])
kept = select_candidate_set(scores, cfg.tau)

fig, ax = plt.subplots()
ax.plot(np.arange(1, N), scores, ".", ms=2, color="0.6", label="all candidates")
ax.plot(kept, scores[kept - 1], ".", ms=2, label=f"candidate set (tau = {cfg.tau})")
ax.axhline(theorem3_bound(N, 2, cfg.alpha, cfg.gamma, cfg.tau), ls="--", label="guaranteed cap")
ax.set_yscale("log")
ax.set_xlabel("z_2")
ax.set_ylabel("criterion")
ax.legend()

# every step stays below its cap
for s, R in enumerate(res.per_step_scores, 1):
    print(s, R, theorem3_bound(N, s, cfg.alpha, cfg.gamma, cfg.tau))

plt.show()
