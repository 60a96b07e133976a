"""
Error against the number of samples
===================================

A normalized, truncated kernel is approximated for a range of budgets M,
with the index set grown as M^(lambda - lambda beta / (2 alpha) + 1/4). The
exact squared error of each draw is averaged over independent draws of the
rule and the shift. The worst-case lower bound is drawn for reference; it
applies to the hardest function in the unit ball, not to this one.
"""

import numpy as np
import matplotlib.pyplot as plt

from randlattice.analysis import convergence_experiment
from randlattice.testfns import kernel_truncation

alpha, gamma = 1, (1.0, 0.5)
f = kernel_truncation(2, alpha, gamma, radius=128)

res = convergence_experiment(f, [64, 128, 256, 512, 1024], 2, alpha, gamma,
                             tau=0.5, seed=1, n_trials=50)
M = np.array([r["M"] for r in res.rows])
rmse = np.sqrt([r["mse_mean"] for r in res.rows])
print(f"fitted slope {res.slope:.3f}, reference exponent {res.target_exponent:.3f}")

fig, ax = plt.subplots()
ax.loglog(M, rmse, "o-", label="RMSE")
ax.loglog(M, np.sqrt([r["lower_bound"] for r in res.rows]), "--", label="worst-case lower bound")
ax.loglog(M, res.fitted_constant * M ** res.slope, ":", label="fit (not a proven constant)")
ax.set_xlabel("M")
ax.legend()
plt.show()
