"""
A function no lattice rule handles well
=======================================

The fooling polynomial spreads unit Korobov energy evenly over the box
|h_1|, |h_2| <= sqrt(M). Every lattice with N <= M points has a dual vector
inside that box with both entries nonzero, so two of these frequencies
always collide. Averaging over every rule the construction can output
shows the error never drops below the bound.
"""

import numpy as np
import matplotlib.pyplot as plt

from randlattice import build_index_set, fooling_function
from randlattice.analysis import enumerated_expected_sq_error, mse_lower_bound

gamma = (1.0, 1.0)
Ms = [4, 10, 20, 40, 80]
for alpha in (1, 2):
    mse = []
    for M in Ms:
        f = fooling_function(M, 2, alpha, gamma)
        A = build_index_set(2, alpha, gamma, M)
        mse.append(enumerated_expected_sq_error(f, M, 0.5, alpha, gamma, A))
    plt.loglog(Ms, np.sqrt(mse), "o-", label=f"alpha = {alpha}")
    plt.loglog(Ms, np.sqrt([mse_lower_bound(M, alpha, gamma) for M in Ms]), "k--", lw=0.8)

plt.xlabel("M")
plt.ylabel("RMSE of the fooling polynomial")
plt.legend()
plt.show()
