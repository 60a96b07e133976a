"""
Where the coefficient error comes from
======================================

A lattice rule cannot tell h apart from h + l when l sits in the dual
lattice. The estimated coefficient of h therefore collects every alias of h,
each rotated by the random shift.
"""

import numpy as np
import matplotlib.pyplot as plt

from randlattice import FourierPolynomial, LatticeRule, ShiftedLatticeRule, build_index_set
from randlattice.approx import alias_expansion, estimate_coeffs, sample_function

rule = ShiftedLatticeRule(LatticeRule(31, (1, 12)), (0.2, 0.7))

# one mode inside the index set, one of its aliases outside
f = FourierPolynomial([(1, 0), (1 + 12, -1)], [1.0, 0.3])
A = build_index_set(2, 1, (1.0, 1.0), 4)
est = estimate_coeffs(sample_function(f, rule), rule, A)

h = (1, 0)
print("true     ", f.coefficient(h))
print("estimate ", est.coefficient(h))
print("alias sum", alias_expansion(f, rule, h))

# the dual lattice near the origin
r = np.arange(-40, 41)
L = np.stack(np.meshgrid(r, r, indexing="ij"), axis=-1).reshape(-1, 2)
dual = L[(L @ np.array(rule.gen)) % rule.n_points == 0]

fig, ax = plt.subplots()
ax.plot(dual[:, 0], dual[:, 1], ".", color="0.4")
ax.plot(*A.members.T, "s", ms=3, label="index set")
ax.set_aspect("equal")
ax.legend()
plt.show()
