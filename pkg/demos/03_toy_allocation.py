"""Joint versus disjoint allocation on a toy instance, checked against
exhaustive search."""

import numpy as np

from leoisac.alloc import RateInput, brute_force_p1, dmrab, jmra

# satellite 0 is marginally better for every cell, so best-rate matching
# piles all four cells onto it while satellite 1 sits idle
rho = np.array([[1.02e7, 1.01e7, 1.03e7, 1.02e7],
                [1.00e7, 1.00e7, 1.00e7, 1.00e7]])
users = np.array([50, 50, 50, 50])
inp = RateInput(rho, users, 0.0, n_comm=4, n_beams=1, ofdma_s=0.01, frame_s=0.04)

X_opt, best = brute_force_p1(inp)
for name, res in (("jmra", jmra(inp)), ("dmrab", dmrab(inp))):
    print(f"{name:6s} objective {res.objective:9.3f} ({res.objective / best:.3f} of optimum)")
    print(res.X)
print(f"optimum objective {best:9.3f}")
print(X_opt)
