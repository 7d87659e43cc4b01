"""The dichotomy for angle-measure evolution under the transfer operator.

Starting from a density far from equilibrium, irrational alpha drives
the total-variation distance to the stationary law mu to zero, while
rational alpha = pi/n traps mass started inside the invariant intervals
I_j = (pi(4j-3)/4n, pi(4j-1)/4n) forever, so the distance stalls at a
positive floor.  The floor equals mu of the complement of the union,
which has the closed form 1 - 1/(2 cos(pi/4n)).

Run from the repository root:  python demos/knudsen_dichotomy.py
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from randbilliards import (
    AngleDensity,
    BaseAngle,
    aligned_bins,
    invariant_intervals,
    invariant_union_mu,
    knudsen_run,
)

HERE = pathlib.Path(__file__).parent
STEPS = 400

# Irrational alpha, generic start: TV -> 0.
alpha_irr = BaseAngle.real(0.45)
init = AngleDensity.uniform_interval(256, 0.4, 0.9)
tv_irr = knudsen_run(init, alpha_irr, STEPS)
print(f"irrational alpha = 0.45: TV {tv_irr[0]:.4f} -> {tv_irr[-1]:.2e} after {STEPS} steps")

# Rational alpha = pi/7, start supported inside the first invariant
# interval on a grid whose cells align with the interval endpoints.
n = 7
alpha_rat = BaseAngle.rational(1, n)
bins = aligned_bins(alpha_rat)
a, b = invariant_intervals(alpha_rat)[0]
init_rat = AngleDensity.uniform_interval(bins, float(a) * np.pi + 1e-9, float(b) * np.pi - 1e-9)
tv_rat = knudsen_run(init_rat, alpha_rat, STEPS)
floor = 1.0 - invariant_union_mu(n)
print(f"rational alpha = pi/7:   TV {tv_rat[0]:.4f} -> {tv_rat[-1]:.6f} after {STEPS} steps")
print(f"  stall floor mu(complement of union I_j) = {floor:.6f}")
print(f"  min TV over the run = {tv_rat.min():.6f} (never below the floor)")

fig, ax = plt.subplots(figsize=(7, 4.2))
ax.semilogy(tv_irr, label="alpha = 0.45 (irrational)")
ax.semilogy(tv_rat, label="alpha = pi/7, start in $I_1$")
ax.axhline(floor, color="k", ls="--", lw=0.8, label="stall floor")
ax.set_xlabel("step")
ax.set_ylabel(r"TV distance to $\mu$")
ax.legend()
fig.tight_layout()
fig.savefig(HERE / "knudsen_dichotomy.png", dpi=150)
print(f"wrote {HERE / 'knudsen_dichotomy.png'}")

# Same rational alpha but a start that straddles the union: mass
# cannot cross the union boundary in either direction, so the initial
# imbalance never heals and TV settles strictly between 0 and the floor.
init_mix = AngleDensity.uniform_interval(bins, 0.2, 2.9)
tv_mix = knudsen_run(init_mix, alpha_rat, STEPS)
print(f"straddling start at pi/7: TV settles near {tv_mix[-1]:.4f}")
