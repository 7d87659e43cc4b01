"""Plot the four-branch reflection law and check its basic identities.

Run from the repository root:  python demos/reflection_law.py
Writes reflection_law.png next to this script.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from randbilliards import BaseAngle, breakpoints, probability_table

OUT = pathlib.Path(__file__).parent / "reflection_law.png"

alphas = [BaseAngle.rational(1, 7), BaseAngle.real(0.45)]
theta = np.linspace(1e-6, np.pi - 1e-6, 4000)

fig, axes = plt.subplots(1, 2, figsize=(11, 4), sharey=True)
for ax, alpha in zip(axes, alphas):
    P = probability_table(theta, alpha)
    for i in range(4):
        ax.plot(theta, P[:, i], label=f"$p_{i + 1}$")
    for b in breakpoints(alpha):
        ax.axvline(b, color="0.8", lw=0.6, zorder=0)
    ax.set_xlabel(r"$\theta$")
    ax.set_title(f"alpha = {alpha.value:.4f}")
    ax.set_xlim(0, np.pi)

    # Rows sum to one everywhere and the law is mirror symmetric:
    # reflecting theta across pi/2 swaps branches 1<->3 and 2<->4.
    print(f"alpha = {alpha.value:.6f}")
    print(f"  max |sum_i p_i - 1|      = {np.abs(P.sum(axis=1) - 1).max():.3e}")
    Pm = probability_table(np.pi - theta, alpha)
    mirror_err = np.abs(P - Pm[:, [2, 3, 0, 1]]).max()
    print(f"  max mirror-symmetry err  = {mirror_err:.3e}")
    print(f"  breakpoints: {[round(b, 4) for b in breakpoints(alpha)]}")

axes[0].set_ylabel("branch probability")
axes[0].legend(loc="upper center", ncol=4)
fig.tight_layout()
fig.savefig(OUT, dpi=150)
print(f"wrote {OUT}")
