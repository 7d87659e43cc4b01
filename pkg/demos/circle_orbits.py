"""Random orbits on the circular table and their caustics.

Every chord of an orbit with a fixed angle set stays tangent to one of
finitely many concentric circles; the smallest tangency radius is the
caustic.  A right angle in the reachable set degenerates the caustic to
the center (diameters).  The script draws both situations and prints
the radii, then writes the library's own SVG rendering alongside the
matplotlib figure.

Run from the repository root:  python demos/circle_orbits.py
"""

import pathlib
from fractions import Fraction

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from randbilliards import (
    BaseAngle,
    PhasePoint,
    caustic,
    dense_orbit_discrepancy,
    reachable_angles,
    simulate,
    trajectory_svg,
)

HERE = pathlib.Path(__file__).parent


def draw(ax, traj, est, n_chords, title):
    ths = np.linspace(0, 2 * np.pi, 400)
    ax.plot(np.cos(ths), np.sin(ths), "k", lw=1.2)
    s = traj.s[: n_chords + 1]
    ax.plot(np.cos(s), np.sin(s), lw=0.4, color="tab:blue", alpha=0.7)
    if est.radius > 0:
        ax.plot(est.radius * np.cos(ths), est.radius * np.sin(ths), "r", lw=1.0)
    ax.set_aspect("equal")
    ax.set_axis_off()
    ax.set_title(title, fontsize=10)


fig, axes = plt.subplots(1, 2, figsize=(9, 4.6))

# Generic start: the caustic is a genuine circle of positive radius.
alpha = BaseAngle.rational(1, 7)
traj = simulate(PhasePoint(s=0.0, theta=np.pi / 20), n=4000, alpha=alpha, seed=7)
est = caustic(traj)
print(f"generic orbit:    caustic radius {est.radius:.6f}, degenerate = {est.degenerate}")
print(f"  radius attained at theta = {est.attaining_angle:.6f} (|cos| closest to 1)")
# Rational alpha and theta0/pi make every arc increment a rational
# multiple of pi, so the positions live on a finite lattice; coarse
# bins fill up anyway.
lattice = len(np.unique(np.round(np.mod(traj.s, 2 * np.pi), 9)))
print(f"  positions land on {lattice} lattice points;", end=" ")
print(f"discrepancy (20 bins) = {dense_orbit_discrepancy(traj, bins=20):.4f}")
draw(axes[0], traj, est, 220, f"caustic r = {est.radius:.3f}")

# theta0 = pi/2 - 2*alpha reaches pi/2 in one step, so some chords are
# diameters and the caustic collapses to the center.
theta0 = Fraction(1, 2) - Fraction(2, 7)
rset = reachable_angles(theta0, alpha)
est_d = caustic(rset)
traj_d = simulate(PhasePoint(s=0.0, theta=float(theta0) * np.pi), n=4000, alpha=alpha, seed=7)
print(f"degenerate orbit: caustic radius {est_d.radius:.6f}, degenerate = {est_d.degenerate}")
draw(axes[1], traj_d, est_d, 220, "degenerate (diameters)")

# Irrational alpha: no lattice, positions equidistribute on the whole rim.
traj_i = simulate(PhasePoint(s=0.0, theta=1.0), n=200000, alpha=BaseAngle.real(0.45), seed=11)
print(f"irrational alpha: discrepancy (64 bins) over 2e5 steps = "
      f"{dense_orbit_discrepancy(traj_i, bins=64):.4f}")

fig.tight_layout()
fig.savefig(HERE / "circle_orbits.png", dpi=150)
print(f"wrote {HERE / 'circle_orbits.png'}")

svg = trajectory_svg(traj, est, max_chords=300)
(HERE / "circle_orbit.svg").write_text(svg)
print(f"wrote {HERE / 'circle_orbit.svg'}")
