"""Exact reachable-angle closure and its Markov chain for rational alpha.

With alpha = pi/n the post-collision angle lives on a finite set that
exact Fraction arithmetic enumerates with no float error at all.  The
script prints the closure for alpha = pi/7 started in (0, alpha), the
transition matrix, and the stationary law, then contrasts the finite
picture with the truncated closure of an irrational alpha.

Run from the repository root:  python demos/exact_closure.py
"""

from fractions import Fraction

import numpy as np

from randbilliards import (
    BaseAngle,
    is_aperiodic,
    is_irreducible,
    reachable_angles,
    stationary_distribution,
    transition_matrix,
)

alpha = BaseAngle.rational(1, 7)
theta0 = Fraction(1, 20)  # theta0 = pi/20, inside (0, alpha)

rset = reachable_angles(theta0, alpha)
print(f"alpha = pi/7, theta0 = {theta0}*pi")
print(f"closure has {len(rset.states)} states (sign*theta0 + j*pi + k*alpha):")
ratios = [st.sign * rset.theta0_ratio + st.j + st.k * alpha.ratio for st in rset.states]
for st, ratio, value in zip(rset.states, ratios, rset.values):
    print(f"  sign={st.sign:+d} j={st.j} k={st.k}   {str(ratio):>8} * pi  =  {value:.6f}")

P = transition_matrix(rset)
print("\ntransition matrix (rows = current state):")
with np.printoptions(precision=4, suppress=True):
    print(P)
print(f"irreducible: {is_irreducible(P)}, aperiodic: {is_aperiodic(P)}")

# The stationary law of the chain is the sine-weighted restriction of
# the invariant surface measure to the closure.
pi_hat = stationary_distribution(P)
sine = np.sin(rset.values) / np.sin(rset.values).sum()
print("\nstationary distribution vs normalized sin(theta):")
for ratio, p, s in zip(ratios, pi_hat, sine):
    print(f"  {str(ratio):>8} * pi   {p:.12f}   {s:.12f}")
print(f"max |pi_hat - sine| = {np.abs(pi_hat - sine).max():.3e}")

# Irrational alpha: new angles keep appearing, so the enumeration is
# depth-truncated and only ever a finite window into an infinite set.
alpha_irr = BaseAngle.real(0.45)
for depth in (4, 6, 8, 10):
    r = reachable_angles(0.3, alpha_irr, max_depth=depth)
    print(f"alpha = 0.45, depth {depth:>2}: {len(r.states):>4} states, truncated = {r.truncated}")
