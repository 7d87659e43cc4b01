"""Reachable angle sets C(theta) and their finite Markov chains.

Every angle reachable from theta0 by admissible branch words has the form

    sign * theta0 + j*pi + k*alpha,   sign in {+1,-1},  j, k even,

so states are tracked symbolically as integer triples and never compared
through floats.  For rational alpha = m*pi/n the closure is finite with at
most n states (the branch words act through a dihedral group of rotations
and reflections of the circle of angles); for irrational alpha/pi the set
is countably infinite and the search is depth-limited.

State identity is decided exactly:

* rational alpha, theta0 an exact rational multiple of pi: states collapse
  by the exact Fraction value of (angle / pi);
* rational alpha, generic theta0: two triples coincide iff the sign and the
  integer j*n + k*m agree (a cross-sign coincidence would force theta0 onto
  the lattice pi/n * Z, which is excluded by the genericity check below);
* irrational alpha: raw (sign, j, k) triples are already distinct values.

A float theta0 within 1e-9 of the critical lattice pi/n * Z is snapped to
the exact lattice point, because there the generic key would silently
split states that are really equal (theta0 = pi/2 with n even, or theta0
a multiple of alpha).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    BranchRangeError,
    NumericalError,
    PreconditionError,
    SingularAngleError,
    TruncationError,
)
from .feres import BaseAngle, _admissible, admissible_branches, branch_probabilities

__all__ = [
    "SymbolicAngle",
    "ReachableSet",
    "symbolic_value",
    "reachable_angles",
    "transition_matrix",
    "is_irreducible",
    "is_aperiodic",
    "stationary_distribution",
    "reaches_interval",
]

_LATTICE_SNAP_TOL = 1e-9
DEFAULT_MAX_DEPTH = 12


@dataclass(frozen=True, order=True)
class SymbolicAngle:
    """sign*theta0 + j*pi + k*alpha with j, k even."""

    sign: int
    j: int
    k: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +-1, got {self.sign!r}")
        if self.j % 2 or self.k % 2:
            raise ValueError(f"j, k must be even, got ({self.j}, {self.k})")

    def apply(self, i: int) -> "SymbolicAngle":
        """Image under branch T_i, computed on the symbol."""
        s, j, k = self.sign, self.j, self.k
        if i == 1:
            return SymbolicAngle(s, j, k + 2)
        if i == 2:
            return SymbolicAngle(-s, 2 - j, -4 - k)
        if i == 3:
            return SymbolicAngle(s, j, k - 2)
        if i == 4:
            return SymbolicAngle(-s, -j, 4 - k)
        raise ValueError(f"branch id must be 1..4, got {i!r}")


def symbolic_value(a: SymbolicAngle, theta0: float, alpha) -> float:
    """Float value of the symbol; must land in [0, pi]."""
    aval = alpha.value if isinstance(alpha, BaseAngle) else float(alpha)
    v = a.sign * theta0 + a.j * math.pi + a.k * aval
    if v < -1e-9 or v > math.pi + 1e-9:
        raise BranchRangeError(f"symbolic state {a} evaluates to {v!r}, outside [0, pi]")
    return min(max(v, 0.0), math.pi)


@dataclass(frozen=True)
class ReachableSet:
    """C(theta0): symbolic states, sorted by angle value.

    theta0_ratio is theta0/pi as an exact Fraction when theta0 was given
    (or snapped) as a rational multiple of pi, else None.
    """

    theta0: float
    theta0_ratio: Fraction | None
    alpha: BaseAngle
    states: tuple[SymbolicAngle, ...]
    truncated: bool

    @cached_property
    def values(self) -> np.ndarray:
        return np.array([symbolic_value(s, self.theta0, self.alpha) for s in self.states])

    @cached_property
    def coincidences(self) -> tuple[tuple[int, int], ...]:
        """Pairs of distinct symbolic states closer than 1e-12 in value.

        Empty for exact rational data (the identity already collapsed
        them); for irrational alpha a nonempty result flags that theta0
        sits on the lattice Z*pi + Z*alpha and the truncated enumeration
        double-counts those angles.
        """
        v = self.values
        return tuple(
            (i, i + 1) for i in range(len(v) - 1) if v[i + 1] - v[i] <= 1e-12
        )

    def __len__(self):
        return len(self.states)

    def index_of(self, state: SymbolicAngle) -> int:
        """Index of the state equal to `state` under the exact identity."""
        key = _state_key(self.theta0_ratio, self.alpha)
        target = key(state)
        for idx, s in enumerate(self.states):
            if key(s) == target:
                return idx
        raise KeyError(f"{state} not in reachable set")

    def contains_value(self, ratio: Fraction) -> bool:
        """Exact membership test for the angle ratio*pi (rational data only)."""
        if self.theta0_ratio is None or not self.alpha.is_rational:
            raise PreconditionError("exact membership needs rational theta0/pi and alpha/pi")
        r = self.alpha.ratio
        for s in self.states:
            if s.sign * self.theta0_ratio + s.j + s.k * r == ratio:
                return True
        return False

    def to_dict(self) -> dict:
        return {
            "theta0": self.theta0,
            "alpha": _alpha_dict(self.alpha),
            "truncated": self.truncated,
            "coincidences": [list(pair) for pair in self.coincidences],
            "states": [
                {"sign": s.sign, "j": s.j, "k": s.k, "value": float(v)}
                for s, v in zip(self.states, self.values)
            ],
        }


def _alpha_dict(alpha: BaseAngle) -> dict:
    if alpha.is_rational:
        return {
            "form": "rational",
            "m": alpha.ratio.numerator,
            "n": alpha.ratio.denominator,
            "value": alpha.value,
        }
    return {"form": "real", "value": alpha.value}


def _state_key(theta0_ratio: Fraction | None, alpha: BaseAngle):
    """Exact identity function for symbolic states (see module docstring)."""
    if alpha.is_rational:
        m, n = alpha.ratio.numerator, alpha.ratio.denominator
        if theta0_ratio is not None:
            r = theta0_ratio
            mn = Fraction(m, n)
            return lambda s: s.sign * r + s.j + s.k * mn
        return lambda s: (s.sign, s.j * n + s.k * m)
    return lambda s: (s.sign, s.j, s.k)


def reachable_angles(theta0, alpha: BaseAngle, max_depth: int | None = None) -> ReachableSet:
    """Breadth-first closure of {theta0} under admissible branches.

    theta0 may be a float (radians) or a Fraction r meaning theta0 = r*pi
    exactly.  For rational alpha the closure terminates with at most
    n = denominator states and max_depth is ignored unless given; for
    irrational alpha the search runs to max_depth (default 12) and the
    result is marked truncated.
    """
    theta0_ratio = None
    if isinstance(theta0, Fraction):
        theta0_ratio = theta0
        theta0 = float(theta0) * math.pi
    theta0 = float(theta0)
    if not 0.0 < theta0 < math.pi:
        raise SingularAngleError(f"theta0 must lie in (0, pi), got {theta0!r}")

    if alpha.is_rational and theta0_ratio is None:
        # Snap onto the critical lattice pi/n * Z when theta0 is on it
        # numerically; identity would otherwise be wrong there.
        n = alpha.ratio.denominator
        x = theta0 * n / math.pi
        if abs(x - round(x)) < _LATTICE_SNAP_TOL * n:
            theta0_ratio = Fraction(int(round(x)), n)

    if max_depth is None and not alpha.is_rational:
        max_depth = DEFAULT_MAX_DEPTH

    key = _state_key(theta0_ratio, alpha)
    start = SymbolicAngle(1, 0, 0)
    seen = {key(start): start}

    if theta0_ratio is not None and alpha.is_rational:
        a_ratio = alpha.ratio

        def admissible(state):
            t = state.sign * theta0_ratio + state.j + state.k * a_ratio
            return _admissible(t, a_ratio, 1)

    else:

        def admissible(state):
            return admissible_branches(symbolic_value(state, theta0, alpha), alpha)

    frontier = [start]
    depth = 0
    while frontier and (max_depth is None or depth < max_depth):
        nxt = []
        for state in frontier:
            for i in admissible(state):
                child = state.apply(i)
                ck = key(child)
                if ck not in seen:
                    seen[ck] = child
                    nxt.append(child)
        frontier = nxt
        depth += 1

    states = sorted(seen.values(), key=lambda s: symbolic_value(s, theta0, alpha))
    return ReachableSet(
        theta0=theta0,
        theta0_ratio=theta0_ratio,
        alpha=alpha,
        states=tuple(states),
        truncated=bool(frontier),
    )


def transition_matrix(rset: ReachableSet, strict: bool = True) -> np.ndarray:
    """Row-stochastic matrix P[r, c] = sum of p_i(theta_r) over branches
    with T_i(theta_r) = theta_c.

    Branches landing on the same state aggregate by summation.  A
    truncated set raises under strict=True; with strict=False, frontier
    rows are left sub-stochastic (mass escaping the enumeration is
    dropped).
    """
    if rset.truncated and strict:
        raise TruncationError(
            "reachable set is truncated; pass strict=False to accept sub-stochastic rows"
        )
    key = _state_key(rset.theta0_ratio, rset.alpha)
    col = {key(s): idx for idx, s in enumerate(rset.states)}
    n = len(rset.states)
    P = np.zeros((n, n))
    for r, (state, theta) in enumerate(zip(rset.states, rset.values)):
        p = branch_probabilities(theta, rset.alpha)
        for i in admissible_branches(theta, rset.alpha):
            c = col.get(key(state.apply(i)))
            if c is None:
                if strict:
                    raise TruncationError(f"image of state {state} under T_{i} not enumerated")
                continue
            P[r, c] += p[i - 1]
    return P


def is_irreducible(P: np.ndarray) -> bool:
    """Strong connectivity of the nonzero-pattern digraph."""
    n_comp, _ = connected_components(csr_matrix(P > 0), directed=True, connection="strong")
    return n_comp == 1


def is_aperiodic(P: np.ndarray) -> bool:
    """Period-1 test for an irreducible chain.

    The period equals the gcd over all edges (u, v) of level(u)+1-level(v),
    with levels from any BFS of the pattern digraph; it is 1 iff the chain
    is aperiodic.
    """
    if not is_irreducible(P):
        raise PreconditionError("aperiodicity is defined here only for irreducible chains")
    n = P.shape[0]
    adj = [np.nonzero(P[r] > 0)[0] for r in range(n)]
    level = np.full(n, -1)
    level[0] = 0
    queue = [0]
    while queue:
        u = queue.pop()
        for v in adj[u]:
            if level[v] < 0:
                level[v] = level[u] + 1
                queue.append(int(v))
    g = 0
    for u in range(n):
        for v in adj[u]:
            g = math.gcd(g, level[u] + 1 - level[v])
    return g == 1


def stationary_distribution(P: np.ndarray) -> np.ndarray:
    """Unique pi with pi P = pi, sum 1, pi > 0 (irreducible chains).

    Solved as the linear system (P^T - I) pi = 0 with the last equation
    replaced by normalization; the residual contract ||pi P - pi||_inf
    <= 1e-12 is enforced.
    """
    n = P.shape[0]
    if n == 1:
        return np.array([1.0])
    if not is_irreducible(P):
        raise PreconditionError("stationary distribution requires an irreducible chain")
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = np.linalg.solve(A, b)
    residual = float(np.abs(pi @ P - pi).max())
    if residual > 1e-12 or pi.min() < -1e-12:
        raise NumericalError("stationary solve failed its contract", residual=residual)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def reaches_interval(theta0: float, alpha) -> tuple[bool, list[int]]:
    """Witness word driving theta0 into (0, alpha).

    Construction: apply T3 as long as the angle exceeds 2*alpha (each such
    step is admissible); if the remainder lands in (alpha, 2*alpha), finish
    with T4 then T3.  Multiples of alpha are excluded: the construction
    would land exactly on a piece boundary.
    """
    a = alpha.value if isinstance(alpha, BaseAngle) else float(alpha)
    if not 0.0 < theta0 < math.pi:
        raise SingularAngleError(f"theta0 must lie in (0, pi), got {theta0!r}")
    ratio = theta0 / a
    if abs(ratio - round(ratio)) < 1e-12:
        raise PreconditionError(f"theta0 = {round(ratio)}*alpha is excluded")

    word: list[int] = []
    theta = theta0
    while theta > 2 * a:
        assert 3 in admissible_branches(theta, a)
        word.append(3)
        theta -= 2 * a
    if theta > a:
        assert 4 in admissible_branches(theta, a)
        theta = -theta + 4 * a
        word.extend([4, 3])
        theta -= 2 * a
    assert 0.0 < theta < a
    return True, word
