"""Random billiard on the unit circular table.

Phase space is (s, theta): s the boundary position in [0, 2*pi) and theta
the exit angle against the tangent.  A deterministic bounce advances s by
the arc 2*theta and keeps theta; the random billiard first randomizes the
angle through the reflection law and then flies:

    (s, theta)  ->  (s + 2*T_i(theta) mod 2*pi, T_i(theta)).

The chord from position s to s + 2*theta' passes at distance |cos(theta')|
from the center, which is what makes random caustics visible: the whole
orbit stays outside the concentric circle of radius min |cos(theta')|.

Tangent dynamics along a realized branch word are upper triangular,

    D = [[1, A_n], [0, B_n]],  B_n in {-1, +1},  A_n an even integer,

and are accumulated here exactly (integers, no floats), which makes the
zero-Lyapunov statements sharply testable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import InadmissibleBranchError, PreconditionError
from .feres import BRANCH_SIGNS, BaseAngle, admissible_branches, apply_branch, sample_step
from .reachable import ReachableSet

__all__ = [
    "PhasePoint",
    "Trajectory",
    "CausticEstimate",
    "JacobianAccumulator",
    "circle_step",
    "simulate",
    "prescribed_orbit",
    "dense_orbit_discrepancy",
    "caustic",
    "chord_distance_check",
    "ring_coverage",
    "jacobian_step",
    "accumulate_jacobian",
    "lyapunov_estimate",
    "trajectory_csv",
    "trajectory_svg",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhasePoint:
    """Boundary position s (reduced mod 2*pi) and exit angle theta."""

    s: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "s", self.s % _TWO_PI)
        if not 0.0 < self.theta < math.pi:
            raise ValueError(f"theta must lie in (0, pi), got {self.theta!r}")


@dataclass(frozen=True)
class Trajectory:
    """A realized orbit: arrays s, theta of length n+1, branch word of length n.

    branches[k] is the branch applied to move from point k to point k+1.
    """

    alpha: BaseAngle
    seed: int | None
    s: np.ndarray
    theta: np.ndarray
    branches: np.ndarray

    def __post_init__(self):
        if len(self.s) != len(self.theta) or len(self.branches) != len(self.s) - 1:
            raise ValueError("inconsistent trajectory array lengths")

    @property
    def n(self) -> int:
        return len(self.branches)

    def point(self, k: int) -> PhasePoint:
        return PhasePoint(float(self.s[k]), float(self.theta[k]))


@dataclass(frozen=True)
class CausticEstimate:
    radius: float
    degenerate: bool
    attaining_angle: float | None = None


@dataclass(frozen=True)
class JacobianAccumulator:
    """Exact accumulated tangent map [[1, a], [0, b]] after n steps."""

    a: int = 0
    b: int = 1
    n: int = 0

    def __post_init__(self):
        if self.b not in (1, -1):
            raise ValueError(f"b must be +-1, got {self.b!r}")
        if self.a % 2 or abs(self.a) > 2 * self.n:
            raise ValueError(f"off-diagonal {self.a} violates the 2n bound at n={self.n}")


def circle_step(p: PhasePoint, i: int, alpha) -> PhasePoint:
    """One random-billiard bounce with the branch forced to i."""
    if i not in admissible_branches(p.theta, alpha):
        raise InadmissibleBranchError(f"branch {i} has zero probability at theta={p.theta!r}")
    theta = apply_branch(i, p.theta, alpha)
    return PhasePoint(p.s + 2.0 * theta, theta)


def simulate(start: PhasePoint, n: int, alpha, seed) -> Trajectory:
    """n random bounces from `start`; bitwise reproducible from the seed.

    One uniform draw per step, so the realized branch word coincides with
    any other consumer of sample_step running on an equal generator.
    """
    if n < 0:
        raise ValueError("step count must be >= 0")
    rng = np.random.default_rng(seed)
    s = np.empty(n + 1)
    th = np.empty(n + 1)
    word = np.empty(n, dtype=np.int8)
    s[0], th[0] = start.s, start.theta
    cur_s, cur_th = start.s, start.theta
    for k in range(n):
        i, cur_th = sample_step(cur_th, alpha, rng)
        cur_s = (cur_s + 2.0 * cur_th) % _TWO_PI
        word[k] = i
        s[k + 1] = cur_s
        th[k + 1] = cur_th
    return Trajectory(alpha=_as_base(alpha), seed=_seed_int(seed), s=s, theta=th, branches=word)


def prescribed_orbit(start: PhasePoint, word: Sequence[int], alpha) -> Trajectory:
    """Deterministic orbit under a given branch word.

    The word must be admissible from start.theta; the first offending
    index is reported otherwise.
    """
    s = np.empty(len(word) + 1)
    th = np.empty(len(word) + 1)
    s[0], th[0] = start.s, start.theta
    cur = start
    for k, i in enumerate(word):
        try:
            cur = circle_step(cur, int(i), alpha)
        except InadmissibleBranchError as e:
            raise InadmissibleBranchError(f"word position {k}: {e}") from None
        s[k + 1], th[k + 1] = cur.s, cur.theta
    return Trajectory(
        alpha=_as_base(alpha),
        seed=None,
        s=s,
        theta=th,
        branches=np.asarray(list(word), dtype=np.int8),
    )


def _as_base(alpha) -> BaseAngle:
    return alpha if isinstance(alpha, BaseAngle) else BaseAngle.real(float(alpha))


def _seed_int(seed) -> int | None:
    return seed if isinstance(seed, int) else None


def dense_orbit_discrepancy(traj: Trajectory, bins: int) -> float:
    """Normalized sup deviation of the s-histogram from uniform.

    max over equal-width bins of |empirical fraction - 1/bins| * bins;
    0 for perfect equidistribution, bins-1 for a point mass.
    """
    n = len(traj.s)
    if n < bins:
        raise PreconditionError(f"need at least {bins} points, got {n}")
    counts, _ = np.histogram(traj.s, bins=bins, range=(0.0, _TWO_PI))
    return float(np.abs(counts * bins / n - 1.0).max())


def caustic(traj_or_set: Union[Trajectory, ReachableSet]) -> CausticEstimate:
    """Caustic radius: min over realized/enumerated angles of |cos theta'|.

    Degenerate when the radius vanishes (pi/2 visited); for exact rational
    reachable sets the pi/2 membership test is symbolic, so degeneracy is
    decided without floating-point luck.
    """
    from fractions import Fraction

    if isinstance(traj_or_set, ReachableSet):
        angles = traj_or_set.values
        exact_right_angle = (
            traj_or_set.theta0_ratio is not None
            and traj_or_set.alpha.is_rational
            and traj_or_set.contains_value(Fraction(1, 2))
        )
    else:
        angles = traj_or_set.theta
        exact_right_angle = False
    if len(angles) == 0:
        raise PreconditionError("empty input has no caustic")
    dist = np.abs(np.cos(angles))
    idx = int(np.argmin(dist))
    radius = float(dist[idx])
    degenerate = exact_right_angle or radius <= 1e-12
    return CausticEstimate(
        radius=0.0 if degenerate and radius <= 1e-12 else radius,
        degenerate=degenerate,
        attaining_angle=float(angles[idx]),
    )


def chord_distance_check(traj: Trajectory) -> float:
    """Max |chord-to-center distance - |cos theta'|| over all chords.

    The chord leaving point k lands at point k+1 with exit angle
    theta[k+1]; its supporting line should pass at exactly |cos theta[k+1]|
    from the origin.  Contract: <= 1e-9.
    """
    if traj.n < 1:
        raise PreconditionError("need at least one chord")
    x0, y0 = np.cos(traj.s[:-1]), np.sin(traj.s[:-1])
    x1, y1 = np.cos(traj.s[1:]), np.sin(traj.s[1:])
    cross = np.abs(x0 * y1 - x1 * y0)
    length = np.hypot(x1 - x0, y1 - y0)
    dist = cross / length
    return float(np.abs(dist - np.abs(np.cos(traj.theta[1:]))).max())


def ring_coverage(
    traj: Trajectory,
    caustic_est: CausticEstimate,
    radial_cells: int,
    angular_cells: int,
) -> float:
    """Fraction of annulus cells (caustic radius .. 1) touched by chords.

    Conservative rasterization: each chord is sampled densely enough that
    consecutive samples fall closer than half the smallest cell dimension,
    so a cell crossed by a chord over more than a corner graze is marked.
    """
    if traj.n < 1:
        return 0.0
    r = caustic_est.radius
    radial_width = (1.0 - r) / radial_cells
    inner_arc = max(r, 1e-3) * _TWO_PI / angular_cells
    step = 0.5 * min(radial_width, inner_arc)
    nt = max(2, int(math.ceil(2.0 / step)) + 1)
    t = np.linspace(0.0, 1.0, nt)

    covered = np.zeros(radial_cells * angular_cells, dtype=bool)
    x_all, y_all = np.cos(traj.s), np.sin(traj.s)
    chunk = max(1, int(2e6 // nt))
    for lo in range(0, traj.n, chunk):
        hi = min(lo + chunk, traj.n)
        x = x_all[lo:hi, None] * (1 - t) + x_all[lo + 1 : hi + 1, None] * t
        y = y_all[lo:hi, None] * (1 - t) + y_all[lo + 1 : hi + 1, None] * t
        rho = np.hypot(x, y)
        phi = np.arctan2(y, x) % _TWO_PI
        ri = np.clip(((rho - r) / radial_width).astype(int), 0, radial_cells - 1)
        ai = np.clip((phi / _TWO_PI * angular_cells).astype(int), 0, angular_cells - 1)
        covered[(ri * angular_cells + ai).ravel()] = True
    return float(covered.sum() / covered.size)


def jacobian_step(acc: JacobianAccumulator, i: int) -> JacobianAccumulator:
    """Compose one branch's tangent map [[1, 2t], [0, t]] onto the left.

    t is the branch derivative (+1 for T1, T3; -1 for T2, T4); the product
    stays upper triangular with integer entries.
    """
    t = BRANCH_SIGNS[i]
    return JacobianAccumulator(a=acc.a + 2 * t * acc.b, b=t * acc.b, n=acc.n + 1)


def accumulate_jacobian(word) -> JacobianAccumulator:
    acc = JacobianAccumulator()
    for i in word:
        acc = jacobian_step(acc, int(i))
    return acc


def lyapunov_estimate(traj: Trajectory, v) -> float:
    """(1/n) log ||D v|| along the trajectory's branch word."""
    v = np.asarray(v, dtype=float)
    if v.shape != (2,) or not v.any():
        raise PreconditionError("direction must be a nonzero 2-vector")
    if traj.n < 1:
        raise PreconditionError("need at least one step")
    acc = accumulate_jacobian(traj.branches)
    image = math.hypot(v[0] + acc.a * v[1], acc.b * v[1])
    return math.log(image) / acc.n


def trajectory_csv(traj: Trajectory) -> str:
    """CSV dump, header step,s,theta,branch; branch 0 marks the start row."""
    lines = ["step,s,theta,branch"]
    branches = np.concatenate([[0], traj.branches])
    for k in range(len(traj.s)):
        lines.append(f"{k},{traj.s[k]:.17g},{traj.theta[k]:.17g},{branches[k]}")
    return "\n".join(lines) + "\n"


def trajectory_svg(
    traj: Trajectory,
    caustic_est: CausticEstimate | None = None,
    max_chords: int = 2000,
) -> str:
    """Static picture: unit circle, chord segments, caustic circle."""
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="-1.05 -1.05 2.1 2.1" '
        'width="600" height="600">',
        '<circle cx="0" cy="0" r="1" fill="none" stroke="black" stroke-width="0.004"/>',
    ]
    m = min(traj.n + 1, max_chords + 1)
    pts = " ".join(
        f"{math.cos(s):.5f},{-math.sin(s):.5f}" for s in traj.s[:m]
    )
    parts.append(
        f'<polyline points="{pts}" fill="none" stroke="steelblue" stroke-width="0.002"/>'
    )
    if caustic_est is not None and not caustic_est.degenerate:
        parts.append(
            f'<circle cx="0" cy="0" r="{caustic_est.radius:.6f}" fill="none" '
            'stroke="crimson" stroke-width="0.004" stroke-dasharray="0.02,0.02"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
