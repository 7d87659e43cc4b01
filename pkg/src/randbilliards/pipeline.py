"""Random billiard between two parallel walls (the infinite pipeline).

Geometry convention (the theory fixes only the reflection law, so the
strip is pinned down here once): walls y = 0 (bottom, wall 0) and y = 1
(top, wall 1), no same-wall returns.  A particle leaving a wall with the
randomized angle theta' always crosses to the opposite wall, so the
flight length is 1/sin(theta') and the horizontal advance is
+cot(theta') leaving the bottom and -cot(theta') leaving the top (the
angle is measured from the wall with the mirror orientation).

The angle sequence is the same Markov process as on the circular table;
runs driven by equal seeds realize bitwise-identical branch words and
angle sequences on both tables.

Tangent dynamics: one step contributes the matrix
(-1) * [[1, -t], [0, 1]] with t = branch_sign * l / sin(theta_new).
Scalars factor out of the product, so n steps give exactly

    parity * [[1, -offdiag], [0, 1]],  parity = (-1)^n,
    offdiag = sum of the signed terms t_k,

which is what PipelineJacobian stores.  |offdiag| <= n * L / sin(theta_min)
with L the largest flight and theta_min the closest reachable approach to
{0, pi}; the Lyapunov exponent of any direction therefore vanishes at rate
O(log n / n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InadmissibleBranchError, PreconditionError
from .feres import BRANCH_SIGNS, BaseAngle, admissible_branches, apply_branch, sample_step

__all__ = [
    "BOTTOM",
    "TOP",
    "PipelineState",
    "PipelineJacobian",
    "PipelineRun",
    "pipeline_step",
    "pipeline_jacobian_step",
    "pipeline_simulate",
    "accumulate_jacobian",
    "pipeline_lyapunov",
    "lyapunov_from_run",
    "pipeline_csv",
]

BOTTOM, TOP = 0, 1


@dataclass(frozen=True)
class PipelineState:
    """Signed position s along the current wall, wall index, exit angle."""

    s: float
    wall: int
    theta: float

    def __post_init__(self):
        if self.wall not in (BOTTOM, TOP):
            raise ValueError(f"wall must be {BOTTOM} (bottom) or {TOP} (top)")
        if not 0.0 < self.theta < math.pi:
            raise ValueError(f"theta must lie in (0, pi), got {self.theta!r}")


@dataclass(frozen=True)
class PipelineJacobian:
    """Accumulated tangent data: true matrix = parity * [[1, -offdiag], [0, 1]]."""

    offdiag: float = 0.0
    parity: int = 1
    n: int = 0

    def __post_init__(self):
        if self.parity != (1 if self.n % 2 == 0 else -1):
            raise ValueError("parity must equal (-1)^n")
        if not math.isfinite(self.offdiag):
            raise ValueError("off-diagonal must be finite")


@dataclass(frozen=True)
class PipelineRun:
    """Recorded pipeline orbit; arrays s/wall/theta have length n+1."""

    alpha: BaseAngle
    seed: int | None
    s: np.ndarray
    wall: np.ndarray
    theta: np.ndarray
    flights: np.ndarray
    branches: np.ndarray

    @property
    def n(self) -> int:
        return len(self.branches)


def pipeline_step(st: PipelineState, i: int, alpha) -> tuple[PipelineState, float]:
    """One wall-to-wall flight with the branch forced to i."""
    if i not in admissible_branches(st.theta, alpha):
        raise InadmissibleBranchError(f"branch {i} has zero probability at theta={st.theta!r}")
    theta = apply_branch(i, st.theta, alpha)
    sin_t = math.sin(theta)
    flight = 1.0 / sin_t
    advance = math.cos(theta) / sin_t
    if st.wall == TOP:
        advance = -advance
    return PipelineState(st.s + advance, 1 - st.wall, theta), flight


def pipeline_jacobian_step(
    J: PipelineJacobian, theta_new: float, flight: float, branch_sign: int
) -> PipelineJacobian:
    """Fold one signed term branch_sign * flight / sin(theta_new)."""
    if branch_sign not in (1, -1):
        raise ValueError(f"branch sign must be +-1, got {branch_sign!r}")
    term = branch_sign * flight / math.sin(theta_new)
    return PipelineJacobian(offdiag=J.offdiag + term, parity=-J.parity, n=J.n + 1)


def pipeline_simulate(start: PipelineState, n: int, alpha, seed) -> PipelineRun:
    """n random flights from `start`; bitwise reproducible from the seed."""
    if n < 0:
        raise ValueError("step count must be >= 0")
    rng = np.random.default_rng(seed)
    s = np.empty(n + 1)
    wall = np.empty(n + 1, dtype=np.int8)
    th = np.empty(n + 1)
    flights = np.empty(n)
    word = np.empty(n, dtype=np.int8)
    s[0], wall[0], th[0] = start.s, start.wall, start.theta
    cur = start
    for k in range(n):
        i, _ = sample_step(cur.theta, alpha, rng)
        cur, flight = pipeline_step(cur, i, alpha)
        word[k] = i
        flights[k] = flight
        s[k + 1], wall[k + 1], th[k + 1] = cur.s, cur.wall, cur.theta
    alpha_obj = alpha if isinstance(alpha, BaseAngle) else BaseAngle.real(float(alpha))
    return PipelineRun(
        alpha=alpha_obj,
        seed=seed if isinstance(seed, int) else None,
        s=s,
        wall=wall,
        theta=th,
        flights=flights,
        branches=word,
    )


def accumulate_jacobian(run: PipelineRun) -> PipelineJacobian:
    J = PipelineJacobian()
    for k in range(run.n):
        J = pipeline_jacobian_step(
            J, float(run.theta[k + 1]), float(run.flights[k]), BRANCH_SIGNS[int(run.branches[k])]
        )
    return J


def lyapunov_from_run(run: PipelineRun, v) -> float:
    """(1/n) log || J v || for the run's accumulated tangent matrix."""
    v = np.asarray(v, dtype=float)
    if v.shape != (2,) or not v.any():
        raise PreconditionError("direction must be a nonzero 2-vector")
    if run.n < 1:
        raise PreconditionError("need at least one step")
    J = accumulate_jacobian(run)
    image = math.hypot(v[0] - J.offdiag * v[1], v[1])
    return math.log(image) / run.n


def pipeline_lyapunov(
    start: PipelineState, alpha, n: int, seed, v, strict: bool = True
) -> float:
    """Lyapunov estimate along a fresh random run.

    The zero-exponent statement is proved for rational alpha/pi only, so
    strict mode refuses irrational base angles rather than overclaim;
    pass strict=False to experiment outside the proven regime.
    """
    alpha_obj = alpha if isinstance(alpha, BaseAngle) else BaseAngle.real(float(alpha))
    if strict and not alpha_obj.is_rational:
        raise PreconditionError(
            "zero-exponent statement covers rational alpha only; use strict=False to override"
        )
    run = pipeline_simulate(start, n, alpha_obj, seed)
    return lyapunov_from_run(run, v)


def pipeline_csv(run: PipelineRun) -> str:
    """CSV dump, header step,s,wall,theta,flight_length.

    Walls are 0 (bottom) / 1 (top); the start row has no flight, written
    as an empty field.
    """
    lines = ["step,s,wall,theta,flight_length"]
    for k in range(len(run.s)):
        fl = f"{run.flights[k - 1]:.17g}" if k > 0 else ""
        lines.append(f"{k},{run.s[k]:.17g},{run.wall[k]},{run.theta[k]:.17g},{fl}")
    return "\n".join(lines) + "\n"
