"""The random reflection law: four branch maps and their piecewise probabilities.

A particle hitting a wall with triangular micro-roughness of base angle
``alpha < pi/6`` leaves at a random angle.  With the incoming angle
``theta`` measured in ``[0, pi]``, the outgoing angle is one of

    T1(theta) = theta + 2*alpha
    T2(theta) = -theta + 2*pi - 4*alpha
    T3(theta) = theta - 2*alpha
    T4(theta) = -theta + 4*alpha

chosen with probabilities ``p1..p4(theta)`` given by piecewise formulas in
the auxiliary function ``u_alpha(theta) = (1 + tan(alpha)/tan(theta)) / 2``.
The pieces are delimited by the breakpoints

    0 < alpha < 2*alpha < 3*alpha < pi-3*alpha < pi-2*alpha < pi-alpha < pi

and every piece is half-open on the right (left-closed), so the law is
total on ``[0, pi]``.

Conventions used throughout the package: angles are plain floats in
radians, branch ids are the integers 1..4, probability vectors are numpy
arrays of shape (4,).  The base angle is the one structured type, since
the rational/irrational dichotomy of ``alpha/pi`` drives everything
downstream and must be represented exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import NumericalError, BranchRangeError, SingularAngleError

__all__ = [
    "BaseAngle",
    "BRANCH_SIGNS",
    "u",
    "apply_branch",
    "branch_probabilities",
    "probability_table",
    "admissible_branches",
    "breakpoints",
    "sample_step",
]

# Derivative of each branch map: +1 for the translations T1, T3 and
# -1 for the reflections T2, T4.
BRANCH_SIGNS = {1: 1, 2: -1, 3: 1, 4: -1}

# Probabilities are clamped to 0 when within this distance below 0 and the
# vector is renormalized when the sum drifts; drift beyond _NORM_TOL means
# the tables were evaluated outside their contract.
_CLAMP_TOL = 1e-12
_NORM_TOL = 1e-9


@dataclass(frozen=True)
class BaseAngle:
    """Base angle of the wall microstructure, constrained to (0, pi/6).

    ``ratio`` is alpha/pi as an exact Fraction when alpha is a rational
    multiple of pi, else None.  All symbolic machinery keys off ``ratio``;
    floating-point code uses ``value``.
    """

    value: float
    ratio: Fraction | None = field(default=None)

    def __post_init__(self):
        if not 0.0 < self.value < math.pi / 6:
            raise ValueError(
                f"base angle must lie in (0, pi/6), got {self.value!r}"
            )
        if self.ratio is not None and not 0 < self.ratio < Fraction(1, 6):
            raise ValueError(
                f"rational base angle must satisfy 0 < m/n < 1/6, got {self.ratio}"
            )

    @classmethod
    def rational(cls, m: int, n: int) -> "BaseAngle":
        """alpha = m*pi/n, stored exactly (Fraction reduces gcd)."""
        r = Fraction(m, n)
        return cls(value=float(r) * math.pi, ratio=r)

    @classmethod
    def real(cls, value: float) -> "BaseAngle":
        """alpha given in radians, treated as irrational mod pi."""
        return cls(value=float(value), ratio=None)

    @property
    def is_rational(self) -> bool:
        return self.ratio is not None

    def __repr__(self):
        if self.ratio is not None:
            return f"BaseAngle({self.ratio.numerator}*pi/{self.ratio.denominator})"
        return f"BaseAngle({self.value!r})"


def _aval(alpha) -> float:
    """Accept a BaseAngle or raw radians."""
    return alpha.value if isinstance(alpha, BaseAngle) else float(alpha)


def u(alpha, theta: float) -> float:
    """The auxiliary probability weight u_alpha(theta).

    Evaluated as (1 + tan(alpha) * cos(theta)/sin(theta)) / 2 so that
    theta = pi/2 is regular (the literal tan(theta) in the denominator
    blows up there, but the ratio form gives exactly 1/2).

    The formula is also used with negated argument, u_alpha(-theta) =
    1 - u_alpha(theta); any theta with sin(theta) != 0 is accepted.
    """
    a = _aval(alpha)
    s = math.sin(theta)
    if s == 0.0:
        raise SingularAngleError(f"u is singular at theta={theta!r}")
    return 0.5 * (1.0 + math.tan(a) * math.cos(theta) / s)


def breakpoints(alpha) -> tuple[float, ...]:
    """The six interior piece boundaries of the probability tables."""
    a = _aval(alpha)
    return (a, 2 * a, 3 * a, math.pi - 3 * a, math.pi - 2 * a, math.pi - a)


def apply_branch(i: int, theta: float, alpha) -> float:
    """Apply branch map T_i.  No reduction mod pi.

    A result outside [0, pi] signals that an inadmissible branch was
    applied; values within 1e-12 of an endpoint (pure rounding) are
    snapped onto it.
    """
    a = _aval(alpha)
    if i == 1:
        out = theta + 2 * a
    elif i == 2:
        out = -theta + 2 * math.pi - 4 * a
    elif i == 3:
        out = theta - 2 * a
    elif i == 4:
        out = -theta + 4 * a
    else:
        raise ValueError(f"branch id must be 1..4, got {i!r}")
    if out < 0.0 or out > math.pi:
        if out > -1e-12 and out < math.pi + 1e-12:
            return min(max(out, 0.0), math.pi)
        raise BranchRangeError(
            f"T_{i}({theta!r}) = {out!r} leaves [0, pi]; branch not admissible here"
        )
    return out


def _pieces(theta: float, a: float) -> tuple[float, float, float, float]:
    """Raw table values (p1, p2, p3, p4), pure floats, no policing.

    This is the hot path for samplers; branch_probabilities wraps it with
    the clamping/renormalization contract.
    """
    pi_ = math.pi
    if theta < a:
        return 1.0, 0.0, 0.0, 0.0
    if theta >= pi_ - a:
        return 0.0, 0.0, 1.0, 0.0
    cot = math.cos(theta) / math.sin(theta)
    uap = 0.5 * (1.0 + math.tan(a) * cot)
    uam = 1.0 - uap
    if theta < 2 * a:
        return uap, 0.0, 0.0, uam
    if theta < 3 * a:
        u2m = math.cos(2 * a) * (1.0 - math.tan(2 * a) * cot)
        return uap, 0.0, u2m, uam - u2m
    if theta < pi_ - 3 * a:
        return uap, 0.0, uam, 0.0
    if theta < pi_ - 2 * a:
        u2p = math.cos(2 * a) * (1.0 + math.tan(2 * a) * cot)
        return u2p, uap - u2p, uam, 0.0
    return 0.0, uap, uam, 0.0


def branch_probabilities(theta: float, alpha) -> np.ndarray:
    """The probability vector (p1, p2, p3, p4) at theta in [0, pi].

    Piece boundaries follow the half-open (left-closed) convention of the
    case tables; the vector is total on [0, pi] because the pieces that
    touch 0 and pi are constants.
    """
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta!r}")
    return _finalize(np.array(_pieces(theta, _aval(alpha))))


def probability_table(thetas, alpha) -> np.ndarray:
    """Vectorized branch probabilities: rows of shape (len(thetas), 4).

    Same tables as branch_probabilities; exists so the transfer-operator
    code can evaluate thousands of quadrature nodes in one shot.  Angles
    exactly at 0 or pi are legal (the end pieces are constants).
    """
    th = np.atleast_1d(np.asarray(thetas, dtype=float))
    if th.size and (th.min() < 0.0 or th.max() > math.pi):
        raise ValueError("angles must lie in [0, pi]")
    a = _aval(alpha)
    pi_ = math.pi
    c2 = 2.0 * math.cos(2 * a)
    ta, t2a = math.tan(a), math.tan(2 * a)

    with np.errstate(divide="ignore", invalid="ignore"):
        cot = np.cos(th) / np.sin(th)
    uap = 0.5 * (1.0 + ta * cot)   # u_a(theta)
    uam = 0.5 * (1.0 - ta * cot)   # u_a(-theta)
    u2p = c2 * 0.5 * (1.0 + t2a * cot)
    u2m = c2 * 0.5 * (1.0 - t2a * cot)

    p = np.zeros((th.size, 4))
    m = th < a
    p[m, 0] = 1.0
    m = (th >= a) & (th < pi_ - 3 * a)
    p[m, 0] = uap[m]
    m = (th >= pi_ - 3 * a) & (th < pi_ - 2 * a)
    p[m, 0] = u2p[m]
    p[m, 1] = uap[m] - u2p[m]
    m = (th >= pi_ - 2 * a) & (th < pi_ - a)
    p[m, 1] = uap[m]
    m = (th >= 2 * a) & (th < 3 * a)
    p[m, 2] = u2m[m]
    m = (th >= 3 * a) & (th < pi_ - a)
    p[m, 2] = uam[m]
    m = th >= pi_ - a
    p[m, 2] = 1.0
    m = (th >= a) & (th < 2 * a)
    p[m, 3] = uam[m]
    m = (th >= 2 * a) & (th < 3 * a)
    p[m, 3] = uam[m] - u2m[m]

    return _finalize(p)


def _finalize(p: np.ndarray) -> np.ndarray:
    """Clamp rounding negatives, renormalize, police the contract."""
    neg = p.min()
    if neg < -_CLAMP_TOL:
        raise NumericalError("branch probability below -1e-12", residual=float(neg))
    np.clip(p, 0.0, None, out=p)
    s = p.sum(axis=-1, keepdims=True)
    err = np.abs(s - 1.0).max()
    if err > _NORM_TOL:
        raise NumericalError("branch probabilities fail to sum to 1", residual=float(err))
    if err > _CLAMP_TOL:
        p = p / s
    return p


def _admissible(theta, alpha, pi_value):
    """Strict-positivity intervals of the four probabilities.

    Works over any ordered field containing theta, alpha and pi_value, so
    the symbolic machinery can call it with exact Fractions (theta/pi,
    alpha/pi, 1).  The intervals are equivalent to ``p_i(theta) > 0``:
    p1 and p3 are positive up to where their pieces vanish (u_a(-(pi-2a))
    = 0 kills p1 at pi-2a, mirrored for p3), and the two-collision
    branches p2, p4 are positive strictly inside (pi-3a, pi-a) and
    (a, 3a) because they vanish at those piece seams.
    """
    out = set()
    if 0 <= theta < pi_value - 2 * alpha:
        out.add(1)
    if pi_value - 3 * alpha < theta < pi_value - alpha:
        out.add(2)
    if 2 * alpha < theta <= pi_value:
        out.add(3)
    if alpha < theta < 3 * alpha:
        out.add(4)
    return out


def admissible_branches(theta: float, alpha) -> set[int]:
    """{i : p_i(theta) > 0}, decided exactly from the positivity intervals."""
    return _admissible(theta, _aval(alpha), math.pi)


def _branch_cell(p: np.ndarray, x: float):
    """Locate x in the cumulative-probability partition J_1..J_4.

    J_k = [sum_{i<k} p_i, sum_{i<=k} p_i), half-open, so a boundary x
    belongs to the cell on its right.  Returns (branch id, left edge,
    width).  If rounding pushes the cumulative total below x, the last
    positive cell is returned.
    """
    acc = 0.0
    last = None
    for i in range(4):
        w = p[i]
        if w <= 0.0:
            continue
        if x < acc + w:
            return i + 1, acc, w
        acc += w
        last = (i + 1, acc - w, w)
    return last


def sample_step(theta: float, alpha, rng) -> tuple[int, float]:
    """One step of the random map: draw a branch, apply it.

    Inverse-CDF sampling on the cumulative sums, i.e. the same partition
    J_k that drives the deterministic skew-product representation.
    Consumes exactly one uniform from ``rng`` per call, so two processes
    driven by equal seeds see identical branch words.
    """
    if theta <= 0.0 or theta >= math.pi:
        raise SingularAngleError(f"cannot sample at theta={theta!r}")
    p = _pieces(theta, _aval(alpha))
    i, _, _ = _branch_cell(p, rng.random())
    return i, apply_branch(i, theta, alpha)
