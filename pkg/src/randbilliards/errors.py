"""Exception hierarchy shared by all randbilliards modules.

Every error raised by the library derives from :class:`RandBilliardsError`,
so callers (and the CLI) can catch one type and still distinguish the
semantic failure modes below.
"""

from __future__ import annotations


class RandBilliardsError(Exception):
    """Base class for all library errors."""


class SingularAngleError(RandBilliardsError, ValueError):
    """Angle theta in {0, pi}; the reflection law is singular there."""


class BranchRangeError(RandBilliardsError, ValueError):
    """A branch map produced a value outside [0, pi].

    Signals that an inadmissible branch was applied, or that a symbolic
    state fails its range invariant.
    """


class InadmissibleBranchError(RandBilliardsError, ValueError):
    """A branch with zero probability was requested at this angle."""


class TruncationError(RandBilliardsError, RuntimeError):
    """Operation needs a complete reachable set but got a truncated one."""


class PreconditionError(RandBilliardsError, ValueError):
    """A documented mathematical precondition was not met."""


class NumericalError(RandBilliardsError, RuntimeError):
    """A numerical routine failed to meet its accuracy contract.

    Carries the achieved residual so tests and the CLI can report it.
    """

    def __init__(self, message: str, residual: float | None = None):
        if residual is not None:
            message = f"{message} (residual={residual:.3e})"
        super().__init__(message)
        self.residual = residual


class GridMismatchError(RandBilliardsError, ValueError):
    """Two discretized densities live on incompatible grids."""


class ConfigError(RandBilliardsError, ValueError):
    """Invalid experiment configuration (CLI flags or config file)."""
