"""Exception hierarchy shared by the kernels, the engine and the CLI."""

from __future__ import annotations


class QSchurError(Exception):
    """Base class for every error raised by this package."""


class ContractError(QSchurError, ValueError):
    """An operation was called outside its precondition."""


class DimensionError(ContractError):
    """Matrix shapes disagree with the vertex dimensions of the quiver."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class IterationLimitError(QSchurError, RuntimeError):
    """A shifted QR/QZ iteration did not converge.

    ``state`` holds whatever partially reduced data the kernel had at the
    point it gave up, for diagnostics.
    """

    def __init__(self, message, state=None, context=None):
        self.state = state
        self.context = context
        super().__init__(message)


class UnsupportedCycleError(QSchurError):
    """A rectangular cycle whose edges do not all point the same way.

    Such cycles contain singular-pencil (Kronecker) structure; reducing them
    needs a staircase algorithm this package does not provide.
    """
