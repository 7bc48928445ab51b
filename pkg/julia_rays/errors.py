"""Exception hierarchy shared by the services, the CLI and the HTTP app.

Input problems derive from ValueError, computational limits from
RuntimeError, so callers can split on
``except ValueError`` / ``except RuntimeError``.
"""


class JuliaRaysError(Exception):
    """Base class for every error raised by julia_rays."""


# ── Input errors ────────────────────────────────────────────────────────


class InvalidInputError(JuliaRaysError, ValueError):
    """Malformed text, out-of-range parameters or a violated precondition."""


class ConventionUndefinedError(InvalidInputError):
    """The alpha/beta naming is only defined for c off the real ray [1/4, inf)."""


class NotARayPairError(JuliaRaysError, ValueError):
    """Two rays whose landing estimates do not coincide."""


# ── Computational limits ────────────────────────────────────────────────


class PrecisionUnreachableError(JuliaRaysError, RuntimeError):
    """The continued fraction is not known deep enough for the request."""


class InsufficientPrecisionError(JuliaRaysError, RuntimeError):
    """An irrational angle truncation is too coarse for the trace depth."""


class BranchAmbiguityError(JuliaRaysError, RuntimeError):
    """A pullback could not choose a square-root branch reliably."""

    def __init__(self, message: str, angle=None):
        super().__init__(message)
        self.angle = angle


class ConjugacyResidualError(JuliaRaysError, RuntimeError):
    """A traced sample violates |f(x(g,t)) - x(2g,2t)| <= tol."""


class InconclusiveGeometryError(JuliaRaysError, RuntimeError):
    """Point location is too close to the separating curve to be trusted."""


class ConsistencyFailureError(JuliaRaysError, RuntimeError):
    """Exact angle calculus and traced geometry disagree."""


# ── Signals ─────────────────────────────────────────────────────────────


class RootIsCriticalError(JuliaRaysError):
    """A wake of angle exactly 1/2: its root is the critical point 0."""
