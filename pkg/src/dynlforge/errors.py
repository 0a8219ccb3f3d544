"""Exception hierarchy shared by every module.

The CLI maps these onto process exit codes, so keep the hierarchy flat and
the class names stable.
"""


class DynlError(Exception):
    """Base class for all package errors."""


class ParseError(DynlError):
    """Malformed setup document."""


class StructureError(DynlError):
    """Structure constants violate an algebraic axiom.

    ``residual`` names the failing check (e.g. ``"antisymmetry"``).
    """

    def __init__(self, residual, value=None, tol=None, detail=""):
        self.residual = residual
        self.value = value
        self.tol = tol
        msg = f"{residual} violated"
        if value is not None:
            msg += f": residual {value:.3e}"
            if tol is not None:
                msg += f" > tol {tol:.3e}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class AxiomError(StructureError):
    """The induced double fails Jacobi or pairing invariance."""


class NotBidynamical(StructureError):
    """Bidynamical flag requested but the cobracket or trivector disagree."""


class SplitError(DynlError):
    """A lagrangian splitting is not isotropic, not complementary, or not closed."""


class SolveError(DynlError):
    """A linear solve could not be carried out."""


class OutsideAnalyticDomain(SolveError):
    """Condition estimate exceeded the threshold that delimits U."""

    def __init__(self, cond, cond_max):
        self.cond = cond
        self.cond_max = cond_max
        super().__init__(f"condition estimate {cond:.3e} exceeds {cond_max:.1e}")


class MembershipError(DynlError):
    """An element fails the vertex-algebra membership constraint."""


class UnknownName(DynlError):
    """Unknown catalog or series name."""
