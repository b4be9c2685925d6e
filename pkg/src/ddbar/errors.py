"""Exception types raised across the package."""


class DdbarError(Exception):
    """Base class for every error raised by ddbar."""


class JacobiViolation(DdbarError):
    """d o d does not vanish on degree-one covectors."""


class NonIntegrable(DdbarError):
    """d of a (1,0)-covector has a (0,2)-component."""


class NotAlmostComplex(DdbarError):
    """J^2 != -Id, or the coframe does not span a complex structure."""


class DegreeOverflow(DdbarError):
    """Result degree exceeds the top degree."""


class DegreeMismatch(DdbarError):
    """Input form has the wrong bidegree for the operation."""


class ZeroH(DdbarError):
    """The twisting parameter h must be nonzero."""


class NoCanonicalMap(DdbarError):
    """No canonical map between the requested cohomology flavors."""


class HypothesisFailed(DdbarError):
    """The model does not satisfy the lemma the construction relies on."""


class LemmaRequired(HypothesisFailed):
    """The ddbar-lemma (or its h-twisted variant) is required and fails."""


class InconsistentSystem(DdbarError):
    """A linear system expected to be solvable has no solution."""


class NotPositive(DdbarError):
    """Form fails the required positivity test."""


class NotReal(DdbarError):
    """Form is not equal to its conjugate."""


class NoConvergence(DdbarError):
    """Iteration budget exhausted."""


class NoTrivializer(DdbarError):
    """Missing, non-closed or degenerate (n,0)-form."""


class NotInSubspace(DdbarError):
    """Tangent class lies outside the co-polarised subspace."""


class MCObstructed(DdbarError):
    """Invariant Maurer-Cartan equation has no solution at the requested order."""


class SchemaError(DdbarError):
    """JSON document does not match the presentation schema."""

    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class DimensionOdd(SchemaError):
    """Real dimension must be even."""


class RaggedConstants(SchemaError):
    """Structure constants are not antisymmetric in the lower indices."""
