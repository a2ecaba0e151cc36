"""Exception types shared across the package."""


class HierwalkError(Exception):
    """Base class for all package-specific errors."""


class IsolatedVertex(HierwalkError):
    def __init__(self, vertex: int):
        self.vertex = vertex
        super().__init__(f"vertex {vertex} has degree 0; no walk step is defined there")


class NotIrreducible(HierwalkError):
    """The chain's support decomposes into more than one closed class."""


class NoPositiveFixedVector(HierwalkError):
    """The stationary solver produced a vector with a non-positive component."""


class DimensionMismatch(HierwalkError):
    """Operands declare incompatible dimensions."""


class NotReversible(HierwalkError):
    """Symmetrization failed: the pair (P, pi) does not satisfy detailed balance."""


class NotHermitian(HierwalkError):
    """Matrix is not Hermitian within the admitted tolerance."""


class ConvergenceFailure(HierwalkError):
    """The backend eigensolver did not converge."""


class MissingTransition(HierwalkError):
    """A graph in the model carries no transition matrix."""


class NegativeTime(HierwalkError):
    """Semigroup times must be nonnegative."""


class NonpositiveDiagonal(HierwalkError):
    """A diagonal factor that must be strictly positive is not."""


class NegativeLocalEigenvalue(HierwalkError):
    """Local Hamiltonian eigenvalues must be nonnegative before assembly."""


class InvalidProbabilityVector(HierwalkError):
    """Probability weights must lie strictly inside (0, 1) and sum to 1."""


class NegativeWeight(HierwalkError):
    """A weight under a square root fell below the negative tolerance."""


class InvalidP(HierwalkError):
    """Mixture weight must lie in [0, 1]."""


class ConstantOverlapViolated(HierwalkError):
    """Overlaps with the global state vary across tuples beyond tolerance."""


class ExponentOverflow(HierwalkError):
    """Matrix entries are too large for the series exponential."""


class ShapeMismatch(HierwalkError):
    """Arrays being compared have different shapes."""


class DimensionCapExceeded(HierwalkError):
    """Dense materialization was requested above the configured dimension cap."""
