"""Exception types shared across the package."""


class PermlcError(Exception):
    """Base class for all package errors."""


class NotHermitianError(PermlcError, ValueError):
    """Input matrix is not square, not finite, or not Hermitian."""


class SpectrumOutOfRange(PermlcError, ValueError):
    """A matrix spectrum falls outside the admissible interval.

    Attributes:
        eigenvalue: the offending eigenvalue.
        interval: the admissible ``(low, high)`` interval.
    """

    def __init__(self, eigenvalue, interval):
        self.eigenvalue = float(eigenvalue)
        self.interval = (float(interval[0]), float(interval[1]))
        super().__init__(
            f"eigenvalue {self.eigenvalue!r} outside admissible interval "
            f"[{self.interval[0]}, {self.interval[1]}]"
        )


class EigenConvergenceError(PermlcError, RuntimeError):
    """Jacobi iteration failed to reduce the off-diagonal mass."""

    def __init__(self, n, residual, sweeps):
        self.n = n
        self.residual = residual
        self.sweeps = sweeps
        super().__init__(
            f"Jacobi eigensolver did not converge on {n}x{n} matrix after "
            f"{sweeps} sweeps (off-diagonal residual {residual:.3e})"
        )


class DimensionTooLarge(PermlcError, ValueError):
    def __init__(self, n, limit, what="operation"):
        self.n = n
        self.limit = limit
        super().__init__(f"{what} supports n <= {limit}, got n = {n}")


class DimensionMismatch(PermlcError, ValueError):
    pass


class ChainDiverged(PermlcError, RuntimeError):
    """A Markov chain coordinate escaped the divergence guard."""


class NonFiniteWeight(PermlcError, RuntimeError):
    pass


class InsufficientSamples(PermlcError, ValueError):
    pass
