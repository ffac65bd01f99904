"""Exception types shared across the library."""

from __future__ import annotations

import numpy as np


class PoissonKitError(Exception):
    """Base class for all library errors."""


class SingularMatrixError(PoissonKitError):
    """Coefficient matrix is not invertible within tolerance."""


class OddRankError(PoissonKitError):
    """Requested rank is not an even integer."""


class RankExceedsDimensionError(PoissonKitError):
    """Requested rank is negative or larger than the dimension."""


class FactorVanishesError(PoissonKitError):
    """A factor function vanishes (or is undefined) on its projected interval.

    Carries the 1-based factor index and a witness point of the projected
    interval where the nonvanishing requirement fails.
    """

    def __init__(self, index: int, witness: float, message: str | None = None):
        self.index = int(index)
        self.witness = float(witness)
        super().__init__(
            message
            or f"factor {self.index} vanishes near y = {self.witness!r}"
        )


class OutOfDomainError(PoissonKitError):
    """Evaluation point lies outside the certified domain."""


class IndexOutOfRangeError(PoissonKitError, IndexError):
    """A 1-based index argument is outside 1..n."""


class OutOfValidityError(PoissonKitError):
    """Argument lies outside a factor function's validity interval."""


class QuadratureFailureError(PoissonKitError):
    """Adaptive quadrature could not reach the requested tolerance."""


class OutOfRangeError(PoissonKitError):
    """Inversion target lies outside the antiderivative's range."""


class NoConvergenceError(PoissonKitError):
    """Iterative solve failed to converge."""


class MaxNewtonIterationsError(NoConvergenceError):
    """Implicit step left unresolved after the iteration cap."""


class EmptyDomainSampleError(PoissonKitError):
    """Sweep requested on an unbounded domain without a bounded sample box."""


class CertificationFailureError(PoissonKitError):
    """Canonical-form certification failed.

    Carries the worst sample point, the offending matrix entry (1-based),
    and the observed deviation.
    """

    def __init__(self, point: np.ndarray, entry: tuple[int, int], deviation: float,
                 message: str | None = None):
        self.point = np.asarray(point, dtype=float)
        self.entry = (int(entry[0]), int(entry[1]))
        self.deviation = float(deviation)
        super().__init__(
            message
            or f"certification failed at entry {self.entry}: deviation "
            f"{self.deviation:.3e} at x = {self.point.tolist()}"
        )


class ParameterMismatchError(PoissonKitError):
    """Catalog builder parameters violate a required relation."""


class InvalidSizeError(PoissonKitError):
    """Catalog builder size parameter out of range (lattice N or block count)."""


class ConfigError(PoissonKitError):
    """Base class for configuration problems (CLI exit code 2)."""


class ConfigParseError(ConfigError):
    """Configuration text is not valid JSON."""


class ConfigValidationError(ConfigError):
    """Configuration parsed but violates the schema or dimensions."""
