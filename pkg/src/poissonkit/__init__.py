"""poissonkit: a family of skew-symmetric solutions of the Jacobi equations
built from an invertible matrix and univariate nonvanishing factors, with
numerical verification of the defining axioms, complete linear Casimir
sets, an explicit global reduction to canonical coordinates, and
structure-aware integrators."""

from .catalog import (
    CatalogEntry,
    catalog_entry,
    constant_symplectic,
    counterexample_field,
    kermack_mckendrick,
    toda,
)
from .darboux import (
    CanonicalReport,
    DarbouxChart,
    canonical_matrix,
    casimirs,
    certify_canonical,
    darboux_chart,
    default_anchors,
    inverse_linear_chart,
    inverse_quadrature_chart,
    linear_chart,
    linear_chart_pushforward,
    pushforward,
    quadrature_chart,
)
from .domain import BoxDomain
from .dynamics import (
    HamiltonianField,
    TrajectoryRecord,
    bracket,
    coordinate_hamiltonian,
    integrate_canonical,
    integrate_direct,
    linear_hamiltonian,
    quadratic_hamiltonian,
    trajectory_to_csv,
    vector_field,
)
from .errors import (
    CertificationFailureError,
    ConfigError,
    ConfigParseError,
    ConfigValidationError,
    EmptyDomainSampleError,
    FactorVanishesError,
    IndexOutOfRangeError,
    InvalidSizeError,
    MaxNewtonIterationsError,
    NoConvergenceError,
    OddRankError,
    OutOfDomainError,
    OutOfRangeError,
    OutOfValidityError,
    ParameterMismatchError,
    PoissonKitError,
    QuadratureFailureError,
    RankExceedsDimensionError,
    SingularMatrixError,
)
from .factors import (
    Affine,
    Constant,
    CustomFactor,
    Exponential,
    FactorFunction,
    Linear,
    Power,
)
from .structure import (
    MultiseparableSpec,
    build_spec,
    evaluate_structure,
    lambda_coefficient,
    structure_partials,
)
from .verify import (
    JacobiReport,
    StructureField,
    fd_structure_field,
    generic_field,
    jacobi_residual,
    jacobi_sweep,
    kernel_check,
    rank_at,
    structure_field,
)

__version__ = "0.1.0"

__all__ = [
    "Affine",
    "BoxDomain",
    "CanonicalReport",
    "CatalogEntry",
    "CertificationFailureError",
    "ConfigError",
    "ConfigParseError",
    "ConfigValidationError",
    "Constant",
    "CustomFactor",
    "DarbouxChart",
    "EmptyDomainSampleError",
    "Exponential",
    "FactorFunction",
    "FactorVanishesError",
    "HamiltonianField",
    "IndexOutOfRangeError",
    "InvalidSizeError",
    "JacobiReport",
    "Linear",
    "MaxNewtonIterationsError",
    "MultiseparableSpec",
    "NoConvergenceError",
    "OddRankError",
    "OutOfDomainError",
    "OutOfRangeError",
    "OutOfValidityError",
    "ParameterMismatchError",
    "PoissonKitError",
    "Power",
    "QuadratureFailureError",
    "RankExceedsDimensionError",
    "SingularMatrixError",
    "StructureField",
    "TrajectoryRecord",
    "bracket",
    "build_spec",
    "canonical_matrix",
    "casimirs",
    "catalog_entry",
    "certify_canonical",
    "constant_symplectic",
    "coordinate_hamiltonian",
    "counterexample_field",
    "darboux_chart",
    "default_anchors",
    "evaluate_structure",
    "fd_structure_field",
    "generic_field",
    "integrate_canonical",
    "integrate_direct",
    "inverse_linear_chart",
    "inverse_quadrature_chart",
    "jacobi_residual",
    "jacobi_sweep",
    "kernel_check",
    "kermack_mckendrick",
    "lambda_coefficient",
    "linear_chart",
    "linear_chart_pushforward",
    "linear_hamiltonian",
    "pushforward",
    "quadratic_hamiltonian",
    "quadrature_chart",
    "rank_at",
    "structure_field",
    "structure_partials",
    "toda",
    "trajectory_to_csv",
    "vector_field",
]
