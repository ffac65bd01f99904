"""Multiseparable structure matrices.

A structure matrix of this family is determined by an invertible matrix B
(with inverse A), an even rank r, and r univariate nonvanishing factors
phi_1..phi_r.  Its entries are

    J_ij(x) = sum over pairs p of  L_ij^p * phi_{2p-1}(B_{2p-1}.x) * phi_{2p}(B_{2p}.x)

where L_ij^p is the 2x2 minor of A built from columns 2p-1 and 2p of rows
i and j.  The minors are precomputed at build time since structure
evaluation is the hot path of verification sweeps.

Index convention: public operations take and report 1-based indices, the
standard convention in the analytic treatment of these brackets; array
storage is 0-based internally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import BoxDomain
from .errors import (
    FactorVanishesError,
    IndexOutOfRangeError,
    OddRankError,
    OutOfDomainError,
    RankExceedsDimensionError,
    SingularMatrixError,
)
from .factors import CustomFactor, FactorFunction

#: max-norm tolerance on A.B - I after LU inversion.
INVERSION_TOL = 1e-10

#: |phi| threshold for the sampling-based nonvanishing heuristic.
VANISH_TOL = 1e-12


def _frozen_matrix(M, n: int) -> np.ndarray:
    arr = np.array(M, dtype=float)
    if arr.shape != (n, n):
        raise ValueError(f"matrix must have shape ({n}, {n}), got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MultiseparableSpec:
    """Immutable defining data of one structure matrix of the family.

    Instances are produced by :func:`build_spec`; all operations on a spec
    are pure functions, safe for concurrent use.
    """

    n: int
    r: int
    B: np.ndarray
    A: np.ndarray
    factors: tuple[FactorFunction, ...]
    domain: BoxDomain
    lambda_table: np.ndarray = field(repr=False)
    projected_intervals: tuple[tuple[float, float], ...]
    heuristic_nonvanishing: bool = False

    @property
    def num_pairs(self) -> int:
        return self.r // 2

    def require_inside(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.domain.contains(x):
            raise OutOfDomainError(f"point {x.tolist()} is outside the domain box")
        return x


def _lambda_table(A: np.ndarray, r: int) -> np.ndarray:
    """Minor table: table[p, i, j] = a_{i,2p+1} a_{j,2p+2} - a_{i,2p+2} a_{j,2p+1}
    (1-based column pairs (2p-1, 2p)).  Exactly skew in (i, j)."""
    n = A.shape[0]
    table = np.empty((r // 2, n, n))
    for p in range(r // 2):
        c1 = A[:, 2 * p]
        c2 = A[:, 2 * p + 1]
        table[p] = np.outer(c1, c2) - np.outer(c2, c1)
    table.setflags(write=False)
    return table


def _uncovered_witness(lo: float, hi: float, vlo: float, vhi: float) -> float:
    """A point of the open interval (lo, hi) outside the validity (vlo, vhi)."""
    if lo < vlo:
        right = min(hi, vlo)
        return 0.5 * (lo + right) if np.isfinite(lo) else right - 1.0
    right = max(lo, vhi)
    return 0.5 * (right + hi) if np.isfinite(hi) else right + 1.0


def make_spec(
    n: int,
    r: int,
    B,
    factors,
    domain: BoxDomain,
    inverse=None,
) -> MultiseparableSpec:
    """Assemble and certify a spec, optionally with a known exact inverse.

    Catalog builders pass the closed-form inverse when one is available;
    everyone else should call :func:`build_spec`, which computes it.
    """
    n = int(n)
    r = int(r)
    if n < 2:
        raise ValueError("dimension must be at least 2")
    if r % 2 != 0:
        raise OddRankError(f"rank must be even, got {r}")
    if r < 0 or r > n:
        raise RankExceedsDimensionError(f"rank {r} outside 0..{n}")
    B = _frozen_matrix(B, n)
    factors = tuple(factors)
    if len(factors) != r:
        raise ValueError(f"expected {r} factors, got {len(factors)}")
    if domain.dimension != n:
        raise ValueError("domain dimension does not match n")

    if inverse is None:
        try:
            A = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise SingularMatrixError(f"B is singular: {exc}") from exc
    else:
        A = np.array(inverse, dtype=float)
    A = _frozen_matrix(A, n)
    residual = float(np.max(np.abs(A @ B - np.eye(n))))
    if not residual <= INVERSION_TOL:
        raise SingularMatrixError(
            f"max |A.B - I| = {residual:.3e} exceeds {INVERSION_TOL:g}"
        )

    intervals = []
    heuristic = False
    for idx, f in enumerate(factors, start=1):
        lo, hi = domain.projected_interval(B[idx - 1])
        intervals.append((lo, hi))
        if not f.covers(lo, hi):
            witness = _uncovered_witness(lo, hi, *f.validity)
            raise FactorVanishesError(
                idx,
                witness,
                f"factor {idx} ({f.kind}) is not certified on the projected "
                f"interval ({lo!r}, {hi!r}); offending point y = {witness!r}",
            )
        if isinstance(f, CustomFactor):
            witness = f.sample_nonvanishing(lo, hi, tol=VANISH_TOL)
            if witness is not None:
                raise FactorVanishesError(idx, witness)
            heuristic = True

    return MultiseparableSpec(
        n=n,
        r=r,
        B=B,
        A=A,
        factors=factors,
        domain=domain,
        lambda_table=_lambda_table(A, r),
        projected_intervals=tuple(intervals),
        heuristic_nonvanishing=heuristic,
    )


def build_spec(n: int, r: int, B, factors, domain: BoxDomain) -> MultiseparableSpec:
    """Build a spec from (n, r, B, factors, domain), inverting B by LU.

    Raises SingularMatrixError, OddRankError, RankExceedsDimensionError, or
    FactorVanishesError when the defining requirements fail.
    """
    return make_spec(n, r, B, factors, domain, inverse=None)


def lambda_coefficient(spec: MultiseparableSpec, i: int, j: int, k: int, l: int) -> float:
    """Minor a_ik a_jl - a_il a_jk of the inverse matrix (1-based indices)."""
    n = spec.n
    for idx in (i, j, k, l):
        if not 1 <= idx <= n:
            raise IndexOutOfRangeError(f"index {idx} outside 1..{n}")
    A = spec.A
    return float(A[i - 1, k - 1] * A[j - 1, l - 1] - A[i - 1, l - 1] * A[j - 1, k - 1])


def factor_values(spec: MultiseparableSpec, y: np.ndarray) -> np.ndarray:
    """phi_i(y_i) for i = 1..r at linear-chart coordinates y."""
    return np.array([f.value(y[q]) for q, f in enumerate(spec.factors)])


def factor_derivatives(spec: MultiseparableSpec, y: np.ndarray) -> np.ndarray:
    """phi_i'(y_i) for i = 1..r."""
    return np.array([f.derivative(y[q]) for q, f in enumerate(spec.factors)])


def evaluate_structure(spec: MultiseparableSpec, x) -> np.ndarray:
    """The structure matrix J(x); exactly skew-symmetric.

    The strict upper triangle is computed and reflected, so J_ij == -J_ji
    holds bitwise.
    """
    x = spec.require_inside(x)
    if spec.r == 0:
        return np.zeros((spec.n, spec.n))
    y = spec.B @ x
    phi = factor_values(spec, y)
    products = phi[0::2] * phi[1::2]
    M = np.tensordot(products, spec.lambda_table, axes=(0, 0))
    U = np.triu(M, 1)
    return U - U.T


def structure_partials(spec: MultiseparableSpec, x) -> np.ndarray:
    """Analytic partials tensor T[i, j, l] = d J_ij / d x_l (0-based axes).

    Chain rule through the factor arguments y_q = B_q . x:

        d_l J_ij = sum_p L_ij^p (phi'_{2p-1} b_{2p-1,l} phi_{2p}
                                 + phi_{2p-1} phi'_{2p} b_{2p,l})

    The result is skew in (i, j).
    """
    x = spec.require_inside(x)
    n = spec.n
    if spec.r == 0:
        return np.zeros((n, n, n))
    y = spec.B @ x
    phi = factor_values(spec, y)
    dphi = factor_derivatives(spec, y)
    # W[p, l]: derivative of the pair product phi_{2p-1} phi_{2p} along x_l.
    W = (
        (dphi[0::2] * phi[1::2])[:, None] * spec.B[0 : spec.r : 2]
        + (phi[0::2] * dphi[1::2])[:, None] * spec.B[1 : spec.r : 2]
    )
    return np.einsum("pij,pl->ijl", spec.lambda_table, W)
