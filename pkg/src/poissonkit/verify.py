"""Numerical certification of the Poisson axioms.

Checks offered here: the Jacobi identity residual (pointwise and as a
low-discrepancy sweep over all index triples), Casimir kernel membership,
and SVD-based rank.  Structure fields wrap either a multiseparable spec
(analytic partials) or a user-supplied candidate matrix field, which may
well fail the Jacobi identity; a finite-difference partials provider is
available as an independent oracle for cross-checking the analytic path.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .domain import BoxDomain
from .errors import IndexOutOfRangeError, OutOfDomainError
from .structure import MultiseparableSpec, evaluate_structure, structure_partials

#: default relative singular-value threshold for numerical rank.
RANK_REL_TOL = 1e-9

#: central-difference step scale for the finite-difference partials oracle.
FD_STEP_SCALE = 1e-5


@dataclass(frozen=True)
class StructureField:
    """Evaluatable matrix field x -> J(x) with a partials provider.

    ``partials(x)`` returns the tensor T with T[i, j, l] = d J_ij / d x_l
    (0-based storage axes).
    """

    n: int
    domain: BoxDomain
    evaluate: Callable[[np.ndarray], np.ndarray]
    partials: Callable[[np.ndarray], np.ndarray]
    spec: MultiseparableSpec | None = None

    def require_inside(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.domain.contains(x):
            raise OutOfDomainError(f"point {x.tolist()} is outside the field domain")
        return x


def fd_partials(
    evaluate: Callable[[np.ndarray], np.ndarray], step_scale: float = FD_STEP_SCALE
) -> Callable[[np.ndarray], np.ndarray]:
    """Central finite-difference partials of a matrix field.

    Uses h = step_scale * (1 + |x_l|) per coordinate; the evaluator must
    tolerate points within h of the nominal argument.
    """

    def partials(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = x.shape[0]
        J0 = np.asarray(evaluate(x))
        T = np.empty(J0.shape + (n,))
        for l in range(n):
            h = step_scale * (1.0 + abs(float(x[l])))
            xp = x.copy()
            xm = x.copy()
            xp[l] += h
            xm[l] -= h
            T[:, :, l] = (np.asarray(evaluate(xp)) - np.asarray(evaluate(xm))) / (2.0 * h)
        return T

    return partials


def structure_field(spec: MultiseparableSpec) -> StructureField:
    """Field view of a spec with analytic partials."""
    return StructureField(
        n=spec.n,
        domain=spec.domain,
        evaluate=lambda x: evaluate_structure(spec, x),
        partials=lambda x: structure_partials(spec, x),
        spec=spec,
    )


def fd_structure_field(spec: MultiseparableSpec) -> StructureField:
    """Field view of a spec with finite-difference partials (oracle path).

    The evaluator used inside the differences skips the domain membership
    check so stencil points may poke slightly past the box faces; factor
    validity intervals still apply.
    """

    def unchecked(x: np.ndarray) -> np.ndarray:
        if spec.r == 0:
            return np.zeros((spec.n, spec.n))
        y = spec.B @ np.asarray(x, dtype=float)
        phi = np.array([f.value(y[q]) for q, f in enumerate(spec.factors)])
        M = np.tensordot(phi[0::2] * phi[1::2], spec.lambda_table, axes=(0, 0))
        U = np.triu(M, 1)
        return U - U.T

    return StructureField(
        n=spec.n,
        domain=spec.domain,
        evaluate=lambda x: evaluate_structure(spec, x),
        partials=fd_partials(unchecked),
        spec=spec,
    )


def generic_field(
    n: int,
    evaluate: Callable[[np.ndarray], np.ndarray],
    domain: BoxDomain,
    partials: Callable[[np.ndarray], np.ndarray] | None = None,
) -> StructureField:
    """Wrap a user-supplied candidate matrix field.

    Without an analytic partials callable, central finite differences are
    used.  The candidate need not satisfy the Jacobi identity; that is what
    the sweep is for.
    """
    if partials is None:
        partials = fd_partials(evaluate)
    return StructureField(n=n, domain=domain, evaluate=evaluate, partials=partials)


@dataclass(frozen=True)
class JacobiReport:
    """Result of a Jacobi-identity sweep."""

    dimension: int
    num_points: int
    num_triples: int
    tolerance: float
    max_abs_residual: float
    max_normalized_residual: float
    argmax_triple: tuple[int, int, int] | None
    argmax_point: tuple[float, ...] | None
    passed: bool

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "num_points": self.num_points,
            "num_triples": self.num_triples,
            "tolerance": self.tolerance,
            "max_abs_residual": self.max_abs_residual,
            "max_normalized_residual": self.max_normalized_residual,
            "argmax_triple": list(self.argmax_triple) if self.argmax_triple else None,
            "argmax_point": list(self.argmax_point) if self.argmax_point else None,
            "passed": self.passed,
        }


def jacobi_residual(field: StructureField, x, i: int, j: int, k: int) -> float:
    """Left-hand side of the Jacobi identity for the triple (i, j, k), 1-based:

        sum_l ( J_il d_l J_jk + J_jl d_l J_ki + J_kl d_l J_ij )

    Zero (up to round-off) for a genuine structure matrix.
    """
    n = field.n
    for idx in (i, j, k):
        if not 1 <= idx <= n:
            raise IndexOutOfRangeError(f"index {idx} outside 1..{n}")
    x = field.require_inside(x)
    J = np.asarray(field.evaluate(x))
    T = np.asarray(field.partials(x))
    a, b, c = i - 1, j - 1, k - 1
    return float(J[a] @ T[b, c] + J[b] @ T[c, a] + J[c] @ T[a, b])


def _residual_tensor(J: np.ndarray, T: np.ndarray) -> np.ndarray:
    R = np.einsum("il,jkl->ijk", J, T)
    return R + R.transpose(1, 2, 0) + R.transpose(2, 0, 1)


def _point_extremes(field: StructureField, x: np.ndarray, triples: np.ndarray):
    J = np.asarray(field.evaluate(x))
    T = np.asarray(field.partials(x))
    if triples.shape[0] == 0:
        return 0.0, 0.0, None
    res = _residual_tensor(J, T)[triples[:, 0], triples[:, 1], triples[:, 2]]
    idx = int(np.argmax(np.abs(res)))
    worst = float(abs(res[idx]))
    scale = 1.0 + float(np.max(np.abs(J))) * float(np.max(np.abs(T)))
    return worst, worst / scale, tuple(int(t) + 1 for t in triples[idx])


def jacobi_sweep(
    field: StructureField,
    num_points: int,
    seed: int = 0,
    tolerance: float = 1e-7,
    sample_box: BoxDomain | None = None,
    max_workers: int | None = None,
) -> JacobiReport:
    """Evaluate the Jacobi residual over all C(n, 3) triples at quasi-random
    points and report the worst case.

    Deterministic for a fixed seed.  Unbounded domains need a bounded
    sample box, either on the domain itself or via ``sample_box``.
    Points are processed independently and reduced by max, so the sweep
    parallelizes over ``max_workers`` threads without changing the result.
    """
    if num_points < 1:
        raise ValueError("num_points must be >= 1")
    box = sample_box if sample_box is not None else field.domain
    points = box.halton_points(num_points, seed)
    triples = np.array(
        list(itertools.combinations(range(field.n), 3)), dtype=int
    ).reshape(-1, 3)

    def worker(x):
        return _point_extremes(field, x, triples)

    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(worker, points))
    else:
        results = [worker(x) for x in points]

    max_abs = 0.0
    max_norm = 0.0
    argmax_triple = None
    argmax_point = None
    for x, (worst, worst_norm, triple) in zip(points, results):
        max_norm = max(max_norm, worst_norm)
        if triple is not None and (argmax_triple is None or worst > max_abs):
            argmax_triple = triple
            argmax_point = tuple(float(v) for v in x)
        max_abs = max(max_abs, worst)

    return JacobiReport(
        dimension=field.n,
        num_points=num_points,
        num_triples=int(triples.shape[0]),
        tolerance=float(tolerance),
        max_abs_residual=max_abs,
        max_normalized_residual=max_norm,
        argmax_triple=argmax_triple,
        argmax_point=argmax_point,
        passed=bool(max_abs <= tolerance),
    )


def kernel_check(spec: MultiseparableSpec, x) -> float:
    """Worst kernel violation max_p || J(x) . grad C_p ||_inf over the
    linear Casimirs C_p (rows r+1..n of B).  Zero for r = n."""
    J = evaluate_structure(spec, x)
    rows = spec.B[spec.r :]
    if rows.shape[0] == 0:
        return 0.0
    return float(np.max(np.abs(J @ rows.T)))


def rank_at(field: StructureField, x, rel_tolerance: float = RANK_REL_TOL) -> int:
    """Numerical rank of J(x): singular values above rel_tolerance * sigma_max."""
    x = field.require_inside(x)
    J = np.asarray(field.evaluate(x))
    s = np.linalg.svd(J, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tolerance * s[0]))
