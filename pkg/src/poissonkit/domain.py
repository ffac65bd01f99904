"""Axis-aligned box domains and deterministic low-discrepancy sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .errors import EmptyDomainSampleError

#: Absolute inset from box faces used when drawing sweep points, so samples
#: stay strictly inside the open box.
FACE_INSET = 1e-9


def _as_bounds(v, n: int | None = None) -> np.ndarray:
    arr = np.asarray(v, dtype=float).reshape(-1)
    if n is not None and arr.shape != (n,):
        raise ValueError(f"bounds must have shape ({n},), got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BoxDomain:
    """Open axis-aligned box, possibly unbounded.

    All structural guarantees (nonvanishing factors, constant rank, the
    canonical chart) are certified on this region.  ``sample_lower`` and
    ``sample_upper``, when given, delimit a bounded sub-box used by sweeps
    over domains that are themselves unbounded.
    """

    lower: np.ndarray
    upper: np.ndarray
    sample_lower: np.ndarray | None = None
    sample_upper: np.ndarray | None = None

    def __post_init__(self):
        lower = _as_bounds(self.lower)
        upper = _as_bounds(self.upper, lower.shape[0])
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if not np.all(lower < upper):
            raise ValueError("box requires lower < upper componentwise")
        if (self.sample_lower is None) != (self.sample_upper is None):
            raise ValueError("sample box needs both lower and upper bounds")
        if self.sample_lower is not None:
            slo = _as_bounds(self.sample_lower, lower.shape[0])
            shi = _as_bounds(self.sample_upper, lower.shape[0])
            object.__setattr__(self, "sample_lower", slo)
            object.__setattr__(self, "sample_upper", shi)
            if not (np.all(np.isfinite(slo)) and np.all(np.isfinite(shi))):
                raise ValueError("sample box must be bounded")
            if not np.all(slo < shi):
                raise ValueError("sample box requires lower < upper componentwise")
            if not (np.all(slo >= lower) & np.all(shi <= upper)):
                raise ValueError("sample box must lie inside the domain box")

    @classmethod
    def unbounded(cls, n: int, sample_lower=None, sample_upper=None) -> "BoxDomain":
        return cls(np.full(n, -np.inf), np.full(n, np.inf), sample_lower, sample_upper)

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    @property
    def is_bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper)))

    def contains(self, x) -> bool:
        """Strict interior membership (the box is open)."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            return False
        return bool(np.all(x > self.lower) and np.all(x < self.upper))

    def sampling_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Bounded bounds for sweeps: the box itself, or the sample sub-box.

        Raises EmptyDomainSampleError when the box is unbounded and no
        sample sub-box was provided.
        """
        if self.is_bounded:
            return self.lower, self.upper
        if self.sample_lower is not None:
            return self.sample_lower, self.sample_upper
        raise EmptyDomainSampleError(
            "unbounded domain: provide a bounded sample box for sweeps"
        )

    def halton_points(self, num: int, seed: int) -> np.ndarray:
        """``num`` scrambled-Halton points strictly inside the sampling box.

        Deterministic for a fixed seed; points are inset from the faces so
        open-interval guarantees apply.
        """
        if num < 1:
            raise ValueError("num must be >= 1")
        lo, hi = self.sampling_bounds()
        width = hi - lo
        inset = np.minimum(FACE_INSET, 0.25 * width)
        engine = qmc.Halton(d=self.dimension, scramble=True, seed=seed)
        u = engine.random(num)
        return (lo + inset) + u * (width - 2.0 * inset)

    def projected_interval(self, row) -> tuple[float, float]:
        """Open interval {row . x : x in box} by interval arithmetic."""
        row = np.asarray(row, dtype=float).reshape(-1)
        if row.shape != (self.dimension,):
            raise ValueError("row length must match the box dimension")
        lo = 0.0
        hi = 0.0
        for b, a, c in zip(row, self.lower, self.upper):
            if b == 0.0:
                continue
            p, q = b * a, b * c
            lo += min(p, q)
            hi += max(p, q)
        return float(lo), float(hi)
