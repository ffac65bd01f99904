"""Univariate factor functions.

Each factor is a scalar function phi(y) that is C1 and nonvanishing on an
open validity interval.  Besides evaluation and differentiation, factors
support the two operations the canonical-coordinate construction needs:
the anchored antiderivative of the reciprocal,

    F(y) = integral from anchor to y of dt / phi(t),

and its inverse.  Because phi keeps a fixed sign on the validity interval,
F is strictly monotone there and the inverse is well defined.

Built-in kinds (constant, linear, affine, exponential, power) implement
both operations in closed form; :class:`CustomFactor` falls back to
adaptive quadrature and safeguarded Newton iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from scipy.integrate import quad

from .errors import (
    NoConvergenceError,
    OutOfRangeError,
    OutOfValidityError,
    QuadratureFailureError,
)

INF = math.inf

#: |F(y) - z| target for numeric inversion of the anchored antiderivative.
INVERSION_TOL = 1e-12

#: Absolute tolerance requested from adaptive quadrature for custom factors.
QUADRATURE_TOL = 1e-12


def _interval_str(lo: float, hi: float) -> str:
    return f"({lo!r}, {hi!r})"


@dataclass(frozen=True)
class FactorFunction:
    """Base class; concrete kinds override the scalar operations.

    ``validity`` is an open interval (lo, hi), possibly unbounded, on which
    the factor is C1 and nonvanishing.
    """

    validity: tuple[float, float] = field(default=(-INF, INF), kw_only=True)

    def __post_init__(self):
        lo, hi = self.validity
        if not lo < hi:
            raise ValueError(f"validity interval {_interval_str(lo, hi)} is empty")

    # -- interval helpers -------------------------------------------------

    def covers(self, lo: float, hi: float) -> bool:
        """True if the open interval (lo, hi) is contained in the validity interval."""
        vlo, vhi = self.validity
        return vlo <= lo and hi <= vhi

    def _check(self, y: float) -> float:
        y = float(y)
        lo, hi = self.validity
        if not (lo < y < hi):
            raise OutOfValidityError(
                f"{self.kind} factor: y = {y!r} outside validity {_interval_str(lo, hi)}"
            )
        return y

    # -- descriptor -------------------------------------------------------

    @property
    def kind(self) -> str:
        raise NotImplementedError

    def params(self) -> dict[str, float]:
        """Scalar parameters, for serialization."""
        raise NotImplementedError

    # -- the four capabilities ---------------------------------------------

    def value(self, y: float) -> float:
        """phi(y)."""
        raise NotImplementedError

    def derivative(self, y: float) -> float:
        """phi'(y)."""
        raise NotImplementedError

    def reciprocal_antiderivative(self, y: float, anchor: float) -> float:
        """F(y) = integral from anchor to y of dt / phi(t).

        Both y and anchor must lie in the validity interval.
        """
        raise NotImplementedError

    def invert_antiderivative(self, z: float, anchor: float) -> float:
        """The unique y in the validity interval with F(y) = z.

        Raises OutOfRangeError when z is outside the range of F.
        """
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(FactorFunction):
    """phi(y) = c with c != 0."""

    c: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if self.c == 0.0:
            raise ValueError("Constant factor requires c != 0")

    @property
    def kind(self) -> str:
        return "constant"

    def params(self) -> dict[str, float]:
        return {"c": self.c}

    def value(self, y: float) -> float:
        self._check(y)
        return self.c

    def derivative(self, y: float) -> float:
        self._check(y)
        return 0.0

    def reciprocal_antiderivative(self, y: float, anchor: float) -> float:
        y = self._check(y)
        anchor = self._check(anchor)
        return (y - anchor) / self.c

    def invert_antiderivative(self, z: float, anchor: float) -> float:
        anchor = self._check(anchor)
        y = anchor + self.c * float(z)
        lo, hi = self.validity
        if not (lo < y < hi):
            raise OutOfRangeError(f"z = {z!r} maps outside validity interval")
        return y


@dataclass(frozen=True)
class Linear(FactorFunction):
    """phi(y) = slope * y on an interval excluding 0 (default (0, inf))."""

    slope: float = 1.0
    validity: tuple[float, float] = field(default=(0.0, INF), kw_only=True)

    def __post_init__(self):
        super().__post_init__()
        if self.slope == 0.0:
            raise ValueError("Linear factor requires slope != 0")
        lo, hi = self.validity
        if lo < 0.0 < hi:
            raise ValueError("Linear factor validity interval must exclude 0")

    @property
    def kind(self) -> str:
        return "linear"

    def params(self) -> dict[str, float]:
        return {"slope": self.slope}

    def value(self, y: float) -> float:
        return self.slope * self._check(y)

    def derivative(self, y: float) -> float:
        self._check(y)
        return self.slope

    def reciprocal_antiderivative(self, y: float, anchor: float) -> float:
        y = self._check(y)
        anchor = self._check(anchor)
        # y and anchor share a sign, so the quotient is positive.
        return math.log(y / anchor) / self.slope

    def invert_antiderivative(self, z: float, anchor: float) -> float:
        anchor = self._check(anchor)
        return anchor * math.exp(self.slope * float(z))


@dataclass(frozen=True)
class Affine(FactorFunction):
    """phi(y) = slope * y + intercept, away from the root -intercept/slope.

    The default validity interval is the branch where phi > 0.
    """

    slope: float = 1.0
    intercept: float = 0.0
    validity: tuple[float, float] = field(default=(math.nan, math.nan), kw_only=True)

    def __post_init__(self):
        if self.slope == 0.0:
            raise ValueError("Affine factor requires slope != 0 (use Constant)")
        root = -self.intercept / self.slope
        lo, hi = self.validity
        if math.isnan(lo) or math.isnan(hi):
            chosen = (root, INF) if self.slope > 0 else (-INF, root)
            object.__setattr__(self, "validity", chosen)
            lo, hi = chosen
        super().__post_init__()
        if lo < root < hi:
            raise ValueError(
                f"Affine factor validity interval must exclude the root {root!r}"
            )

    @property
    def kind(self) -> str:
        return "affine"

    def params(self) -> dict[str, float]:
        return {"slope": self.slope, "intercept": self.intercept}

    def value(self, y: float) -> float:
        return self.slope * self._check(y) + self.intercept

    def derivative(self, y: float) -> float:
        self._check(y)
        return self.slope

    def reciprocal_antiderivative(self, y: float, anchor: float) -> float:
        y = self._check(y)
        anchor = self._check(anchor)
        u = self.slope * y + self.intercept
        u0 = self.slope * anchor + self.intercept
        return math.log(u / u0) / self.slope

    def invert_antiderivative(self, z: float, anchor: float) -> float:
        anchor = self._check(anchor)
        u0 = self.slope * anchor + self.intercept
        return (u0 * math.exp(self.slope * float(z)) - self.intercept) / self.slope


@dataclass(frozen=True)
class Exponential(FactorFunction):
    """phi(y) = amplitude * exp(rate * y), nonvanishing everywhere."""

    amplitude: float = 1.0
    rate: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if self.amplitude == 0.0:
            raise ValueError("Exponential factor requires amplitude != 0")

    @property
    def kind(self) -> str:
        return "exponential"

    def params(self) -> dict[str, float]:
        return {"amplitude": self.amplitude, "rate": self.rate}

    def value(self, y: float) -> float:
        return self.amplitude * math.exp(self.rate * self._check(y))

    def derivative(self, y: float) -> float:
        return self.rate * self.value(y)

    def reciprocal_antiderivative(self, y: float, anchor: float) -> float:
        y = self._check(y)
        anchor = self._check(anchor)
        if self.rate == 0.0:
            return (y - anchor) / self.amplitude
        return (math.exp(-self.rate * anchor) - math.exp(-self.rate * y)) / (
            self.amplitude * self.rate
        )

    def invert_antiderivative(self, z: float, anchor: float) -> float:
        anchor = self._check(anchor)
        z = float(z)
        if self.rate == 0.0:
            return anchor + self.amplitude * z
        t = math.exp(-self.rate * anchor) - self.amplitude * self.rate * z
        if t <= 0.0:
            raise OutOfRangeError(f"z = {z!r} outside the antiderivative range")
        return -math.log(t) / self.rate


@dataclass(frozen=True)
class Power(FactorFunction):
    """phi(y) = coefficient * y**exponent on y > 0."""

    coefficient: float = 1.0
    exponent: float = 1.0
    validity: tuple[float, float] = field(default=(0.0, INF), kw_only=True)

    def __post_init__(self):
        super().__post_init__()
        if self.coefficient == 0.0:
            raise ValueError("Power factor requires coefficient != 0")
        lo, hi = self.validity
        if lo < 0.0:
            raise ValueError("Power factor validity interval must lie in y > 0")

    @property
    def kind(self) -> str:
        return "power"

    def params(self) -> dict[str, float]:
        return {"coefficient": self.coefficient, "exponent": self.exponent}

    def value(self, y: float) -> float:
        return self.coefficient * self._check(y) ** self.exponent

    def derivative(self, y: float) -> float:
        y = self._check(y)
        return self.coefficient * self.exponent * y ** (self.exponent - 1.0)

    def reciprocal_antiderivative(self, y: float, anchor: float) -> float:
        y = self._check(y)
        anchor = self._check(anchor)
        p = self.exponent
        if p == 1.0:
            return math.log(y / anchor) / self.coefficient
        q = 1.0 - p
        return (y**q - anchor**q) / (self.coefficient * q)

    def invert_antiderivative(self, z: float, anchor: float) -> float:
        anchor = self._check(anchor)
        z = float(z)
        p = self.exponent
        if p == 1.0:
            return anchor * math.exp(self.coefficient * z)
        q = 1.0 - p
        t = anchor**q + self.coefficient * q * z
        if t <= 0.0:
            raise OutOfRangeError(f"z = {z!r} outside the antiderivative range")
        y = t ** (1.0 / q)
        lo, hi = self.validity
        if not (lo < y < hi):
            raise OutOfRangeError(f"z = {z!r} maps outside validity interval")
        return y


@dataclass(frozen=True)
class CustomFactor(FactorFunction):
    """User-supplied factor: value and derivative callables are required.

    When no reciprocal-antiderivative callable is given, F(y) is computed by
    adaptive quadrature to QUADRATURE_TOL and inverted by safeguarded Newton
    iteration with a bisection fallback.  Nonvanishing on a projected
    interval can only be checked heuristically by sampling; structure specs
    built from custom factors carry a warning flag for that reason.
    """

    value_fn: Callable[[float], float] | None = None
    derivative_fn: Callable[[float], float] | None = None
    antiderivative_fn: Callable[[float], float] | None = None

    def __post_init__(self):
        super().__post_init__()
        if self.value_fn is None or self.derivative_fn is None:
            raise ValueError("CustomFactor requires value_fn and derivative_fn")

    @property
    def kind(self) -> str:
        return "custom"

    def params(self) -> dict[str, float]:
        return {}

    def value(self, y: float) -> float:
        return float(self.value_fn(self._check(y)))

    def derivative(self, y: float) -> float:
        return float(self.derivative_fn(self._check(y)))

    def reciprocal_antiderivative(self, y: float, anchor: float) -> float:
        y = self._check(y)
        anchor = self._check(anchor)
        if self.antiderivative_fn is not None:
            return float(self.antiderivative_fn(y)) - float(self.antiderivative_fn(anchor))
        if y == anchor:
            return 0.0
        result, est_err = quad(
            lambda t: 1.0 / self.value_fn(t),
            anchor,
            y,
            epsabs=QUADRATURE_TOL,
            epsrel=QUADRATURE_TOL,
            limit=200,
        )
        if est_err > 1e-10 * max(1.0, abs(result)):
            raise QuadratureFailureError(
                f"quadrature error estimate {est_err:.3e} exceeds tolerance"
            )
        return float(result)

    def invert_antiderivative(self, z: float, anchor: float) -> float:
        anchor = self._check(anchor)
        z = float(z)
        lo, hi = self._bracket(z, anchor)
        return self._newton(z, anchor, lo, hi)

    def sample_nonvanishing(
        self, lo: float, hi: float, num: int = 1000, tol: float = 1e-12
    ) -> float | None:
        """Heuristic check: sample the interval and return a witness where
        |phi| <= tol, or None if every sample clears the threshold.

        Unbounded intervals are clipped to a width-2000 window around their
        finite end (or 0); endpoints are inset so open-interval factors that
        vanish only at the boundary are not falsely flagged.
        """
        if not math.isfinite(lo):
            lo = (hi if math.isfinite(hi) else 0.0) - 1000.0
        if not math.isfinite(hi):
            hi = lo + 1000.0 if math.isfinite(lo) else 1000.0
        inset = 1e-9 * (1.0 + max(abs(lo), abs(hi)))
        lo, hi = lo + inset, hi - inset
        if hi <= lo:
            return None
        for k in range(num + 1):
            y = lo + (hi - lo) * k / num
            if abs(self.value_fn(y)) <= tol:
                return y
        return None

    # -- numeric inversion -------------------------------------------------

    def _bracket(self, z: float, anchor: float) -> tuple[float, float]:
        """Expand from the anchor toward z (using monotonicity of F) until
        F brackets it, respecting the open validity interval.  Targets the
        expansion cannot reach, because the interval ends or the user
        function blows up first, raise OutOfRangeError."""
        if z == 0.0:
            return anchor, anchor
        increasing = float(self.value_fn(anchor)) > 0.0
        go_up = (z > 0.0) == increasing
        vlo, vhi = self.validity
        width = 1.0
        for _ in range(80):
            cand = anchor + width if go_up else anchor - width
            terminal = False
            if go_up and cand >= vhi:
                if not math.isfinite(vhi):
                    raise OutOfRangeError(f"z = {z!r} outside the antiderivative range")
                cand = vhi - 1e-12 * (1.0 + abs(vhi))
                terminal = True
            elif not go_up and cand <= vlo:
                if not math.isfinite(vlo):
                    raise OutOfRangeError(f"z = {z!r} outside the antiderivative range")
                cand = vlo + 1e-12 * (1.0 + abs(vlo))
                terminal = True
            try:
                f_cand = self.reciprocal_antiderivative(cand, anchor)
            except (OverflowError, ZeroDivisionError, ValueError) as exc:
                raise OutOfRangeError(
                    f"z = {z!r} unreachable before arithmetic failed at y = {cand!r}"
                ) from exc
            if min(0.0, f_cand) <= z <= max(0.0, f_cand):
                return (anchor, cand) if go_up else (cand, anchor)
            if terminal:
                break
            width *= 2.0
        raise OutOfRangeError(f"z = {z!r} outside the antiderivative range")

    def _newton(self, z: float, anchor: float, lo: float, hi: float) -> float:
        # Coarse monotone table refines the starting bracket and seeds Newton.
        table = [lo + (hi - lo) * k / 63 for k in range(64)]
        values = [self.reciprocal_antiderivative(y, anchor) for y in table]
        increasing = values[-1] >= values[0]
        y = table[0]
        for yk, fk in zip(table, values):
            if (fk <= z) == increasing:
                y = yk
            else:
                hi = yk
                break
        lo = y
        flo = self.reciprocal_antiderivative(lo, anchor)
        fhi = self.reciprocal_antiderivative(hi, anchor)

        for _ in range(100):
            fy = self.reciprocal_antiderivative(y, anchor)
            if abs(fy - z) <= INVERSION_TOL:
                return y
            # Maintain the bracket for the bisection safeguard.
            if (fy < z) == increasing:
                lo, flo = y, fy
            else:
                hi, fhi = y, fy
            step = (z - fy) * self.value_fn(y)  # F'(y) = 1/phi(y)
            candidate = y + step
            if not (lo < candidate < hi):
                candidate = 0.5 * (lo + hi)
            y = candidate
        raise NoConvergenceError(
            f"antiderivative inversion did not reach {INVERSION_TOL:g}"
        )


#: Built-in factor kinds addressable from configuration files.
FACTOR_KINDS = {
    "constant": Constant,
    "linear": Linear,
    "affine": Affine,
    "exponential": Exponential,
    "power": Power,
}
