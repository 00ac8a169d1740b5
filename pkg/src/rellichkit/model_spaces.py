"""Constant-curvature Finsler-Hadamard models and radial reductions.

Two geometries are supported: flat Minkowski spaces over any catalog norm, and
hyperbolic Riemannian spaces of constant curvature ``c < 0``. On both the
Laplacian comparison holds with equality, ``Delta d = (n-1) ct_c(d)``, so a
radial function ``u = f(d)`` has

    F*(Du) = |f'(d)|,    Delta u = f''(d) + (n-1) ct_c(d) f'(d),

and every integral over the space collapses to one dimension against the
sphere area density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import DomainError
from .norms import MinkowskiNorm, unit_ball_volume

# below this value of sqrt(|c|) * rho, x coth x - 1 comes from its Taylor series
SERIES_CUTOFF = 1.0
_SERIES_TERMS = 20


def _bernoulli_even(count):
    """B_2, B_4, ..., B_2count as Fractions (Akiyama-Tanigawa)."""
    out, a = [], []
    for m in range(2 * count + 1):
        a.append(Fraction(1, m + 1))
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        if m >= 2 and m % 2 == 0:
            out.append(a[0])
    return out


# x coth x - 1 = sum_k 2^(2k) B_2k / (2k)! x^(2k); converges for |x| < pi and
# the terms shrink like (x/pi)^(2k), so 20 terms reach rounding level at x = 1
_COTH_COEFFS = np.array([float(2 ** (2 * k) * b / math.factorial(2 * k))
                         for k, b in enumerate(_bernoulli_even(_SERIES_TERMS), start=1)])


def _rho_positive(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho > 0.0)):
        raise DomainError("rho must be positive")
    return rho


def _check_curvature(c):
    if not c <= 0.0:
        raise DomainError(f"curvature bound must satisfy c <= 0, got {c}")


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def ct(c: float, rho):
    """ct_c(rho): 1/rho for c = 0, sqrt|c| coth(sqrt|c| rho) for c < 0."""
    _check_curvature(c)
    rho = _rho_positive(rho)
    if c == 0.0:
        return _scalar(1.0 / rho)
    k = math.sqrt(-c)
    return _scalar(k / np.tanh(k * rho))


def _xcothx_minus_one(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < SERIES_CUTOFF
    s = x[small] ** 2
    acc = np.zeros_like(s)
    for coef in _COTH_COEFFS[::-1]:
        acc = s * (coef + acc)
    out[small] = acc
    big = ~small
    out[big] = x[big] / np.tanh(x[big]) - 1.0
    return out


def d_remainder(c: float, rho):
    """D_c(rho) = rho ct_c(rho) - 1 (and 0 at rho = 0); always >= 0."""
    _check_curvature(c)
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho >= 0.0)):
        raise DomainError("rho must be nonnegative")
    if c == 0.0:
        return _scalar(np.zeros_like(rho))
    return _scalar(_xcothx_minus_one(math.sqrt(-c) * rho))


def remainder_lower_bound(c: float, rho):
    """3|c| rho^2 / (pi^2 + |c| rho^2), a lower bound for D_c(rho)."""
    if not c < 0.0:
        raise DomainError("remainder_lower_bound needs c < 0")
    rho = _rho_positive(rho)
    s = -c * rho**2
    return _scalar(3.0 * s / (math.pi**2 + s))


@dataclass(frozen=True)
class RadialProfile:
    """A radial function u(x) = f(d(x)) given through f, f' and f''.

    The callables must accept numpy arrays. Values are forced to zero for
    ``rho >= support_radius``. ``breakpoints`` lists radii where the profile
    is only finitely smooth; quadrature splits there.
    """

    f: Callable
    df: Callable
    d2f: Callable
    support_radius: float = math.inf
    breakpoints: tuple = ()
    name: str = "profile"

    def __post_init__(self):
        if not self.support_radius > 0.0:
            raise DomainError("support_radius must be positive")

    def evaluate(self, rho):
        """(f, f', f'') at ``rho`` as three arrays."""
        rho = np.asarray(rho, dtype=float)
        with np.errstate(all="ignore"):
            vals = self.f(rho), self.df(rho), self.d2f(rho)
        vals = [np.broadcast_to(np.asarray(v, dtype=float), rho.shape) for v in vals]
        if math.isfinite(self.support_radius):
            outside = rho >= self.support_radius
            vals = [np.where(outside, 0.0, v) for v in vals]
        return tuple(vals)

    def __call__(self, rho):
        return self.evaluate(rho)[0]

    def squared(self) -> RadialProfile:
        """The profile of u^2: (f^2, 2 f f', 2 f'^2 + 2 f f'')."""
        ev = self.evaluate
        return RadialProfile.from_triple(lambda r: _square(ev(r)), self.support_radius,
                                         self.breakpoints, f"({self.name})^2")

    def check_consistency(self, points, rtol: float = 1e-4, h: float = 1e-5) -> bool:
        """f' and f'' agree with central differences of f and f' at ``points``."""
        x = np.asarray(points, dtype=float)
        f0, f1, f2 = self.evaluate(x)
        fp, f1p, _ = self.evaluate(x + h)
        fm, f1m, _ = self.evaluate(x - h)
        d1 = (fp - fm) / (2 * h)
        d2 = (f1p - f1m) / (2 * h)
        scale1 = np.maximum(np.abs(f1), np.abs(f0) / np.maximum(x, h)) + 1e-12
        scale2 = np.maximum(np.abs(f2), np.abs(f1) / np.maximum(x, h)) + 1e-12
        return bool(np.all(np.abs(d1 - f1) <= rtol * scale1) and np.all(np.abs(d2 - f2) <= rtol * scale2))

    # ------------------------------------------------------------- factories
    @classmethod
    def from_triple(cls, triple: Callable, support_radius: float = math.inf,
                    breakpoints=(), name: str = "profile") -> RadialProfile:
        """Profile from one vectorized callable returning (f, f', f'')."""
        return _ArrayProfile(triple, support_radius, breakpoints, name)

    @classmethod
    def constant(cls, value: float = 1.0) -> RadialProfile:
        return cls(lambda r: np.full_like(r, value), np.zeros_like, np.zeros_like,
                   name=f"const({value:g})")

    @classmethod
    def power(cls, exponent: float, coefficient: float = 1.0) -> RadialProfile:
        """f(rho) = coefficient * rho^exponent (no support limit)."""
        a, k = float(exponent), float(coefficient)
        return cls(lambda r: k * r**a,
                   lambda r: k * a * r ** (a - 1.0),
                   lambda r: k * a * (a - 1.0) * r ** (a - 2.0),
                   name=f"rho^{a:g}")

    @classmethod
    def bump(cls, R: float = 1.0, power: int = 4) -> RadialProfile:
        """f(rho) = (1 - (rho/R)^2)^power on [0, R), zero beyond."""
        k = int(power)
        if k < 3:
            raise DomainError("bump power must be >= 3 for a C^2 profile")

        def f(r):
            return (1.0 - (r / R) ** 2) ** k

        def df(r):
            return -2.0 * k * r / R**2 * (1.0 - (r / R) ** 2) ** (k - 1)

        def d2f(r):
            s = 1.0 - (r / R) ** 2
            return -2.0 * k / R**2 * s ** (k - 1) + 4.0 * k * (k - 1) * r**2 / R**4 * s ** (k - 2)

        return cls(f, df, d2f, support_radius=R, name=f"bump(R={R:g})")

    @classmethod
    def even_polynomial_bump(cls, coefficients, R: float = 1.0) -> RadialProfile:
        """f(rho) = (sum_k a_k rho^(2k)) (1 - (rho/R)^2)^3: even, C^2, supported on [0, R]."""
        a = np.asarray(coefficients, dtype=float)
        P = np.polynomial.Polynomial(np.ravel(np.column_stack([a, np.zeros_like(a)]))[:-1])
        B = np.polynomial.Polynomial([1.0, 0.0, -1.0 / R**2]) ** 3
        q = P * B
        q1, q2 = q.deriv(1), q.deriv(2)
        return cls(q, q1, q2, support_radius=R, name="even-poly-bump")


def _square(vals):
    f, f1, f2 = vals
    return f * f, 2.0 * f * f1, 2.0 * f1 * f1 + 2.0 * f * f2


class _ArrayProfile(RadialProfile):
    """Profile defined by one callable returning (f, f', f'') together."""

    def __init__(self, triple, support_radius=math.inf, breakpoints=(), name="profile"):
        object.__setattr__(self, "_triple", triple)
        object.__setattr__(self, "f", lambda r: triple(r)[0])
        object.__setattr__(self, "df", lambda r: triple(r)[1])
        object.__setattr__(self, "d2f", lambda r: triple(r)[2])
        object.__setattr__(self, "support_radius", support_radius)
        object.__setattr__(self, "breakpoints", tuple(breakpoints))
        object.__setattr__(self, "name", name)
        self.__post_init__()

    def evaluate(self, rho):
        rho = np.asarray(rho, dtype=float)
        vals = [np.broadcast_to(np.asarray(v, dtype=float), rho.shape) for v in self._triple(rho)]
        if math.isfinite(self.support_radius):
            outside = rho >= self.support_radius
            vals = [np.where(outside, 0.0, v) for v in vals]
        return tuple(vals)


@dataclass(frozen=True, eq=False)
class ModelSpace:
    """An n-dimensional Finsler-Hadamard model around an implicit origin.

    ``geometry`` is ``"flat"`` (a Minkowski space over ``norm``) or
    ``"hyperbolic"`` (Riemannian, constant curvature ``curvature < 0``).
    Mean covariation vanishes on both by construction.
    """

    dimension: int
    geometry: str
    curvature: float = 0.0
    norm: MinkowskiNorm | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "curvature", float(self.curvature))
        if int(self.dimension) != self.dimension or self.dimension < 2:
            raise DomainError("model dimension must be an integer >= 2")
        if self.geometry == "flat":
            if self.curvature != 0.0:
                raise DomainError("flat models have curvature 0")
            if self.norm is None:
                object.__setattr__(self, "norm", MinkowskiNorm.euclidean(self.dimension))
            elif self.norm.dimension != self.dimension:
                raise DomainError("norm dimension does not match the model")
        elif self.geometry == "hyperbolic":
            if not self.curvature < 0.0:
                raise DomainError("hyperbolic models need curvature c < 0")
            if self.norm is not None and not self.norm.is_riemannian:
                raise DomainError("hyperbolic models are Riemannian")
        else:
            raise DomainError(f"unknown geometry {self.geometry!r}")

    @classmethod
    def flat(cls, n: int, norm: MinkowskiNorm | None = None) -> ModelSpace:
        return cls(n, "flat", 0.0, norm)

    @classmethod
    def hyperbolic(cls, n: int, c: float = -1.0) -> ModelSpace:
        return cls(n, "hyperbolic", float(c))

    @classmethod
    def from_curvature(cls, n: int, c: float, norm: MinkowskiNorm | None = None) -> ModelSpace:
        _check_curvature(c)
        c = float(c)
        return cls.flat(n, norm) if c == 0.0 else cls.hyperbolic(n, c)

    @property
    def curvature_bound(self) -> float:
        return self.curvature

    def ct(self, rho):
        return ct(self.curvature, rho)

    def distance_laplacian(self, rho):
        """Delta d at distance rho; equality case of the Laplacian comparison."""
        return (self.dimension - 1) * np.asarray(self.ct(rho))

    def sphere_area(self, rho):
        n, c = self.dimension, self.curvature
        rho = _rho_positive(rho)
        if c == 0.0:
            return _scalar(n * unit_ball_volume(n) * rho ** (n - 1))
        k = math.sqrt(-c)
        return _scalar(n * unit_ball_volume(n) * (np.sinh(k * rho) / k) ** (n - 1))

    def distance(self, x):
        """d(x) = F(x) from the origin of a flat model."""
        if self.geometry != "flat":
            raise DomainError("explicit coordinates are only provided for flat models")
        return self.norm.evaluate(x)

    def to_record(self) -> dict:
        return {"n": self.dimension, "geometry": self.geometry, "c": self.curvature,
                "norm": None if self.norm is None else self.norm.to_record()}

    @classmethod
    def from_record(cls, record: dict) -> ModelSpace:
        norm = record.get("norm")
        norm = MinkowskiNorm.from_record(norm) if norm else None
        return cls(int(record["n"]), record["geometry"], float(record.get("c", 0.0)), norm)

    def describe(self) -> str:
        if self.geometry == "flat":
            return f"flat[{self.norm.describe()}]"
        return f"hyperbolic[c={self.curvature:g}]"


def sphere_area(space: ModelSpace, rho):
    """Radial volume density: Vol_F(B(rho)) = integral of sphere_area over [0, rho]."""
    return space.sphere_area(rho)


def radial_laplacian(space: ModelSpace, profile: RadialProfile, rho):
    """Finsler-Laplacian of f(d) at distance rho: f'' + (n-1) ct_c f'."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0.0):
        raise DomainError("radial_laplacian is singular at rho = 0; use the limit n f''(0) for even profiles")
    _, f1, f2 = profile.evaluate(rho)
    return _scalar(f2 + space.distance_laplacian(rho) * f1)


def radial_gradient_norm(space: ModelSpace, profile: RadialProfile, rho):
    """F*(Du) = |f'(rho)|, from F*(Dd) = 1."""
    rho = _rho_positive(rho)
    return _scalar(np.abs(profile.evaluate(rho)[1]))
