"""Catalog of reversible Minkowski norms on R^n.

Every norm carries closed-form first and second derivative data for
``F(y)^2 / 2``: the Legendre map ``J(y)`` and the fundamental tensor
``g(y)``. Finite differences appear only in the test-suite as oracles.

Two families cover the catalog:

* quadratic norms ``F(y) = sqrt(y^T A y)`` (Euclidean, anisotropic Euclidean);
* weighted power norms ``F(y) = (sum_i w_i |y_i|^p)^(1/p)`` with ``p >= 2``
  (``PNorm`` has unit weights, ``Quartic`` has ``p = 4``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import kernels
from .errors import DegenerateTensorError, DomainError

MAX_MC_DIMENSION = 16


class NormKind(str, Enum):
    EUCLIDEAN = "euclidean"
    ANISOTROPIC = "anisotropic"
    PNORM = "pnorm"
    QUARTIC = "quartic"


class SingularPointWarning(UserWarning):
    """A derivative was requested at y = 0, where F^2/2 has a critical point."""


def unit_ball_volume(n: int) -> float:
    """Volume omega_n of the Euclidean unit ball in R^n."""
    return math.exp(0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n + 1.0))


@dataclass(frozen=True)
class DualOracle:
    """Closed-form description of the polar norm F*.

    ``kind`` is ``"quadratic"`` (``matrix`` holds A^{-1}) or ``"power"``
    (``exponent`` holds the conjugate exponent q and ``weights`` the dual
    weights).
    """

    kind: str
    matrix: np.ndarray | None = None
    exponent: float | None = None
    weights: np.ndarray | None = None

    def evaluate(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.kind == "quadratic":
            return np.sqrt(np.einsum("...i,ij,...j->...", xi, self.matrix, xi))
        q = self.exponent
        return ((self.weights * np.abs(xi) ** q).sum(axis=-1)) ** (1.0 / q)

    def legendre(self, xi):
        """J*(xi), the gradient of F*(xi)^2 / 2."""
        xi = np.asarray(xi, dtype=float)
        if self.kind == "quadratic":
            return xi @ self.matrix.T
        q = self.exponent
        Fs = self.evaluate(xi)[..., None]
        # |xi|^(q-2) xi written as sign * |xi|^(q-1): q < 2 here
        return Fs ** (2.0 - q) * self.weights * np.sign(xi) * np.abs(xi) ** (q - 1.0)


@dataclass(frozen=True, eq=False)
class MinkowskiNorm:
    """A reversible, strongly convex norm on R^n.

    Build instances through :meth:`euclidean`, :meth:`anisotropic`,
    :meth:`pnorm` or :meth:`quartic`. All evaluation methods accept a single
    vector of shape ``(n,)`` or a batch of shape ``(..., n)``.
    """

    kind: NormKind
    dimension: int
    matrix: np.ndarray | None = field(default=None, repr=False)
    exponent: float | None = None
    weights: np.ndarray | None = field(default=None, repr=False)

    # ----------------------------------------------------------------- builders
    @classmethod
    def euclidean(cls, n: int) -> MinkowskiNorm:
        _check_dimension(n)
        return cls(NormKind.EUCLIDEAN, n, matrix=np.eye(n))

    @classmethod
    def anisotropic(cls, A) -> MinkowskiNorm:
        A = np.array(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DomainError("anisotropic norm needs a square matrix")
        if not np.allclose(A, A.T, rtol=1e-12, atol=1e-14):
            raise DomainError("anisotropic norm needs a symmetric matrix")
        A = 0.5 * (A + A.T)
        if np.linalg.eigvalsh(A).min() <= 0.0:
            raise DomainError("anisotropic norm needs a positive-definite matrix")
        A.setflags(write=False)
        return cls(NormKind.ANISOTROPIC, A.shape[0], matrix=A)

    @classmethod
    def pnorm(cls, p: float, n: int) -> MinkowskiNorm:
        _check_dimension(n)
        if not p >= 2.0:
            raise DomainError(f"PNorm requires p >= 2, got {p}")
        w = np.ones(n)
        w.setflags(write=False)
        return cls(NormKind.PNORM, n, exponent=float(p), weights=w)

    @classmethod
    def quartic(cls, weights) -> MinkowskiNorm:
        w = np.array(weights, dtype=float).ravel()
        if w.size == 0 or np.any(w <= 0.0) or not np.all(np.isfinite(w)):
            raise DomainError("quartic norm needs positive finite weights")
        w.setflags(write=False)
        return cls(NormKind.QUARTIC, w.size, exponent=4.0, weights=w)

    # --------------------------------------------------------------- properties
    @property
    def is_quadratic(self) -> bool:
        return self.kind in (NormKind.EUCLIDEAN, NormKind.ANISOTROPIC)

    @property
    def is_riemannian(self) -> bool:
        """True when F^2 comes from an inner product (or p == 2)."""
        return self.is_quadratic or self.exponent == 2.0

    @property
    def dual_oracle(self) -> DualOracle | None:
        if self.is_quadratic:
            return DualOracle("quadratic", matrix=np.linalg.inv(self.matrix))
        if self.kind is NormKind.PNORM:
            p = self.exponent
            return DualOracle("power", exponent=p / (p - 1.0), weights=np.ones(self.dimension))
        # the catalog treats the quartic dual as unknown and solves for it numerically
        return None

    # --------------------------------------------------------------- evaluation
    def _check(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape[-1:] != (self.dimension,):
            raise DomainError(f"expected vectors of dimension {self.dimension}, got shape {y.shape}")
        return y

    def evaluate(self, y):
        """F(y)."""
        y = self._check(y)
        if self.is_quadratic:
            return np.sqrt(np.maximum(np.einsum("...i,ij,...j->...", y, self.matrix, y), 0.0))
        return _power_value(y, self.exponent, self.weights)

    __call__ = evaluate

    def derivative(self, y):
        """J(y) = grad of F(y)^2 / 2, a covector.

        At y = 0 the zero covector is returned with a :class:`SingularPointWarning`.
        """
        y = self._check(y)
        zero = ~np.any(y != 0.0, axis=-1)
        if np.any(zero):
            warnings.warn("norm derivative requested at y = 0", SingularPointWarning, stacklevel=2)
        if self.is_quadratic:
            return y @ self.matrix.T
        with np.errstate(divide="ignore", invalid="ignore"):
            J = kernels.numpy_backend.power_norm_parts(y, self.exponent, self.weights)[1]
        return np.where(zero[..., None], 0.0, J)

    def fundamental_tensor(self, y):
        """Hessian g(y) of F(y)^2 / 2.

        Raises :class:`DegenerateTensorError` when y = 0, or when y lies on a
        coordinate hyperplane of an l^p (p > 2) or quartic norm.
        """
        y = self._check(y)
        if np.any(~np.any(y != 0.0, axis=-1)):
            raise DegenerateTensorError("fundamental tensor undefined at y = 0")
        if self.is_quadratic:
            return np.broadcast_to(self.matrix, y.shape + (self.dimension,)).copy()
        if self.exponent > 2.0:
            a = np.abs(y)
            on_axis = a <= 1e-14 * a.max(axis=-1, keepdims=True)
            if np.any(on_axis):
                axes = np.flatnonzero(on_axis.reshape(-1, self.dimension).any(axis=0))
                raise DegenerateTensorError(
                    f"fundamental tensor degenerates on coordinate hyperplanes {axes.tolist()}",
                    axes=axes)
        return self._hessian(y)

    def _hessian(self, y):
        # unchecked variant used by the Newton refinement
        if self.is_quadratic:
            return np.broadcast_to(self.matrix, y.shape + (self.dimension,)).copy()
        return kernels.numpy_backend.power_norm_parts(y, self.exponent, self.weights)[2]

    # ------------------------------------------------------------ serialization
    def to_record(self) -> dict:
        params = {}
        if self.kind is NormKind.ANISOTROPIC:
            params["matrix"] = [float(v) for v in self.matrix.ravel()]
        elif self.kind is NormKind.PNORM:
            params["exponent"] = self.exponent
        elif self.kind is NormKind.QUARTIC:
            params["weights"] = [float(v) for v in self.weights]
        return {"kind": self.kind.value, "dimension": self.dimension, "params": params}

    @classmethod
    def from_record(cls, record: dict) -> MinkowskiNorm:
        kind = NormKind(record["kind"])
        n = int(record["dimension"])
        params = record.get("params", {})
        if kind is NormKind.EUCLIDEAN:
            return cls.euclidean(n)
        if kind is NormKind.ANISOTROPIC:
            return cls.anisotropic(np.array(params["matrix"], dtype=float).reshape(n, n))
        if kind is NormKind.PNORM:
            return cls.pnorm(params["exponent"], n)
        norm = cls.quartic(params["weights"])
        if norm.dimension != n:
            raise DomainError("quartic weights do not match the declared dimension")
        return norm

    @classmethod
    def parse(cls, text: str, dimension: int) -> MinkowskiNorm:
        """Parse a short descriptor such as ``euclidean``, ``pnorm:4``,
        ``quartic:1,2`` or ``aniso:4,0,0,1`` (row-major matrix)."""
        tag, _, arg = text.strip().partition(":")
        tag = tag.lower()
        try:
            values = [float(v) for v in arg.split(",") if v.strip()] if arg else []
        except ValueError:
            raise DomainError(f"norm descriptor {text!r}: parameters must be comma-separated numbers") from None
        if tag == "euclidean":
            return cls.euclidean(dimension)
        if tag in ("pnorm", "lp"):
            if len(values) != 1:
                raise DomainError("pnorm descriptor needs one exponent, e.g. pnorm:4")
            return cls.pnorm(values[0], dimension)
        if tag == "quartic":
            if not values:
                values = [1.0] * dimension
            if len(values) != dimension:
                raise DomainError(f"quartic descriptor needs {dimension} weights")
            return cls.quartic(values)
        if tag in ("aniso", "anisotropic"):
            if len(values) == dimension:
                return cls.anisotropic(np.diag(values))
            if len(values) != dimension * dimension:
                raise DomainError(f"aniso descriptor needs {dimension} diagonal or {dimension**2} entries")
            return cls.anisotropic(np.array(values).reshape(dimension, dimension))
        raise DomainError(f"unknown norm descriptor {text!r}")

    def describe(self) -> str:
        if self.kind is NormKind.PNORM:
            return f"pnorm:{self.exponent:g}"
        if self.kind is NormKind.QUARTIC:
            return "quartic:" + ",".join(f"{v:g}" for v in self.weights)
        if self.kind is NormKind.ANISOTROPIC:
            return "aniso:" + ",".join(f"{v:g}" for v in self.matrix.ravel())
        return "euclidean"

    # ---------------------------------------------------------------- geometry
    def bounding_box(self) -> np.ndarray:
        """Half-widths b_i with the unit ball inside prod [-b_i, b_i]."""
        if self.is_quadratic:
            return np.sqrt(np.diag(np.linalg.inv(self.matrix)))
        return self.weights ** (-1.0 / self.exponent)

    def unit_ball_volume(self) -> float:
        """Euclidean volume of {F < 1}, in closed form."""
        n = self.dimension
        if self.is_quadratic:
            return unit_ball_volume(n) / math.sqrt(np.linalg.det(self.matrix))
        p = self.exponent
        log_vol = n * math.log(2.0) + n * math.lgamma(1.0 + 1.0 / p) - math.lgamma(1.0 + n / p)
        return math.exp(log_vol) * float(np.prod(self.weights ** (-1.0 / p)))


def _check_dimension(n):
    if int(n) != n or n < 1:
        raise DomainError(f"dimension must be a positive integer, got {n}")


def _power_value(y, p, w):
    a = np.abs(y)
    m = a.max(axis=-1, keepdims=True)
    safe = np.where(m > 0.0, m, 1.0)
    # rescale by the largest entry before raising to p
    return m[..., 0] * ((w * (a / safe) ** p).sum(axis=-1)) ** (1.0 / p)


@dataclass(frozen=True)
class BHNormalization:
    """Busemann-Hausdorff density of a Minkowski space.

    ``sigma`` is the closed-form value; ``mc_sigma`` and ``mc_stderr`` come from
    the Monte Carlo cross-check.
    """

    sigma: float
    ball_volume: float
    mc_sigma: float
    mc_stderr: float
    samples: int

    @property
    def stderr(self) -> float:
        return self.mc_stderr

    def consistent(self, k: float = 5.0) -> bool:
        """Analytic and Monte Carlo values agree within ``k`` standard errors."""
        return abs(self.sigma - self.mc_sigma) <= k * self.mc_stderr + 1e-15


def bh_normalization(norm: MinkowskiNorm, mc_samples: int = 100_000, seed=0) -> BHNormalization:
    """sigma_F = omega_n / Vol(B(1)) with a Monte Carlo rejection cross-check."""
    n = norm.dimension
    if mc_samples < 10_000:
        raise DomainError("bh_normalization needs at least 1e4 Monte Carlo samples")
    if n > MAX_MC_DIMENSION:
        raise DomainError(f"Monte Carlo cross-check supports n <= {MAX_MC_DIMENSION}")
    vol = norm.unit_ball_volume()
    sigma = unit_ball_volume(n) / vol

    rng = np.random.default_rng(seed)
    half = norm.bounding_box()
    box = float(np.prod(2.0 * half))
    inside = 0
    remaining = mc_samples
    while remaining:
        m = min(remaining, 1 << 18)
        pts = rng.uniform(-1.0, 1.0, size=(m, n)) * half
        if norm.is_quadratic:
            inside += int(np.count_nonzero(np.einsum("ki,ij,kj->k", pts, norm.matrix, pts) < 1.0))
        else:
            inside += kernels.power_ball_count(pts, norm.exponent, norm.weights)
        remaining -= m
    frac = inside / mc_samples
    if frac == 0.0:
        return BHNormalization(sigma, vol, math.inf, math.inf, mc_samples)
    mc_vol = frac * box
    mc_vol_err = box * math.sqrt(frac * (1.0 - frac) / mc_samples)
    mc_sigma = unit_ball_volume(n) / mc_vol
    return BHNormalization(sigma, vol, mc_sigma, mc_sigma * mc_vol_err / mc_vol, mc_samples)


def evaluate_norm(norm: MinkowskiNorm, y):
    return norm.evaluate(y)


def norm_derivative(norm: MinkowskiNorm, y):
    return norm.derivative(y)


def fundamental_tensor(norm: MinkowskiNorm, y):
    return norm.fundamental_tensor(y)
