"""Polar transform, Legendre transforms and the deflection functional K_F.

The polar norm ``F*(xi) = sup_{y != 0} xi(y) / F(y)`` is taken from the norm's
closed-form dual when one exists. Otherwise it is computed by a coarse search
over the unit F-sphere followed by a damped Newton refinement of the strictly
concave problem ``max_y xi(y) - F(y)^2 / 2``, whose maximizer is ``J*(xi)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import ConvergenceError, DomainError
from .norms import MinkowskiNorm, NormKind, SingularPointWarning

NEWTON_TOL = 1e-13
NEWTON_XTOL = 1e-11
NEWTON_MAXITER = 200


@lru_cache(maxsize=32)
def _euclidean_directions(n: int, seed: int = 0) -> np.ndarray:
    """At least 64*n unit vectors, symmetric under y -> -y.

    Hyperspherical angle grids (offset by half a step, so no direction lies on
    a coordinate axis) are used up to n = 4, normalized Gaussian samples above.
    """
    target = 64 * n
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n <= 4:
        m = math.ceil(target ** (1.0 / (n - 1))) + 1
        polar = [np.pi * (np.arange(m) + 0.5) / m for _ in range(n - 2)]
        azimuth = 2.0 * np.pi * (np.arange(2 * m) + 0.5) / (2 * m)
        grids = np.meshgrid(*polar, azimuth, indexing="ij")
        angles = np.stack([g.ravel() for g in grids], axis=1)
        D = np.ones((angles.shape[0], n))
        for k in range(n - 1):
            D[:, k] *= np.cos(angles[:, k])
            D[:, k + 1:] *= np.sin(angles[:, k])[:, None]
    else:
        rng = np.random.default_rng(seed)
        D = rng.standard_normal((target // 2 + 1, n))
        D /= np.linalg.norm(D, axis=1, keepdims=True)
        D = np.vstack([D, -D])
    D.setflags(write=False)
    return D


def _as_batch(norm, xi, name="xi"):
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1:] != (norm.dimension,):
        raise DomainError(f"{name} must have dimension {norm.dimension}, got shape {xi.shape}")
    batch = xi.reshape(-1, norm.dimension)
    if np.any(~np.any(batch != 0.0, axis=1)):
        raise DomainError(f"{name} must be nonzero")
    if not np.all(np.isfinite(batch)):
        raise DomainError(f"{name} must be finite")
    return xi.shape[:-1], batch


def _canonical(batch):
    """Unit covectors with the sign fixed by the largest entry, plus the scale."""
    scale = np.linalg.norm(batch, axis=1)
    unit = batch / scale[:, None]
    lead = unit[np.arange(len(unit)), np.argmax(np.abs(unit), axis=1)]
    sign = np.where(lead < 0.0, -1.0, 1.0)
    return unit * sign[:, None], scale * sign


def _numeric_dual(norm, xi_unit):
    """(F*(xi), J*(xi)) for unit covectors by sphere search and Newton refinement."""
    D = np.asarray(_euclidean_directions(norm.dimension))
    D = D / norm.evaluate(D)[:, None]
    ratios = xi_unit @ D.T
    best = np.argmax(ratios, axis=1)
    t0 = ratios[np.arange(len(xi_unit)), best]
    y0 = t0[:, None] * D[best]

    if norm.kind in (NormKind.PNORM, NormKind.QUARTIC):
        y, ok = kernels.power_legendre_refine(xi_unit, y0, norm.exponent, norm.weights,
                                              NEWTON_TOL, NEWTON_XTOL, NEWTON_MAXITER)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SingularPointWarning)
            y, ok = kernels.numpy_backend.newton_legendre(
                xi_unit, y0, norm.evaluate, norm.derivative, norm._hessian,
                tol=getattr(norm, "newton_tol", NEWTON_TOL),
                xtol=getattr(norm, "newton_xtol", NEWTON_XTOL), maxiter=NEWTON_MAXITER)
    Fy = norm.evaluate(y)
    fstar = (xi_unit * y).sum(axis=1) / Fy
    if not np.all(ok):
        bad = int(np.flatnonzero(~ok)[0])
        raise ConvergenceError(
            f"Legendre refinement did not converge for covector {xi_unit[bad].tolist()}",
            best=float(fstar[bad]))
    # rescale so that F(J*(xi)) = F*(xi) holds to rounding
    y = y * (fstar / Fy)[:, None]
    return fstar, y


def _resolve(norm, method):
    if method not in ("auto", "oracle", "numeric"):
        raise DomainError(f"unknown method {method!r}")
    oracle = getattr(norm, "dual_oracle", None)
    if method == "oracle" and oracle is None:
        raise DomainError(f"{norm!r} has no closed-form dual")
    if method == "numeric" or oracle is None:
        return None
    return oracle


def polar_transform(norm: MinkowskiNorm, xi, method: str = "auto"):
    """F*(xi) for a covector (or a batch of covectors)."""
    shape, batch = _as_batch(norm, xi)
    oracle = _resolve(norm, method)
    if oracle is not None:
        out = oracle.evaluate(batch)
    else:
        unit, scale = _canonical(batch)
        out = _numeric_dual(norm, unit)[0] * np.abs(scale)
    return out.reshape(shape) if shape else float(out[0])


def legendre_dual(norm: MinkowskiNorm, xi, method: str = "auto"):
    """J*(xi): the unique maximizer of y -> xi(y) - F(y)^2 / 2."""
    shape, batch = _as_batch(norm, xi)
    oracle = _resolve(norm, method)
    if oracle is not None:
        y = oracle.legendre(batch)
    else:
        unit, scale = _canonical(batch)
        y = _numeric_dual(norm, unit)[1] * scale[:, None]
    return y.reshape(shape + (norm.dimension,))


def legendre(norm: MinkowskiNorm, y):
    """J(y), the gradient of F(y)^2 / 2."""
    return norm.derivative(y)


def k_deflection(norm: MinkowskiNorm, y, xi, method: str = "auto"):
    """K_F(y, xi) = xi(y) - J(y)(J*(xi)); vanishes identically iff F is Riemannian."""
    y = np.asarray(y, dtype=float)
    if np.any(~np.any(y.reshape(-1, norm.dimension) != 0.0, axis=1)):
        raise DomainError("y must be nonzero")
    xi = np.asarray(xi, dtype=float)
    ystar = legendre_dual(norm, xi, method=method)
    out = (xi * y).sum(axis=-1) - (norm.derivative(y) * ystar).sum(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ProbeResult:
    norm: str
    dimension: int
    samples: int
    seed: int
    max_abs_kf: float
    scale: float
    verdict: bool

    def to_record(self) -> dict:
        return {"norm": self.norm, "dimension": self.dimension, "samples": self.samples,
                "seed": self.seed, "max_abs_kf": self.max_abs_kf, "scale": self.scale,
                "verdict": self.verdict}


def riemannian_probe(norm: MinkowskiNorm, samples: int = 1000, seed: int = 0,
                     method: str = "auto") -> ProbeResult:
    """Sample |K_F| on random pairs; verdict True means Riemannian-like.

    The verdict holds iff ``max |K_F| <= 1e-7 * max |xi(y)|`` over the samples.
    """
    if samples < 100:
        raise DomainError("riemannian_probe needs at least 100 samples")
    rng = np.random.default_rng(seed)
    y = rng.standard_normal((samples, norm.dimension))
    xi = rng.standard_normal((samples, norm.dimension))
    kf = k_deflection(norm, y, xi, method=method)
    scale = float(np.max(np.abs((xi * y).sum(axis=1))))
    max_kf = float(np.max(np.abs(kf)))
    return ProbeResult(norm.describe(), norm.dimension, samples, seed, max_kf, scale,
                       bool(max_kf <= 1e-7 * scale))


class DualNorm:
    """The polar norm F* presented through the same interface as a catalog norm.

    All quantities come from the numeric (or oracle) Legendre machinery, so
    ``polar_transform(DualNorm(norm), y)`` realizes the bidual F**.
    """

    kind = None
    is_quadratic = False
    dual_oracle = None
    # the inner dual is itself only accurate to NEWTON_TOL
    newton_tol = 1e-10
    newton_xtol = 1e-8

    def __init__(self, norm: MinkowskiNorm, method: str = "numeric"):
        self.base = norm
        self.method = method
        self.dimension = norm.dimension

    def evaluate(self, xi):
        return polar_transform(self.base, xi, method=self.method)

    __call__ = evaluate

    def derivative(self, xi):
        return legendre_dual(self.base, xi, method=self.method)

    def _hessian(self, xi):
        # g*(xi) = g(J*(xi))^{-1}; pinv keeps axis points finite
        return np.linalg.pinv(self.base._hessian(self.derivative(xi)))

    def describe(self) -> str:
        return f"dual({self.base.describe()})"
