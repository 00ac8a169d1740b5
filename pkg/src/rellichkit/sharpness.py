"""Extremal families and Rayleigh-ratio sweeps toward the sharp constants.

The test functions are psi * u_eps with u_eps = max(eps, d)^(-gamma), the
kink at d = eps blended over [eps - eta, eps + eta] and psi a polynomial
smoothstep cutoff from 1 on [0, r] to 0 on [R, inf). As eps -> 0 the ratio

    Rellich I:   I1 / I2 = int d^a (Lap u)^2 / int d^(a-4) u^2
    Rellich II:  I1 / I3 = int d^a (Lap u)^2 / int d^(a-2) F*(Du)^2

decreases toward the sharp constant like 1/ln(1/eps), driven by the
logarithmic divergence of I~(eps) = int_{eps<d<r} d^(-n) dV.

Extrapolation
-------------
On the flat model I1 and I2 are exactly affine in x = ln(1/eps): the region
eps + eta < d < r contributes a multiple of x while the mollification layer
and the cutoff annulus contribute eps-independent constants. The ratio is
then the Moebius function (L x + a) / (x + b), which is the default fit. Its
expansion L + (a - L b)/x + O(x^-2) shows that the model L + b/x is only the
first-order truncation. That model is available as ``model="inverse-log"``,
but the O(1) cutoff constant makes its limit unreliable at desk-scale eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError, HypothesisError
from .inequalities import MARGIN_FACTOR, LOWER_LIMIT, Which, constants, hypothesis_violation
from .model_spaces import ModelSpace, RadialProfile
from .norms import unit_ball_volume
from .quadrature import QuadratureSpec, integrate_radial

DEFAULT_EPSILONS = (0.05, 0.02, 0.01, 0.005, 0.002)
ETA_FACTOR = 0.1
SWEEP_COLUMNS = ("eps", "I1", "I2", "ratio", "I_tilde")
MODELS = ("rational", "inverse-log")


def extremal_profile(n: int, alpha: float, epsilon: float, r: float, R: float,
                     eta: float | None = None, cutoff_order: int = 5) -> RadialProfile:
    """The mollified, cut-off truncated power psi * u_eps as a RadialProfile.

    ``eta`` defaults to ``epsilon / 10``. ``cutoff_order`` selects the quintic
    (5, C^2) or septic (7, C^3) smoothstep for psi.
    """
    eps = float(epsilon)
    eta = ETA_FACTOR * eps if eta is None else float(eta)
    if not 0.0 < eps < r < R:
        raise DomainError(f"need 0 < epsilon < r < R, got {eps}, {r}, {R}")
    if not 0.0 < eta < eps / 2:
        raise DomainError(f"need 0 < eta < epsilon/2, got eta={eta}")
    if cutoff_order not in (5, 7):
        raise DomainError("cutoff_order must be 5 or 7")
    gamma = (n - 4 + alpha) / 2
    r, R = float(r), float(R)

    def triple(rho):
        return kernels.extremal_profile(np.asarray(rho, dtype=float), eps, eta, gamma,
                                        r, R, cutoff_order)

    return RadialProfile.from_triple(triple, R, (eps - eta, eps + eta, r),
                                     f"extremal(eps={eps:g})")


# ---------------------------------------------------------- extrapolation
@dataclass(frozen=True)
class Extrapolation:
    limit: float
    model: str
    coefficients: tuple
    residual: float
    points: int


def extrapolate_ratios(epsilons, ratios, model: str = "rational", tail: int | None = None,
                       min_spread: float = 10.0) -> Extrapolation:
    """Fit the eps -> 0 limit of a ratio sequence.

    ``model="rational"`` fits ratio = (L x + a)/(x + b) with x = ln(1/eps) by
    linear least squares on ratio*(x + b) = L x + a. ``model="inverse-log"``
    fits ratio = L + b/x. At least four points are used (``tail`` picks the
    last ones) and the used eps values must span a factor ``min_spread``.
    """
    eps = np.asarray(epsilons, dtype=float)
    q = np.asarray(ratios, dtype=float)
    if eps.shape != q.shape or eps.ndim != 1:
        raise DomainError("epsilons and ratios must be matching 1-d sequences")
    if tail is not None:
        eps, q = eps[-tail:], q[-tail:]
    if eps.size < 4:
        raise DomainError(f"extrapolation needs at least 4 points, got {eps.size}")
    if np.any(eps <= 0) or np.any(eps >= 1):
        raise DomainError("epsilons must lie in (0, 1)")
    if eps.max() / eps.min() < min_spread:
        raise DomainError(f"epsilons must span a factor of at least {min_spread:g}")
    x = np.log(1.0 / eps)
    if model == "rational":
        M = np.column_stack([x, np.ones_like(x), -q])
        sol, *_ = np.linalg.lstsq(M, q * x, rcond=None)
        L, a, b = sol
        fitted = (L * x + a) / (x + b)
        coef = (float(L), float(a), float(b))
    elif model == "inverse-log":
        M = np.column_stack([np.ones_like(x), 1.0 / x])
        sol, *_ = np.linalg.lstsq(M, q, rcond=None)
        L, b = sol
        fitted = L + b / x
        coef = (float(L), float(b))
    else:
        raise DomainError(f"unknown extrapolation model {model!r}; choose from {MODELS}")
    resid = float(np.max(np.abs(fitted - q)) / max(np.max(np.abs(q)), 1e-300))
    return Extrapolation(float(L), model, coef, resid, int(eps.size))


# ------------------------------------------------------------------ sweeps
@dataclass
class SharpnessSweep:
    """Ratios of the extremal family along a decreasing eps list."""

    params: dict
    epsilons: np.ndarray
    i1: np.ndarray
    i2: np.ndarray
    i_tilde: np.ndarray
    ratios: np.ndarray
    ratio_errors: np.ndarray
    sharp_constant: float
    extrapolated_limit: float = math.nan
    relative_gap: float = math.nan
    fit: Extrapolation | None = None
    c_meas: float = math.nan
    envelope_main: float = math.nan
    converged: bool = True
    notes: list = field(default_factory=list)

    @property
    def which(self) -> Which:
        return Which.parse(self.params["which"])

    @property
    def lower_bound_ok(self) -> np.ndarray:
        return self.ratios >= self.sharp_constant - MARGIN_FACTOR * self.ratio_errors

    @property
    def i_tilde_bound(self) -> np.ndarray:
        """n omega_n ln(r/eps), the volume-comparison lower bound for I~(eps)."""
        n, r = self.params["n"], self.params["r"]
        return n * unit_ball_volume(n) * np.log(r / self.epsilons)

    @property
    def i_tilde_ok(self) -> np.ndarray:
        b = self.i_tilde_bound
        return self.i_tilde >= b - 1e-9 * np.abs(b)

    @property
    def monotone_tail(self) -> bool:
        return bool(np.all(np.diff(self.ratios) <= MARGIN_FACTOR * self.ratio_errors[1:]))

    @property
    def envelope_bound(self) -> np.ndarray:
        """Upper envelope main + c_meas/(k I~) with k = 1 (Rellich I) or gamma^2 (Rellich II)."""
        k = 1.0 if self.which is Which.RELLICH1 else self.params["gamma"] ** 2
        return self.envelope_main + self.c_meas / (k * self.i_tilde)

    @property
    def envelope_ok(self) -> np.ndarray:
        return self.ratios <= self.envelope_bound + MARGIN_FACTOR * self.ratio_errors

    def passed(self, gap_tol: float = 0.02) -> bool:
        return bool(self.converged and self.relative_gap < gap_tol and self.lower_bound_ok.all()
                    and self.i_tilde_ok.all())

    def extrapolate(self, model: str = "rational", tail: int | None = None) -> float:
        fit = extrapolate_ratios(self.epsilons, self.ratios, model, tail)
        self.fit = fit
        self.extrapolated_limit = fit.limit
        self.relative_gap = abs(fit.limit - self.sharp_constant) / self.sharp_constant
        if not self.monotone_tail:
            self.notes.append("ratio tail is not monotone")
        return fit.limit

    def rows(self) -> list:
        return [[float(e), float(a), float(b), float(q), float(t)]
                for e, a, b, q, t in zip(self.epsilons, self.i1, self.i2, self.ratios, self.i_tilde)]

    @property
    def columns(self) -> tuple:
        return ("eps", "I1", "I2" if self.which is Which.RELLICH1 else "I3", "ratio", "I_tilde")

    def summary(self) -> dict:
        return {
            "L": self.extrapolated_limit,
            "sharp_constant": self.sharp_constant,
            "relative_gap": self.relative_gap,
            "model": None if self.fit is None else self.fit.model,
            "fit_coefficients": None if self.fit is None else list(self.fit.coefficients),
            "fit_residual": None if self.fit is None else self.fit.residual,
            "lower_bound_ok": bool(self.lower_bound_ok.all()),
            "i_tilde_ok": bool(self.i_tilde_ok.all()),
            "envelope_ok": bool(self.envelope_ok.all()),
            "monotone_tail": self.monotone_tail,
            "converged": self.converged,
            "notes": list(self.notes),
        }


def i_tilde(space: ModelSpace, epsilon: float, r: float, rtol: float = 1e-10):
    """I~(eps) = int_{eps < d < r} d^(-n) dV as a QuadratureResult.

    On the flat model this is exactly n omega_n ln(r/eps); curvature only
    enlarges it.
    """
    if not 0.0 < epsilon < r:
        raise DomainError(f"need 0 < epsilon < r, got {epsilon}, {r}")
    n = float(space.dimension)
    return integrate_radial(space, lambda rho: rho ** (-n),
                            QuadratureSpec(float(epsilon), float(r), relative_tolerance=rtol,
                                           singular_a=True))


def _check_epsilons(epsilons, r):
    eps = np.asarray(epsilons, dtype=float)
    if eps.ndim != 1 or eps.size == 0:
        raise DomainError("epsilons must be a nonempty list")
    if np.any(np.diff(eps) >= 0):
        raise DomainError("epsilons must be strictly decreasing")
    if np.any(eps <= 0) or np.any(eps >= r):
        raise DomainError(f"epsilons must lie in (0, r) with r={r}")
    return eps


def rayleigh_sweep(space: ModelSpace, alpha: float, which="rellich1",
                   epsilons=DEFAULT_EPSILONS, r: float = 0.1, R: float = 0.2,
                   eta_factor: float = ETA_FACTOR, cutoff_order: int = 5,
                   rtol: float = 1e-10, model: str = "rational") -> SharpnessSweep:
    """Rayleigh ratios of the extremal family for Rellich I or II.

    Each eps yields I1, the denominator I2 (Rellich I) or I3 (Rellich II) and
    I~(eps). The cutoff-layer constant c_meas used by the upper envelope is
    measured once, at the smallest eps, as the part of I1 not accounted for by
    the pure-power region eps + eta < d < r.
    """
    which = Which.parse(which)
    if which is Which.HARDY:
        raise DomainError("sweeps are defined for rellich1 and rellich2")
    n, a = space.dimension, float(alpha)
    why = hypothesis_violation(which, n, a)
    if why is not None:
        raise HypothesisError(f"{which.value} at n={n}: {why}")
    if not 0.0 < r < R:
        raise DomainError("need 0 < r < R")
    if not 0.0 < eta_factor < 0.5:
        raise DomainError("eta_factor must lie in (0, 1/2)")
    eps = _check_epsilons(epsilons, r)
    k = constants(n, a)
    gamma = k.gamma
    lap = space.distance_laplacian

    i1, i2, it, err = [], [], [], []
    converged = True
    for e in eps:
        prof = extremal_profile(n, a, e, r, R, eta_factor * e, cutoff_order)
        spec = QuadratureSpec(LOWER_LIMIT, R, relative_tolerance=rtol, singular_a=True,
                              breakpoints=prof.breakpoints)

        def top(rho, prof=prof):
            _, f1, f2 = prof.evaluate(rho)
            return rho**a * (f2 + lap(rho) * f1) ** 2

        if which is Which.RELLICH1:
            def bottom(rho, prof=prof):
                return rho ** (a - 4) * prof.evaluate(rho)[0] ** 2
        else:
            def bottom(rho, prof=prof):
                return rho ** (a - 2) * prof.evaluate(rho)[1] ** 2

        t = integrate_radial(space, top, spec)
        b = integrate_radial(space, bottom, spec)
        tl = i_tilde(space, e, r, rtol)
        converged &= t.converged and b.converged and tl.converged
        i1.append(t.value)
        i2.append(b.value)
        it.append(tl.value)
        err.append(t.value / b.value * (t.error_estimate / abs(t.value) + b.error_estimate / abs(b.value)))

    i1, i2, it, err = map(np.asarray, (i1, i2, it, err))
    params = {"n": n, "alpha": a, "c": space.curvature, "geometry": space.geometry,
              "r": float(r), "R": float(R), "eta_factor": float(eta_factor),
              "cutoff_order": int(cutoff_order), "which": which.value, "gamma": gamma,
              "epsilons": [float(x) for x in eps]}
    sweep = SharpnessSweep(params, eps, i1, i2, it, i1 / i2, err, k.main(which), converged=converged)

    # envelope: main term with the Laplacian-comparison slack r, plus c_meas / I~
    box = (n - a) / 2 + r
    sweep.envelope_main = gamma**2 * box**2 if which is Which.RELLICH1 else box**2
    e = eps[-1]
    power_part = integrate_radial(
        space, lambda rho: rho**a * (gamma * (gamma + 2 - rho * lap(rho))) ** 2 * rho ** (-2 * gamma - 4),
        QuadratureSpec((1 + eta_factor) * e, r, relative_tolerance=rtol, singular_a=True)).value
    sweep.c_meas = float(i1[-1] - power_part)

    if eps.size >= 4 and eps.max() / eps.min() >= 10.0:
        sweep.extrapolate(model)
    else:
        sweep.notes.append("too few points or too narrow an eps range to extrapolate")
    return sweep


def extrapolate(sweep: SharpnessSweep, model: str = "rational", tail: int | None = None) -> float:
    """Extrapolated eps -> 0 limit of a sweep; also stores the gap on the sweep."""
    return sweep.extrapolate(model, tail)
