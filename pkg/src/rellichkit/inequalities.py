"""Both sides of the curvature-improved Hardy and Rellich inequalities.

For a radial profile u = f(d) on a model space every functional reduces to a
one-dimensional integral against the sphere-area density. The three
inequalities share the form

    LHS >= C_main * MAIN + C_rem * REM,

where REM carries the curvature weight D_c(d) and vanishes on flat models.

=========  =======================  ========================  ================
which      LHS                      MAIN                      REM
=========  =======================  ========================  ================
hardy      int d^a F*(Du)^2         int d^(a-2) u^2           int d^(a-2) D u^2
rellich1   int d^a (Lap u)^2        int d^(a-4) u^2           int d^(a-4) D u^2
rellich2   int d^a (Lap u)^2        int d^(a-2) F*(Du)^2      int d^(a-4) D u^2
=========  =======================  ========================  ================
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import DomainError, HypothesisError
from .model_spaces import ModelSpace, RadialProfile, d_remainder, remainder_lower_bound
from .quadrature import QuadratureResult, QuadratureSpec, integrate_radial

# inner radius for every integral over a ball around the base point
LOWER_LIMIT = 1e-10
MARGIN_FACTOR = 10.0

REPORT_COLUMNS = ("which", "n", "alpha", "c", "geometry", "lhs", "rhs_main",
                  "rhs_remainder", "margin", "quad_error")


class Which(str, Enum):
    HARDY = "hardy"
    RELLICH1 = "rellich1"
    RELLICH2 = "rellich2"

    @classmethod
    def parse(cls, value) -> Which:
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("_", "").replace("-", "").replace(" ", "")
        aliases = {"hardy": cls.HARDY, "rellich1": cls.RELLICH1, "rellichi": cls.RELLICH1,
                   "rellich2": cls.RELLICH2, "rellichii": cls.RELLICH2}
        try:
            return aliases[key]
        except KeyError:
            raise DomainError(f"unknown inequality {value!r}") from None


# ---------------------------------------------------------------- constants
def hypothesis_violation(which, n: int, alpha: float) -> str | None:
    """Reason why (n, alpha) is outside the hypothesis of ``which``, or None."""
    which = Which.parse(which)
    if which is Which.HARDY:
        return None if n - 2 + alpha > 0 else f"needs n-2+alpha > 0, got {n - 2 + alpha:g}"
    if alpha >= 2:
        return f"needs alpha < 2, got alpha={alpha:g}"
    if which is Which.RELLICH1:
        return None if n - 4 + alpha > 0 else f"needs n-4+alpha > 0, got {n - 4 + alpha:g}"
    return None if n - 8 + 3 * alpha > 0 else f"needs n-8+3*alpha > 0, got {n - 8 + 3 * alpha:g}"


def hypothesis_holds(which, n: int, alpha: float) -> bool:
    return hypothesis_violation(which, n, alpha) is None


@dataclass(frozen=True)
class Constants:
    """All constants of the three inequalities at (n, alpha), with validity flags."""

    n: int
    alpha: float
    gamma: float
    hardy_main: float
    hardy_rem: float
    rellich1_main: float
    rellich1_rem: float
    rellich2_main: float
    rellich2_rem: float
    hardy_valid: bool
    rellich1_valid: bool
    rellich2_valid: bool

    def main(self, which) -> float:
        return getattr(self, f"{Which.parse(which).value}_main")

    def remainder(self, which) -> float:
        return getattr(self, f"{Which.parse(which).value}_rem")

    def valid(self, which) -> bool:
        return getattr(self, f"{Which.parse(which).value}_valid")

    def to_record(self) -> dict:
        return asdict(self)


def constants(n: int, alpha: float) -> Constants:
    n, a = int(n), float(alpha)
    if n < 1:
        raise DomainError("dimension must be positive")
    return Constants(
        n=n, alpha=a,
        gamma=(n - 4 + a) / 2,
        hardy_main=(n - 2 + a) ** 2 / 4,
        hardy_rem=(n - 2 + a) * (n - 1) / 2,
        rellich1_main=(n - 4 + a) ** 2 * (n - a) ** 2 / 16,
        rellich1_rem=(n - 4 + a) * (n - a) * (n - 2) * (n - 1) / 4,
        rellich2_main=(n - a) ** 2 / 4,
        rellich2_rem=(n - 4 + a) ** 2 * (n - a) * (n - 1) / 8,
        hardy_valid=hypothesis_holds(Which.HARDY, n, a),
        rellich1_valid=hypothesis_holds(Which.RELLICH1, n, a),
        rellich2_valid=hypothesis_holds(Which.RELLICH2, n, a),
    )


def sharp_constant(which, n: int, alpha: float) -> float:
    return constants(n, alpha).main(which)


def chain_identity_check(n: int, alpha: float, gamma: float | None = None,
                         tol: float = 1e-12) -> bool:
    """Check that Rellich II plus Hardy (weight alpha-2) gives Rellich I's constants.

    Two identities must hold: (n-a)^2 g^2/4 equals the Rellich I main constant,
    and the Rellich II remainder plus (n-a)^2 g (n-1)/4 equals the Rellich I
    remainder. Both hold exactly for g = (n-4+a)/2; pass another ``gamma`` to
    test the checker itself.
    """
    if not n - 8 + 3 * alpha > 0:
        raise HypothesisError(f"chain identity needs n-8+3*alpha > 0, got {n - 8 + 3 * alpha:g}")
    k = constants(n, alpha)
    g = k.gamma if gamma is None else float(gamma)
    a = float(alpha)
    pairs = [
        ((n - a) ** 2 * g**2 / 4, k.rellich1_main),
        (k.rellich2_rem + (n - a) ** 2 * g * (n - 1) / 4, k.rellich1_rem),
    ]
    return all(abs(x - y) <= tol * max(abs(x), abs(y), 1.0) for x, y in pairs)


# ----------------------------------------------------------------- reports
@dataclass(frozen=True)
class InequalityInstance:
    """One inequality on one model with one radial test function."""

    space: ModelSpace
    profile: RadialProfile
    alpha: float
    which: Which = Which.RELLICH1

    def __post_init__(self):
        object.__setattr__(self, "which", Which.parse(self.which))
        object.__setattr__(self, "alpha", float(self.alpha))
        self.check()

    def check(self):
        why = hypothesis_violation(self.which, self.space.dimension, self.alpha)
        if why is not None:
            raise HypothesisError(f"{self.which.value} at n={self.space.dimension}: {why}")
        if not math.isfinite(self.profile.support_radius):
            raise DomainError("test profiles must be compactly supported")


@dataclass(frozen=True)
class InequalityReport:
    which: str
    n: int
    alpha: float
    c: float
    geometry: str
    lhs: float
    rhs_main: float
    rhs_remainder: float
    margin: float
    constants: dict
    quadrature_error: float
    converged: bool = True

    @property
    def tolerance(self) -> float:
        return MARGIN_FACTOR * self.quadrature_error

    @property
    def passed(self) -> bool:
        return self.converged and self.margin >= -self.tolerance

    def to_record(self) -> dict:
        return {"which": self.which, "n": self.n, "alpha": self.alpha, "c": self.c,
                "geometry": self.geometry, "lhs": self.lhs, "rhs_main": self.rhs_main,
                "rhs_remainder": self.rhs_remainder, "margin": self.margin,
                "quad_error": self.quadrature_error, "constants": dict(self.constants),
                "converged": self.converged, "passed": self.passed}

    def csv_row(self) -> list:
        rec = self.to_record()
        return [rec[k] for k in REPORT_COLUMNS]


class _Integrator:
    """Integrals of radial expressions over the profile support."""

    def __init__(self, space: ModelSpace, profile: RadialProfile, rtol=1e-9, atol=1e-14,
                 lower=LOWER_LIMIT, spec: QuadratureSpec | None = None):
        self.space = space
        self.profile = profile
        self.spec = spec or QuadratureSpec(lower, profile.support_radius, relative_tolerance=rtol,
                                   absolute_tolerance=atol, singular_a=True,
                                   breakpoints=tuple(profile.breakpoints))

    def parts(self, rho):
        f, f1, f2 = self.profile.evaluate(rho)
        lap = f2 + self.space.distance_laplacian(rho) * f1
        return f, f1, lap

    def __call__(self, expr: Callable) -> QuadratureResult:
        return integrate_radial(self.space, lambda r: expr(r, *self.parts(r)), self.spec)


def _terms(which: Which, alpha: float, c: float, weight: Callable | None = None):
    """Integrands (LHS, MAIN, REM) as functions of (rho, f, f', Lap f)."""
    a = alpha
    D = weight if weight is not None else (lambda r: np.asarray(d_remainder(c, r)))
    if which is Which.HARDY:
        return (lambda r, f, f1, L: r**a * f1**2,
                lambda r, f, f1, L: r ** (a - 2) * f**2,
                lambda r, f, f1, L: r ** (a - 2) * D(r) * f**2)
    lhs = lambda r, f, f1, L: r**a * L**2  # noqa: E731
    rem = lambda r, f, f1, L: r ** (a - 4) * D(r) * f**2  # noqa: E731
    if which is Which.RELLICH1:
        return lhs, (lambda r, f, f1, L: r ** (a - 4) * f**2), rem
    return lhs, (lambda r, f, f1, L: r ** (a - 2) * f1**2), rem


def _report(inst: InequalityInstance, rtol, atol, explicit: bool) -> InequalityReport:
    space, which, a = inst.space, inst.which, inst.alpha
    n, c = space.dimension, space.curvature
    k = constants(n, a)
    c_main, c_rem = k.main(which), k.remainder(which)
    weight = None
    if explicit:
        if a != 0.0:
            raise DomainError("the explicit coth-bound form is stated for alpha = 0")
        weight = (lambda r: np.asarray(remainder_lower_bound(c, r))) if c < 0 else (lambda r: 0.0 * r)
    integ = _Integrator(space, inst.profile, rtol, atol)
    t_lhs, t_main, t_rem = _terms(which, a, c, weight)
    lhs, main = integ(t_lhs), integ(t_main)
    if c == 0.0:
        rem = QuadratureResult(0.0, 0.0, 0, True)
    else:
        rem = integ(t_rem)
    rhs_main, rhs_rem = c_main * main.value, c_rem * rem.value
    qerr = lhs.error_estimate + c_main * main.error_estimate + c_rem * rem.error_estimate
    return InequalityReport(
        which=which.value, n=n, alpha=a, c=c, geometry=space.geometry,
        lhs=lhs.value, rhs_main=rhs_main, rhs_remainder=rhs_rem,
        margin=lhs.value - rhs_main - rhs_rem,
        constants={"gamma": k.gamma, "main_constant": c_main, "remainder_constant": c_rem},
        quadrature_error=qerr,
        converged=lhs.converged and main.converged and rem.converged,
    )


def _as_instance(inst, which):
    inst = inst if isinstance(inst, InequalityInstance) else InequalityInstance(*inst)
    if inst.which is not which:
        inst = InequalityInstance(inst.space, inst.profile, inst.alpha, which)
    return inst


def hardy_report(instance: InequalityInstance, rtol=1e-9, atol=1e-14) -> InequalityReport:
    """Quantitative Hardy inequality with curvature remainder."""
    return _report(_as_instance(instance, Which.HARDY), rtol, atol, False)


def rellich1_report(instance: InequalityInstance, rtol=1e-9, atol=1e-14) -> InequalityReport:
    """Rellich inequality with weight d^(alpha-4) u^2 on the right."""
    return _report(_as_instance(instance, Which.RELLICH1), rtol, atol, False)


def rellich2_report(instance: InequalityInstance, rtol=1e-9, atol=1e-14) -> InequalityReport:
    """Rellich inequality with weight d^(alpha-2) F*(Du)^2 on the right."""
    return _report(_as_instance(instance, Which.RELLICH2), rtol, atol, False)


def report(instance: InequalityInstance, rtol=1e-9, atol=1e-14, explicit=False) -> InequalityReport:
    """Dispatch on ``instance.which``.

    With ``explicit=True`` (alpha = 0 only) the remainder weight D_c is replaced
    by its lower bound 3|c|d^2/(pi^2+|c|d^2), which gives the weaker but fully
    explicit remainder terms.
    """
    return _report(instance, rtol, atol, explicit)


def explicit_rellich_remainder(which, n: int, c: float) -> float:
    """Coefficient of int u^2 / ((pi^2 + |c| d^2) d^2) in the explicit alpha = 0 form."""
    which = Which.parse(which)
    if which is Which.RELLICH1:
        return 3 * abs(c) * n * (n - 1) * (n - 2) * (n - 4) / 4
    if which is Which.RELLICH2:
        return 3 * abs(c) * n * (n - 1) * (n - 4) ** 2 / 8
    raise DomainError("explicit remainder coefficients exist for the Rellich inequalities only")


# ------------------------------------------------------- Green deflection
@dataclass(frozen=True)
class GreenDeflection:
    value: float
    term1: float
    term2: float
    error: float

    @property
    def scale(self) -> float:
        return max(abs(self.term1), abs(self.term2))

    def vanishes(self, rel: float = 1e-6) -> bool:
        return abs(self.value) <= rel * self.scale + MARGIN_FACTOR * self.error

    def to_record(self) -> dict:
        return {"value": self.value, "term1": self.term1, "term2": self.term2,
                "error": self.error, "vanishes": self.vanishes()}


def green_deflection(space: ModelSpace, profile: RadialProfile, alpha: float,
                     rtol=1e-11, atol=1e-15) -> GreenDeflection:
    """Evaluate int [u^2 Lap(d^(a-2)) - d^(a-2) Lap(u^2)] dV on the model.

    Both Laplacians come from the radial reduction, with Lap(u^2) formed from
    the squared profile. For radial u the two terms cancel up to the flux
    through the inner sphere d = LOWER_LIMIT, which is of relative size
    LOWER_LIMIT^(n-4+a).
    """
    n, a = space.dimension, float(alpha)
    if not n - 4 + a > 0:
        raise HypothesisError(f"green deflection needs n-4+alpha > 0, got {n - 4 + a:g}")
    if not math.isfinite(profile.support_radius):
        raise DomainError("green deflection needs a compactly supported profile")
    sq = profile.squared()
    spec = QuadratureSpec(LOWER_LIMIT, profile.support_radius, relative_tolerance=rtol,
                          absolute_tolerance=atol, singular_a=True,
                          breakpoints=tuple(profile.breakpoints))

    def lap_weight(r):
        return (a - 2) * (a - 3 + r * space.distance_laplacian(r)) * r ** (a - 4)

    def lap_sq(r):
        _, s1, s2 = sq.evaluate(r)
        return s2 + space.distance_laplacian(r) * s1

    t1 = integrate_radial(space, lambda r: sq(r) * lap_weight(r), spec)
    t2 = integrate_radial(space, lambda r: r ** (a - 2) * lap_sq(r), spec)
    return GreenDeflection(t1.value - t2.value, t1.value, t2.value,
                           t1.error_estimate + t2.error_estimate)


def product_rule_residual(space: ModelSpace, profile: RadialProfile, rho) -> float:
    """max |Lap(u^2) - 2 F*(Du)^2 - 2 u Lap u| / scale at the sample radii."""
    rho = np.asarray(rho, dtype=float)
    f, f1, f2 = profile.evaluate(rho)
    _, s1, s2 = profile.squared().evaluate(rho)
    lap = space.distance_laplacian(rho)
    lhs = s2 + lap * s1
    rhs = 2 * f1**2 + 2 * f * (f2 + lap * f1)
    scale = np.maximum(np.abs(lhs), np.abs(2 * f1**2) + np.abs(2 * f * (f2 + lap * f1))) + 1e-300
    return float(np.max(np.abs(lhs - rhs) / scale))


# ------------------------------------------------------- chain consistency
@dataclass(frozen=True)
class ChainCheck:
    rellich2_rhs: float
    chained_rhs: float
    rellich1_rhs: float
    quadrature_error: float

    @property
    def passed(self) -> bool:
        return self.chained_rhs >= self.rellich1_rhs - MARGIN_FACTOR * self.quadrature_error

    def to_record(self) -> dict:
        return {**asdict(self), "passed": self.passed}


def chain_consistency(space: ModelSpace, profile: RadialProfile, alpha: float,
                      rtol=1e-9, atol=1e-14) -> ChainCheck:
    """Feed Hardy's bound (weight alpha-2) into Rellich II's right-hand side.

    The result is compared with Rellich I's right-hand side for the same
    profile; the constants make the two agree, so the check is that the
    chained quantity is not smaller beyond quadrature error.
    """
    n = space.dimension
    r2 = rellich2_report(InequalityInstance(space, profile, alpha, Which.RELLICH2), rtol, atol)
    hd = hardy_report(InequalityInstance(space, profile, alpha - 2, Which.HARDY), rtol, atol)
    r1 = rellich1_report(InequalityInstance(space, profile, alpha, Which.RELLICH1), rtol, atol)
    factor = (n - alpha) ** 2 / 4
    chained = factor * (hd.rhs_main + hd.rhs_remainder) + r2.rhs_remainder
    err = r2.quadrature_error + factor * hd.quadrature_error + r1.quadrature_error
    return ChainCheck(r2.rhs_main + r2.rhs_remainder, chained, r1.rhs_main + r1.rhs_remainder, err)


# ---------------------------------------------------------- annulus ratios
def annulus_ratio(space: ModelSpace, which, alpha: float, a: float = 0.1, b: float = 1.0,
                  rtol=1e-12, atol=1e-300) -> tuple[float, float]:
    """Rayleigh ratio of the pure power d^(-gamma) with integrals restricted to [a, b].

    Returns (ratio, relative error bound). In the flat model the ratio equals
    the sharp constant of ``which`` exactly.
    """
    which = Which.parse(which)
    if which is Which.HARDY:
        raise DomainError("annulus ratios are defined for the Rellich inequalities")
    if space.geometry != "flat":
        raise DomainError("annulus exactness holds on flat models")
    n, al = space.dimension, float(alpha)
    g = (n - 4 + al) / 2
    prof = RadialProfile.power(-g)
    spec = QuadratureSpec(a, b, relative_tolerance=rtol, absolute_tolerance=atol)
    integ = _Integrator(space, prof, spec=spec)
    t_lhs, t_main, _ = _terms(which, al, 0.0)
    top, bot = integ(t_lhs), integ(t_main)
    rel = top.error_estimate / abs(top.value) + bot.error_estimate / abs(bot.value)
    return top.value / bot.value, rel
