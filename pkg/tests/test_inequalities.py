import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rellichkit.errors import DomainError, HypothesisError
from rellichkit.inequalities import (
    REPORT_COLUMNS,
    InequalityInstance,
    Which,
    annulus_ratio,
    chain_consistency,
    chain_identity_check,
    constants,
    explicit_rellich_remainder,
    green_deflection,
    hardy_report,
    hypothesis_holds,
    product_rule_residual,
    rellich1_report,
    rellich2_report,
    report,
)
from rellichkit.model_spaces import ModelSpace, RadialProfile
from rellichkit.norms import MinkowskiNorm

BUMP = RadialProfile.bump()
CURVATURES = (0.0, -0.25, -1.0, -4.0)


def space(n, c):
    return ModelSpace.flat(n) if c == 0 else ModelSpace.hyperbolic(n, c)


# ---------------------------------------------------------------- constants
def test_constant_examples():
    assert constants(5, 0).rellich1_main == 25 / 16
    assert constants(9, 0).rellich2_main == 81 / 4
    assert constants(5, 0).hardy_main == 9 / 4


@given(n=st.integers(1, 30), a=st.floats(-5, 5))
def test_constants_match_formulas(n, a):
    k = constants(n, a)
    g = (n - 4 + a) / 2
    assert k.gamma == pytest.approx(g)
    assert k.rellich1_main == pytest.approx(g**2 * (n - a) ** 2 / 4, rel=1e-12, abs=1e-12)
    assert k.rellich1_rem == pytest.approx((n - 4 + a) * (n - a) * (n - 2) * (n - 1) / 4, rel=1e-12, abs=1e-12)
    assert k.rellich2_rem == pytest.approx((n - 4 + a) ** 2 * (n - a) * (n - 1) / 8, rel=1e-12, abs=1e-12)
    assert k.hardy_valid == (n - 2 + a > 0)
    assert k.rellich1_valid == (n - 4 + a > 0 and a < 2)
    assert k.rellich2_valid == (n - 8 + 3 * a > 0 and a < 2)


def test_explicit_alpha_zero_coefficients():
    # alpha = 0 coefficients obtained from D_c >= 3|c|d^2/(pi^2+|c|d^2)
    for n in (5, 9, 11):
        k = constants(n, 0)
        assert explicit_rellich_remainder("rellich1", n, -1.0) == pytest.approx(3 * k.rellich1_rem)
        assert explicit_rellich_remainder("rellich2", n, -2.0) == pytest.approx(6 * k.rellich2_rem)


def test_chain_identity_examples():
    assert chain_identity_check(9, 0)
    assert chain_identity_check(10, 0.5)
    assert not chain_identity_check(9, 0, gamma=2.5 + 1e-3)


def test_chain_identity_numbers():
    k = constants(9, 0)
    assert k.rellich2_rem + 81 * 2.5 * 8 / 4 == 630 == k.rellich1_rem


def test_chain_identity_precondition():
    with pytest.raises(HypothesisError):
        chain_identity_check(8, 0)


@given(n=st.integers(3, 40), a=st.floats(-3, 1.99))
def test_chain_identity_random(n, a):
    if n - 8 + 3 * a > 0:
        assert chain_identity_check(n, a)


def test_which_parsing():
    assert Which.parse("Rellich-II") is Which.RELLICH2
    with pytest.raises(DomainError):
        Which.parse("poincare")


# ---------------------------------------------------------------- instances
@pytest.mark.parametrize("which,n,alpha", [("rellich2", 8, 0.0), ("rellich1", 5, 2.0),
                                           ("rellich1", 4, 0.0), ("hardy", 2, -0.5)])
def test_hypothesis_violation_reported(which, n, alpha):
    with pytest.raises(HypothesisError):
        InequalityInstance(ModelSpace.flat(n), BUMP, alpha, which)


def test_profile_must_be_compact():
    with pytest.raises(DomainError):
        InequalityInstance(ModelSpace.flat(5), RadialProfile.power(1.0), 0.0, "hardy")


# ---------------------------------------------------------------- reports
def suite_cases():
    for n, a, c, w in itertools.product((5, 9, 11), (0.0, 1.0), (0.0, -1.0, -4.0), list(Which)):
        if hypothesis_holds(w, n, a):
            yield n, a, c, w


@pytest.mark.parametrize("n,a,c,w", list(suite_cases()))
def test_inequality_holds_on_bump(n, a, c, w):
    rep = report(InequalityInstance(space(n, c), BUMP, a, w))
    assert rep.converged
    assert rep.margin >= -10 * rep.quadrature_error
    # the bump is not extremal, so the inequalities are strict
    assert rep.margin > 0
    assert rep.margin == pytest.approx(rep.lhs - rep.rhs_main - rep.rhs_remainder)


@pytest.mark.parametrize("w", list(Which))
def test_remainder_vanishes_on_flat(w):
    n = 9
    rep = report(InequalityInstance(ModelSpace.flat(n), BUMP, 0.0, w))
    assert rep.rhs_remainder == 0.0


@pytest.mark.parametrize("n,a,w", [(5, 0.0, "hardy"), (5, 1.0, "rellich1"), (9, 0.0, "rellich2"),
                                   (11, 1.0, "rellich2"), (9, 1.0, "hardy")])
def test_remainder_monotone_in_curvature(n, a, w):
    rem = [report(InequalityInstance(space(n, c), BUMP, a, w)).rhs_remainder for c in CURVATURES]
    assert rem[0] == 0.0
    assert np.all(np.diff(rem) > 0)


def test_specific_report_functions_dispatch():
    sp = ModelSpace.hyperbolic(9, -1.0)
    inst = InequalityInstance(sp, BUMP, 0.0, "rellich1")
    assert hardy_report(inst).which == "hardy"
    assert rellich1_report(inst).which == "rellich1"
    assert rellich2_report(inst).which == "rellich2"


def test_curvature_lowers_margin_for_rellich1():
    base = rellich1_report(InequalityInstance(ModelSpace.flat(5), BUMP, 0.0))
    hyp = rellich1_report(InequalityInstance(ModelSpace.hyperbolic(5, -1.0), BUMP, 0.0))
    assert hyp.rhs_remainder > base.rhs_remainder
    assert hyp.passed and base.passed


def test_explicit_remainder_is_weaker_but_valid():
    inst = InequalityInstance(ModelSpace.hyperbolic(9, -1.0), BUMP, 0.0, "rellich2")
    full, expl = report(inst), report(inst, explicit=True)
    assert 0 < expl.rhs_remainder < full.rhs_remainder
    assert expl.passed
    with pytest.raises(DomainError):
        report(InequalityInstance(ModelSpace.hyperbolic(9, -1.0), BUMP, 1.0, "rellich2"), explicit=True)


def test_report_serialization():
    rep = report(InequalityInstance(ModelSpace.hyperbolic(9, -1.0), BUMP, 1.0, "rellich2"))
    rec = rep.to_record()
    assert list(rec)[:10] == ["which", "n", "alpha", "c", "geometry", "lhs", "rhs_main",
                              "rhs_remainder", "margin", "quad_error"]
    assert len(rep.csv_row()) == len(REPORT_COLUMNS)
    assert rec["constants"]["gamma"] == 3.0


def test_flat_reports_are_norm_independent():
    a = report(InequalityInstance(ModelSpace.flat(5), BUMP, 0.0, "rellich1"))
    b = report(InequalityInstance(ModelSpace.flat(5, MinkowskiNorm.pnorm(4, 5)), BUMP, 0.0, "rellich1"))
    assert a.lhs == b.lhs and a.rhs_main == b.rhs_main


def test_hardy_on_pure_power_matches_closed_form():
    # u = (1 - rho^2)^4: check one integral independently with polynomial algebra
    n = 5
    rep = hardy_report(InequalityInstance(ModelSpace.flat(n), BUMP, 0.0, "hardy"))
    P = np.polynomial.Polynomial
    f1 = P([0, -8]) * P([1, 0, -1]) ** 3
    omega = 8 * math.pi**2 / 15
    lhs = n * omega * (f1**2 * P([0, 0, 0, 0, 1])).integ()(1.0)
    assert rep.lhs == pytest.approx(lhs, rel=1e-12)


# ---------------------------------------------------------------- annulus
@pytest.mark.parametrize("n", [5, 9])
@pytest.mark.parametrize("a", [0.0, 0.5])
def test_annulus_ratio_rellich1(n, a):
    ratio, err = annulus_ratio(ModelSpace.flat(n), "rellich1", a)
    g = (n - 4 + a) / 2
    assert ratio == pytest.approx(g**2 * (n - a) ** 2 / 4, rel=1e-9)
    assert err < 1e-9


@pytest.mark.parametrize("n", [9, 11])
@pytest.mark.parametrize("a", [0.0, 0.5])
def test_annulus_ratio_rellich2(n, a):
    ratio, _ = annulus_ratio(ModelSpace.flat(n), "rellich2", a)
    assert ratio == pytest.approx((n - a) ** 2 / 4, rel=1e-9)


def test_annulus_ratio_needs_flat():
    with pytest.raises(DomainError):
        annulus_ratio(ModelSpace.hyperbolic(5, -1.0), "rellich1", 0.0)


# ---------------------------------------------------------------- Green deflection
def random_profile(seed):
    return RadialProfile.even_polynomial_bump(np.random.default_rng(seed).normal(size=4))


@pytest.mark.parametrize("sp", [ModelSpace.flat(5, MinkowskiNorm.pnorm(4, 5)), ModelSpace.hyperbolic(5, -1.0),
                                ModelSpace.hyperbolic(9, -4.0)], ids=lambda s: s.describe())
@pytest.mark.parametrize("a", [0.0, 1.0])
@pytest.mark.parametrize("seed", range(3))
def test_green_deflection_vanishes(sp, a, seed):
    g = green_deflection(sp, random_profile(seed), a)
    assert abs(g.value) <= 1e-6 * g.scale
    assert g.vanishes()


def test_green_deflection_of_zero():
    zero = RadialProfile(np.zeros_like, np.zeros_like, np.zeros_like, support_radius=1.0)
    g = green_deflection(ModelSpace.flat(5), zero, 0.0)
    assert g.value == 0.0 and g.term1 == 0.0 and g.term2 == 0.0


def test_green_deflection_precondition():
    with pytest.raises(HypothesisError):
        green_deflection(ModelSpace.flat(5), BUMP, -1.0)


@pytest.mark.parametrize("sp", [ModelSpace.flat(5), ModelSpace.hyperbolic(7, -2.0)], ids=lambda s: s.describe())
def test_product_rule_for_laplacian_of_square(sp):
    rho = np.random.default_rng(0).uniform(0.01, 0.99, 50)
    assert product_rule_residual(sp, random_profile(3), rho) <= 1e-8


# ---------------------------------------------------------------- chain
@pytest.mark.parametrize("n,a,c", [(9, 0.0, 0.0), (9, 0.0, -1.0), (11, 1.0, -4.0), (10, 0.5, -0.25)])
def test_chain_consistency(n, a, c):
    chk = chain_consistency(space(n, c), BUMP, a)
    assert chk.passed
    # the constants make the chained bound agree with Rellich I's right side
    assert chk.chained_rhs == pytest.approx(chk.rellich1_rhs, rel=1e-8)
    assert chk.rellich2_rhs >= chk.chained_rhs - 10 * chk.quadrature_error
