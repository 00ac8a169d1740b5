import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rellichkit.duality import (
    DualNorm,
    k_deflection,
    legendre,
    legendre_dual,
    polar_transform,
    riemannian_probe,
)
from rellichkit.errors import DomainError
from rellichkit.norms import MinkowskiNorm

from .conftest import CATALOG_IDS, catalog

vec3 = arrays(float, 3, elements=st.floats(-5, 5)).filter(lambda y: np.max(np.abs(y)) > 1e-2)


def dual_power_oracle(xi, p, w):
    """Closed-form polar of the weighted l^p norm: l^q with weights w^(1-q)."""
    q = p / (p - 1)
    return (np.sum(np.asarray(w) ** (1 - q) * np.abs(xi) ** q, axis=-1)) ** (1 / q)


def brute_force_polar(norm, xi, m=200_000, seed=0):
    y = np.random.default_rng(seed).standard_normal((m, norm.dimension))
    return float(np.max(y @ xi / norm.evaluate(y)))


# ---------------------------------------------------------------- polar
def test_euclidean_self_dual():
    assert polar_transform(MinkowskiNorm.euclidean(2), [3.0, 4.0]) == pytest.approx(5.0, rel=1e-15)


@pytest.mark.parametrize("method", ["oracle", "numeric"])
def test_pnorm4_polar_at_ones(method):
    val = polar_transform(MinkowskiNorm.pnorm(4, 2), [1.0, 1.0], method=method)
    assert val == pytest.approx(2 ** 0.75, rel=1e-10)


def test_anisotropic_polar_closed_form():
    norm = MinkowskiNorm.anisotropic(np.diag([4.0, 1.0]))
    assert polar_transform(norm, [2.0, 0.0]) == pytest.approx(1.0, rel=1e-15)
    assert polar_transform(norm, [2.0, 0.0], method="numeric") == pytest.approx(1.0, rel=1e-10)


@pytest.mark.parametrize("name", CATALOG_IDS)
def test_numeric_polar_agrees_with_brute_force(name):
    norm = catalog(3)[name]
    xi = np.array([0.3, -1.2, 0.7])
    got = polar_transform(norm, xi, method="numeric")
    brute = brute_force_polar(norm, xi)
    assert brute <= got * (1 + 1e-12)
    assert got == pytest.approx(brute, rel=3e-3)


def test_quartic_numeric_matches_closed_form():
    w = np.array([1.0, 2.0, 0.5])
    norm = MinkowskiNorm.quartic(w)
    xi = np.random.default_rng(5).standard_normal((50, 3))
    np.testing.assert_allclose(polar_transform(norm, xi), dual_power_oracle(xi, 4.0, w), rtol=1e-10)


@pytest.mark.parametrize("name", CATALOG_IDS)
@given(xi=vec3, t=st.floats(-20, 20).filter(lambda t: abs(t) > 1e-2))
def test_polar_homogeneity_and_symmetry(name, xi, t):
    norm = catalog(3)[name]
    base = polar_transform(norm, xi)
    assert polar_transform(norm, t * xi) == pytest.approx(abs(t) * base, rel=1e-9)
    assert polar_transform(norm, -xi) == pytest.approx(base, rel=1e-9)


def test_zero_covector_rejected(any_norm):
    with pytest.raises(DomainError):
        polar_transform(any_norm, np.zeros(3))
    with pytest.raises(DomainError):
        legendre_dual(any_norm, np.zeros(3))


def test_unknown_method_rejected():
    with pytest.raises(DomainError):
        polar_transform(MinkowskiNorm.euclidean(2), [1.0, 0.0], method="simplex")


def test_oracle_method_needs_an_oracle():
    with pytest.raises(DomainError):
        polar_transform(MinkowskiNorm.quartic([1.0, 1.0]), [1.0, 0.0], method="oracle")


# ---------------------------------------------------------------- Legendre
def test_euclidean_legendre_dual():
    np.testing.assert_allclose(legendre_dual(MinkowskiNorm.euclidean(2), [3.0, 4.0]), [3.0, 4.0])


@pytest.mark.parametrize("method", ["oracle", "numeric"])
def test_axis_covector_is_fixed_direction(method):
    y = legendre_dual(MinkowskiNorm.pnorm(4, 2), [1.0, 0.0], method=method)
    # the maximizer is ill-conditioned along the axis, hence the looser check
    np.testing.assert_allclose(y, [1.0, 0.0], atol=1e-4)


@pytest.mark.parametrize("name", CATALOG_IDS)
def test_duality_identities(name):
    norm = catalog(3)[name]
    xi = np.random.default_rng(6).standard_normal((100, 3))
    y = legendre_dual(norm, xi)
    Fs = polar_transform(norm, xi)
    Fy = norm.evaluate(y)
    assert np.all(np.abs(Fy - Fs) <= 1e-8 * Fs)
    assert np.all(np.abs((xi * y).sum(axis=1) - Fy * Fs) <= 1e-8 * Fs**2)


@pytest.mark.parametrize("name", CATALOG_IDS)
def test_legendre_round_trip(name):
    norm = catalog(3)[name]
    xi = np.random.default_rng(7).standard_normal((50, 3))
    np.testing.assert_allclose(legendre(norm, legendre_dual(norm, xi)), xi, rtol=1e-8, atol=1e-8)
    y = np.random.default_rng(8).standard_normal((50, 3))
    np.testing.assert_allclose(legendre_dual(norm, legendre(norm, y)), y, rtol=1e-7, atol=1e-8)


@pytest.mark.parametrize("name", ["pnorm4", "quartic", "anisotropic"])
def test_biduality(name):
    norm = catalog(3)[name]
    y = np.random.default_rng(9).standard_normal((10, 3))
    bidual = polar_transform(DualNorm(norm), y, method="numeric")
    np.testing.assert_allclose(bidual, norm.evaluate(y), rtol=1e-6)


# ---------------------------------------------------------------- K_F
def test_kf_vanishes_for_anisotropic():
    norm = catalog(3)["anisotropic"]
    rng = np.random.default_rng(10)
    y, xi = rng.standard_normal((2, 50, 3))
    assert np.max(np.abs(k_deflection(norm, y, xi))) < 1e-8


def test_kf_vanishes_at_legendre_pair(any_norm):
    y = np.random.default_rng(11).standard_normal((20, 3))
    kf = k_deflection(any_norm, y, legendre(any_norm, y))
    assert np.max(np.abs(kf)) <= 1e-8 * np.max(any_norm.evaluate(y) ** 2)


def test_kf_nonzero_for_l4():
    kf = k_deflection(MinkowskiNorm.pnorm(4, 2), [1.0, 0.0], [1.0, 1.0])
    assert abs(kf) > 1e-3
    # independent value: J(1,0) = (1,0), and J*(1,1) = F*^(2-q) (1,1) = sqrt(2) (1,1)
    assert kf == pytest.approx(1.0 - 2 ** 0.5, rel=1e-9)


@pytest.mark.parametrize("name", CATALOG_IDS)
def test_kf_scaling_regression(name):
    norm = catalog(3)[name]
    y, xi = np.array([0.4, -1.0, 0.3]), np.array([1.1, 0.2, -0.5])
    t, s = 2.5, 0.3
    direct = t * s * xi @ y - norm.derivative(t * y) @ legendre_dual(norm, s * xi)
    assert k_deflection(norm, t * y, s * xi) == pytest.approx(direct, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("name,expected", [("euclidean", True), ("anisotropic", True),
                                           ("pnorm4", False), ("quartic", False)])
def test_riemannian_probe(n, name, expected):
    res = riemannian_probe(catalog(n)[name], samples=1000, seed=7)
    assert res.verdict is expected
    assert res.to_record()["samples"] == 1000


def test_probe_threshold_uses_scale():
    res = riemannian_probe(MinkowskiNorm.pnorm(4, 2), samples=200, seed=1)
    assert res.max_abs_kf > 1e-7 * res.scale


def test_probe_needs_samples():
    with pytest.raises(DomainError):
        riemannian_probe(MinkowskiNorm.euclidean(2), samples=99)


def test_probe_is_deterministic():
    a = riemannian_probe(MinkowskiNorm.quartic([1.0, 2.0]), samples=300, seed=4)
    b = riemannian_probe(MinkowskiNorm.quartic([1.0, 2.0]), samples=300, seed=4)
    assert a == b


def test_higher_dimension_numeric_dual():
    norm = MinkowskiNorm.quartic(np.linspace(1, 3, 6))
    xi = np.random.default_rng(12).standard_normal((20, 6))
    np.testing.assert_allclose(polar_transform(norm, xi), dual_power_oracle(xi, 4.0, norm.weights), rtol=1e-10)
