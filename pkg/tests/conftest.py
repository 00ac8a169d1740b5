import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rellichkit.duality import legendre_dual
from rellichkit.model_spaces import RadialProfile
from rellichkit.norms import MinkowskiNorm

settings.register_profile(
    "default", deadline=None, max_examples=40, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def catalog(n=3):
    """One instance of every catalog norm kind in dimension n."""
    rng = np.random.default_rng(100 + n)
    B = rng.standard_normal((n, n))
    return {
        "euclidean": MinkowskiNorm.euclidean(n),
        "anisotropic": MinkowskiNorm.anisotropic(B @ B.T + n * np.eye(n)),
        "pnorm4": MinkowskiNorm.pnorm(4, n),
        "pnorm3": MinkowskiNorm.pnorm(3, n),
        "quartic": MinkowskiNorm.quartic(np.linspace(1.0, 2.0, n)),
    }


CATALOG_IDS = list(catalog())


@pytest.fixture(params=CATALOG_IDS)
def any_norm(request):
    return catalog(3)[request.param]


def fd_gradient(fun, y, h=1e-6):
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    for i in range(y.size):
        e = np.zeros_like(y)
        e[i] = h
        out[i] = (fun(y + e) - fun(y - e)) / (2 * h)
    return out


def fd_hessian(fun, y, h=1e-4):
    y = np.asarray(y, dtype=float)
    n = y.size
    H = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = h
            ej[j] = h
            H[i, j] = (fun(y + ei + ej) - fun(y + ei - ej) - fun(y - ei + ej) + fun(y - ei - ej)) / (4 * h * h)
    return H


def random_profile(seed):
    return RadialProfile.even_polynomial_bump(np.random.default_rng(seed).normal(size=4))


def fd_finsler_laplacian(norm, profile, x, h):
    """div J*(Du) by central differences; Du itself by central differences of u."""
    n = x.size
    eye = np.eye(n)

    def u(p):
        return profile(norm.evaluate(p))

    def grad(p):
        return np.array([(u(p + h * e) - u(p - h * e)) / (2 * h) for e in eye])

    def field(p):
        return legendre_dual(norm, grad(p))

    return sum((field(x + h * e)[i] - field(x - h * e)[i]) / (2 * h) for i, e in enumerate(eye))


def sample_points(n, count, seed):
    rng = np.random.default_rng(seed)
    pts = []
    norm = MinkowskiNorm.pnorm(4, n)
    while len(pts) < count:
        x = rng.uniform(-0.7, 0.7, n)
        # stay off coordinate hyperplanes, where J* of the l^(4/3) norm is not smooth
        if np.min(np.abs(x)) > 0.15 and 0.25 < norm.evaluate(x) < 0.8:
            pts.append(x)
    return np.array(pts)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[key])
