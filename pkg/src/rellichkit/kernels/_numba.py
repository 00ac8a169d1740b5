"""numba-compiled kernels; same contracts as :mod:`._numpy`."""

import math

import numpy as np
from numba import njit

_EPS = float(np.finfo(np.float64).eps)


@njit(cache=True)
def _smoothstep(t, order):
    if t <= 0.0:
        return 0.0, 0.0, 0.0
    if t >= 1.0:
        return 1.0, 0.0, 0.0
    u = 1.0 - t
    if order == 5:
        return (t**3 * (10.0 + t * (-15.0 + 6.0 * t)),
                30.0 * t * t * u * u,
                60.0 * t * u * (1.0 - 2.0 * t))
    return (t**4 * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t))),
            140.0 * t**3 * u**3,
            420.0 * t * t * u * u * (1.0 - 2.0 * t))


@njit(cache=True)
def _extremal_profile(rho, eps, eta, gamma, r, R, cutoff_order):
    n = rho.size
    f = np.zeros(n)
    f1 = np.zeros(n)
    f2 = np.zeros(n)
    plateau = eps**-gamma
    width = 2.0 * eta
    w = R - r
    for i in range(n):
        x = rho[i]
        if x >= R:
            continue
        if x <= eps - eta:
            m, m1, m2 = plateau, 0.0, 0.0
        else:
            p0 = x**-gamma
            p1 = -gamma * p0 / x
            p2 = gamma * (gamma + 1.0) * p0 / (x * x)
            if x >= eps + eta:
                m, m1, m2 = p0, p1, p2
            else:
                s, s1, s2 = _smoothstep((x - (eps - eta)) / width, 5)
                d = p0 - plateau
                m = plateau + s * d
                m1 = s1 / width * d + s * p1
                m2 = s2 / (width * width) * d + 2.0 * s1 / width * p1 + s * p2
        if x <= r:
            f[i], f1[i], f2[i] = m, m1, m2
        else:
            c, c1, c2 = _smoothstep((x - r) / w, cutoff_order)
            psi = 1.0 - c
            psi1 = -c1 / w
            psi2 = -c2 / (w * w)
            f[i] = m * psi
            f1[i] = m1 * psi + m * psi1
            f2[i] = m2 * psi + 2.0 * m1 * psi1 + m * psi2
    return f, f1, f2


def extremal_profile(rho, eps, eta, gamma, r, R, cutoff_order):
    rho = np.asarray(rho, dtype=float)
    shape = rho.shape
    f, f1, f2 = _extremal_profile(np.ascontiguousarray(rho.ravel()), float(eps), float(eta),
                                  float(gamma), float(r), float(R), int(cutoff_order))
    return f.reshape(shape), f1.reshape(shape), f2.reshape(shape)


@njit(cache=True)
def _power_parts(y, p, w, J, g):
    n = y.size
    s = 0.0
    for i in range(n):
        s += w[i] * abs(y[i]) ** p
    F = s ** (1.0 / p)
    c1 = F ** (2.0 - p)
    c2 = (2.0 - p) * F ** (2.0 - 2.0 * p)
    for i in range(n):
        a = abs(y[i])
        vi = w[i] * a ** (p - 2.0) * y[i]
        J[i] = c1 * vi
        for j in range(n):
            vj = w[j] * abs(y[j]) ** (p - 2.0) * y[j]
            g[i, j] = c2 * vi * vj
        g[i, i] += (p - 1.0) * c1 * w[i] * a ** (p - 2.0)
    return F


@njit(cache=True)
def _power_legendre_refine(xi, y0, p, w, tol, xtol, maxiter):
    N, n = xi.shape
    y = y0.copy()
    conv = np.zeros(N, dtype=np.bool_)
    J = np.empty(n)
    g = np.empty((n, n))
    Jt = np.empty(n)
    gt = np.empty((n, n))
    res = np.empty(n)
    yt = np.empty(n)
    for k in range(N):
        x = xi[k]
        yk = y[k]
        xn = math.sqrt((x * x).sum())
        mu = 1e-10
        last = np.inf
        for _ in range(maxiter):
            F = _power_parts(yk, p, w, J, g)
            for i in range(n):
                res[i] = x[i] - J[i]
            rn = math.sqrt((res * res).sum())
            yn = math.sqrt((yk * yk).sum())
            if rn <= tol * xn and (last <= xtol * yn or rn <= max(1e-3 * tol, 8.0 * _EPS) * xn):
                conv[k] = True
                break
            scale = 0.0
            for i in range(n):
                scale += g[i, i]
            scale /= n
            A = g.copy()
            for i in range(n):
                A[i, i] += mu * scale
            delta = np.linalg.solve(A, res)
            for i in range(n):
                yt[i] = yk[i] + delta[i]
            Ft = _power_parts(yt, p, w, Jt, gt)
            better = False
            if Ft > 0.0:
                rt = 0.0
                for i in range(n):
                    rt += (x[i] - Jt[i]) ** 2
                rt = math.sqrt(rt)
                phi = (x * yk).sum() - 0.5 * F * F
                phit = (x * yt).sum() - 0.5 * Ft * Ft
                descent = 0.0
                for i in range(n):
                    descent += res[i] * delta[i]
                armijo = phit - phi >= 1e-4 * descent
                better = armijo or (rn <= 1e-7 * xn and rt <= rn)
            if better:
                for i in range(n):
                    yk[i] = yt[i]
                last = math.sqrt((delta * delta).sum())
                mu = max(mu * 0.1, 1e-14)
            else:
                mu *= 10.0
                if mu > 1e12:
                    last = np.inf
    return y, conv


def power_legendre_refine(xi, y0, p, w, tol, xtol, maxiter):
    xi = np.ascontiguousarray(xi, dtype=np.float64)
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    return _power_legendre_refine(xi, y0, float(p), w, float(tol), float(xtol), int(maxiter))


@njit(cache=True)
def _power_ball_count(points, p, w):
    N, n = points.shape
    count = 0
    for k in range(N):
        s = 0.0
        for i in range(n):
            s += w[i] * abs(points[k, i]) ** p
        if s < 1.0:
            count += 1
    return count


def power_ball_count(points, p, w):
    return int(_power_ball_count(np.ascontiguousarray(points, dtype=np.float64), float(p),
                                 np.ascontiguousarray(w, dtype=np.float64)))
