"""Pure-numpy implementations of the hot kernels (reference path)."""

import numpy as np

_EPS = np.finfo(float).eps


def smoothstep(t, order):
    """Smoothstep of the given odd order (5 or 7) and its two derivatives.

    ``t`` is clipped to [0, 1]; the quintic is C^2 and the septic C^3 at the
    endpoints.
    """
    t = np.clip(t, 0.0, 1.0)
    if order == 5:
        s = t**3 * (10.0 + t * (-15.0 + 6.0 * t))
        s1 = 30.0 * t**2 * (1.0 - t) ** 2
        s2 = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)
    elif order == 7:
        s = t**4 * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)))
        s1 = 140.0 * t**3 * (1.0 - t) ** 3
        s2 = 420.0 * t**2 * (1.0 - t) ** 2 * (1.0 - 2.0 * t)
    else:
        raise ValueError(f"unsupported smoothstep order {order}")
    return s, s1, s2


def extremal_profile(rho, eps, eta, gamma, r, R, cutoff_order):
    rho = np.asarray(rho, dtype=float)
    # truncated power max(eps, rho)^(-gamma) with the kink blended on [eps-eta, eps+eta]
    safe = np.maximum(rho, eps - eta)
    p0 = safe**-gamma
    p1 = -gamma * safe ** (-gamma - 1.0)
    p2 = gamma * (gamma + 1.0) * safe ** (-gamma - 2.0)
    plateau = eps**-gamma
    width = 2.0 * eta
    s, s1, s2 = smoothstep((rho - (eps - eta)) / width, 5)
    diff = p0 - plateau
    m = plateau + s * diff
    m1 = s1 / width * diff + s * p1
    m2 = s2 / width**2 * diff + 2.0 * s1 / width * p1 + s * p2

    w = R - r
    c, c1, c2 = smoothstep((rho - r) / w, cutoff_order)
    psi = 1.0 - c
    psi1 = -c1 / w
    psi2 = -c2 / w**2

    f = m * psi
    f1 = m1 * psi + m * psi1
    f2 = m2 * psi + 2.0 * m1 * psi1 + m * psi2
    outside = rho >= R
    f = np.where(outside, 0.0, f)
    f1 = np.where(outside, 0.0, f1)
    f2 = np.where(outside, 0.0, f2)
    return f, f1, f2


def power_norm_parts(y, p, w):
    """F, J = grad(F^2/2) and the fundamental tensor of a weighted l^p norm."""
    a = np.abs(y)
    s = (w * a**p).sum(axis=-1)
    F = s ** (1.0 / p)
    v = w * a ** (p - 2.0) * y
    Fs = F[..., None]
    J = Fs ** (2.0 - p) * v
    diag = (p - 1.0) * Fs ** (2.0 - p) * w * a ** (p - 2.0)
    g = (2.0 - p) * (Fs ** (2.0 - 2.0 * p))[..., None] * v[..., :, None] * v[..., None, :]
    idx = np.arange(y.shape[-1])
    g[..., idx, idx] += diag
    return F, J, g


def newton_legendre(xi, y0, evaluate, derivative, hessian, tol=1e-13, xtol=1e-11, maxiter=200):
    """Batched damped Newton for argmax_y xi(y) - F(y)^2/2.

    ``evaluate``, ``derivative`` and ``hessian`` act on (N, n) batches. A step is
    accepted when it lowers the residual |xi - J(y)| or raises the objective;
    rejected steps increase the Levenberg damping. A row has converged when the
    residual is below ``tol`` and either the last step is below ``xtol`` or the
    residual is a further 1e3 below ``tol`` or at rounding level (near coordinate
    axes the maximizer is ill-conditioned and steps shrink only linearly).
    Converged rows are frozen.

    Returns the refined batch and a boolean convergence mask.
    """
    xi = np.array(xi, dtype=float)
    y = np.array(y0, dtype=float)
    N, n = xi.shape
    eye = np.eye(n)
    mu = np.full(N, 1e-10)
    done = np.zeros(N, dtype=bool)
    last_step = np.full(N, np.inf)
    xi_norm = np.linalg.norm(xi, axis=1)

    def objective(yy, xx):
        return (xx * yy).sum(axis=1) - 0.5 * evaluate(yy) ** 2

    for _ in range(maxiter):
        act = ~done
        if not act.any():
            break
        ya, xa = y[act], xi[act]
        res = xa - derivative(ya)
        rn = np.linalg.norm(res, axis=1)
        small_step = last_step[act] <= xtol * np.linalg.norm(ya, axis=1)
        floor = max(1e-3 * tol, 8.0 * _EPS)
        fin = (rn <= tol * xi_norm[act]) & (small_step | (rn <= floor * xi_norm[act]))
        idx = np.flatnonzero(act)
        done[idx[fin]] = True
        keep = ~fin
        if not keep.any():
            break
        idx = idx[keep]
        ya, xa, res, rn = ya[keep], xa[keep], res[keep], rn[keep]
        H = hessian(ya)
        scale = np.trace(H, axis1=1, axis2=2) / n
        A = H + (mu[idx] * scale)[:, None, None] * eye
        delta = np.linalg.solve(A, res[..., None])[..., 0]
        yt = ya + delta
        ok = evaluate(yt) > 0.0
        rt = np.full_like(rn, np.inf)
        rt[ok] = np.linalg.norm(xa[ok] - derivative(yt[ok]), axis=1)
        # Armijo ascent on the concave objective; once the residual is at
        # rounding scale the objective stops resolving progress, so fall back
        # to the residual test
        gain = objective(np.where(ok[:, None], yt, ya), xa) - objective(ya, xa)
        armijo = gain >= 1e-4 * (res * delta).sum(axis=1)
        near = rn <= 1e-7 * xi_norm[idx]
        better = ok & (armijo | (near & (rt <= rn)))
        y[idx[better]] = yt[better]
        last_step[idx[better]] = np.linalg.norm(delta[better], axis=1)
        mu[idx[better]] = np.maximum(mu[idx[better]] * 0.1, 1e-14)
        mu[idx[~better]] *= 10.0
        stalled = mu[idx] > 1e12
        last_step[idx[stalled]] = np.inf
    return y, done


def power_legendre_refine(xi, y0, p, w, tol, xtol, maxiter):
    w = np.asarray(w, dtype=float)

    def evaluate(y):
        return power_norm_parts(y, p, w)[0]

    def derivative(y):
        return power_norm_parts(y, p, w)[1]

    def hessian(y):
        return power_norm_parts(y, p, w)[2]

    return newton_legendre(xi, y0, evaluate, derivative, hessian, tol=tol, xtol=xtol, maxiter=maxiter)


def power_ball_count(points, p, w):
    s = (np.asarray(w) * np.abs(points) ** p).sum(axis=1)
    return int(np.count_nonzero(s < 1.0))
