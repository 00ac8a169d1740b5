"""Hot numerical kernels with interchangeable numba and numpy backends.

The backend is chosen once at import time. Set ``RELLICHKIT_DISABLE_NUMBA=1``
to force the pure-numpy path; it is also used automatically when numba cannot
be imported. Both backends expose the same functions with the same signatures:

``extremal_profile(rho, eps, eta, gamma, r, R, cutoff_order)``
    Values and first two derivatives of the mollified, cut-off truncated power.
``power_legendre_refine(xi, y0, p, w, tol, xtol, maxiter)``
    Damped Newton refinement of the Legendre dual of a weighted l^p norm.
``power_ball_count(points, p, w)``
    Number of rows of ``points`` inside the open unit ball of a weighted l^p norm.
"""

import os

from . import _numpy as numpy_backend

_FALSEY = {"", "0", "false", "no", "off"}


def _numba_disabled():
    return os.environ.get("RELLICHKIT_DISABLE_NUMBA", "").strip().lower() not in _FALSEY


numba_backend = None
if not _numba_disabled():
    try:
        from . import _numba as numba_backend
    except ImportError:  # pragma: no cover - numba is a declared dependency
        numba_backend = None

backend = numba_backend if numba_backend is not None else numpy_backend
BACKEND = "numba" if backend is numba_backend else "numpy"

extremal_profile = backend.extremal_profile
power_legendre_refine = backend.power_legendre_refine
power_ball_count = backend.power_ball_count

__all__ = [
    "BACKEND",
    "backend",
    "numpy_backend",
    "numba_backend",
    "extremal_profile",
    "power_legendre_refine",
    "power_ball_count",
]
