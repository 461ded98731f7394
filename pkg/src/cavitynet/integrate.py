"""Embedded Dormand-Prince 5(4) integrator for small dense complex systems.

Written out here rather than taken from ``scipy.integrate.solve_ivp`` so the
caller can inspect every accepted step (the transfer code checks norm
monotonicity there) and gets a typed error on step underflow.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import IntegrationError, NumericError

# Butcher tableau (Dormand & Prince 1980), FSAL.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [np.array(row) for row in (
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
)]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_EPS = np.finfo(float).eps


@dataclass
class IntegrationStats:
    n_accepted: int = 0
    n_rejected: int = 0
    n_rhs: int = 0


def integrate(rhs, t0, t1, y0, *, rtol=1e-8, atol=1e-10, max_step=np.inf,
              first_step=None, max_steps=1_000_000, on_step=None):
    """Integrate ``dy/dt = rhs(t, y)`` from ``t0`` to ``t1``.

    Parameters
    ----------
    rhs : callable
        ``rhs(t, y) -> ndarray`` with the shape and dtype of ``y``.
    t0, t1 : float
        Integration window, ``t1 > t0``.
    y0 : array_like
        Initial state; complex input is integrated as complex.
    rtol, atol : float
        Mixed error tolerance applied elementwise to ``|y|``.
    max_step : float
        Upper bound on the step size.
    on_step : callable, optional
        Called as ``on_step(t, y)`` after every accepted step. May raise.

    Returns
    -------
    y : ndarray
        State at ``t1``.
    stats : IntegrationStats
    """
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")

    y = np.array(y0, dtype=np.result_type(np.asarray(y0).dtype, float), copy=True)
    stats = IntegrationStats()
    span = t1 - t0
    max_step = min(max_step, span)

    k = np.empty((7,) + y.shape, dtype=y.dtype)
    k[0] = rhs(t0, y)
    stats.n_rhs += 1

    if first_step is None:
        scale = atol + rtol * np.abs(y)
        d0 = np.sqrt(np.mean(np.abs(y / scale) ** 2))
        d1 = np.sqrt(np.mean(np.abs(k[0] / scale) ** 2))
        h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6 * span
    else:
        h = first_step
    h = min(h, max_step)

    t = t0
    while t < t1:
        if stats.n_accepted + stats.n_rejected >= max_steps:
            raise IntegrationError(
                f"exceeded {max_steps} steps at t={t:.6g}", t=t, h=h,
                n_steps=stats.n_accepted)
        if h < 16 * _EPS * max(abs(t), span):
            raise IntegrationError(
                f"step size underflow (h={h:.3g}) at t={t:.6g}", t=t, h=h,
                n_steps=stats.n_accepted)
        last = t + h >= t1
        if last:
            h = t1 - t

        for i in range(1, 7):
            dy = h * (_A[i] @ k[:i])
            k[i] = rhs(t + _C[i] * h, y + dy)
        stats.n_rhs += 6
        y_new = y + h * (_B5[:6] @ k[:6])
        err_vec = h * (_E @ k)

        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        r = err_vec / scale
        err = math.sqrt(float(np.vdot(r, r).real) / r.size)
        if not np.isfinite(err):
            raise NumericError(f"non-finite state encountered at t={t:.6g}")

        if err <= 1.0:
            t = t1 if last else t + h
            y = y_new
            k[0] = k[6]
            stats.n_accepted += 1
            if on_step is not None:
                on_step(t, y)
            factor = _MAX_FACTOR if err == 0 else min(_MAX_FACTOR, _SAFETY * err ** -0.2)
            h = min(h * factor, max_step)
        else:
            stats.n_rejected += 1
            h *= max(_MIN_FACTOR, _SAFETY * err ** -0.2)

    return y, stats
