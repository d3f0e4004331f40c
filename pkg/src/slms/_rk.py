"""Compiled Dormand-Prince 5(4) marcher for u'' = (q(x) - lam) u.

The state is (u, u'); ``stops`` is a monotone array of abscissae (increasing
or decreasing) at which the integration halts exactly and the state is
recorded.  Between ``stops[i]`` and ``stops[i+1]`` the potential is the
polynomial ``coef[seg[i]]`` in ``x - origin[seg[i]]``.  The same code runs on
float64 and complex128 state, so complex-step differentiation in lam goes
through the identical step sequence.
"""

import numpy as np
from numba import njit

# Dormand & Prince (1980) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# 5th minus embedded 4th order weights
E1, E3, E4, E5, E6, E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
MAX_STEPS = 10_000_000


@njit(cache=True)
def _q(x, c, x0):
    t = x - x0
    out = 0.0
    for j in range(c.shape[0] - 1, -1, -1):
        out = out * t + c[j]
    return out


@njit(cache=True)
def march(y0, lam, stops, seg, coef, origin, rtol, atol, h_init):
    """Integrate through ``stops``; returns (states[n, 2], status, steps).

    status 0 ok, 1 step-size underflow, 2 non-finite state, 3 step budget.
    """
    n = stops.shape[0]
    out = np.empty((n, 2), dtype=y0.dtype)
    u = y0[0]
    v = y0[1]
    out[0, 0] = u
    out[0, 1] = v
    total = 0
    span = abs(stops[n - 1] - stops[0])
    h_abs = h_init if h_init > 0 else span / 64.0
    if h_abs <= 0:
        h_abs = 1e-3
    for i in range(n - 1):
        x = stops[i]
        x_end = stops[i + 1]
        direction = 1.0 if x_end >= x else -1.0
        c = coef[seg[i]]
        x0 = origin[seg[i]]
        while direction * (x_end - x) > 0:
            h_min = 16.0 * np.spacing(abs(x) + 1.0)
            last = False
            if h_abs >= abs(x_end - x):
                h_abs_try = abs(x_end - x)
                last = True
            else:
                h_abs_try = h_abs
            h = direction * h_abs_try
            # stages; state derivative is (v, (q - lam) u)
            k1u = v
            k1v = (_q(x, c, x0) - lam) * u
            uu = u + h * A21 * k1u
            vv = v + h * A21 * k1v
            k2u = vv
            k2v = (_q(x + C2 * h, c, x0) - lam) * uu
            uu = u + h * (A31 * k1u + A32 * k2u)
            vv = v + h * (A31 * k1v + A32 * k2v)
            k3u = vv
            k3v = (_q(x + C3 * h, c, x0) - lam) * uu
            uu = u + h * (A41 * k1u + A42 * k2u + A43 * k3u)
            vv = v + h * (A41 * k1v + A42 * k2v + A43 * k3v)
            k4u = vv
            k4v = (_q(x + C4 * h, c, x0) - lam) * uu
            uu = u + h * (A51 * k1u + A52 * k2u + A53 * k3u + A54 * k4u)
            vv = v + h * (A51 * k1v + A52 * k2v + A53 * k3v + A54 * k4v)
            k5u = vv
            k5v = (_q(x + C5 * h, c, x0) - lam) * uu
            uu = u + h * (A61 * k1u + A62 * k2u + A63 * k3u + A64 * k4u + A65 * k5u)
            vv = v + h * (A61 * k1v + A62 * k2v + A63 * k3v + A64 * k4v + A65 * k5v)
            k6u = vv
            k6v = (_q(x + h, c, x0) - lam) * uu
            un = u + h * (B1 * k1u + B3 * k3u + B4 * k4u + B5 * k5u + B6 * k6u)
            vn = v + h * (B1 * k1v + B3 * k3v + B4 * k4v + B5 * k5v + B6 * k6v)
            k7u = vn
            k7v = (_q(x + h, c, x0) - lam) * un
            eu = h * (E1 * k1u + E3 * k3u + E4 * k4u + E5 * k5u + E6 * k6u + E7 * k7u)
            ev = h * (E1 * k1v + E3 * k3v + E4 * k4v + E5 * k5v + E6 * k6v + E7 * k7v)
            su = atol + rtol * max(abs(u), abs(un))
            sv = atol + rtol * max(abs(v), abs(vn))
            err = np.sqrt(0.5 * ((abs(eu) / su) ** 2 + (abs(ev) / sv) ** 2))
            total += 1
            if total > MAX_STEPS:
                return out, 3, total
            if not np.isfinite(err):
                if h_abs_try <= h_min:
                    return out, 2, total
                h_abs = h_abs_try * MIN_FACTOR
                continue
            if err <= 1.0:
                if last:
                    x = x_end
                else:
                    x = x + h
                u = un
                v = vn
                if err == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = min(MAX_FACTOR, SAFETY * err ** -0.2)
                # a step truncated to hit a stop must not shrink the carried size
                if not last or h_abs_try * factor > h_abs:
                    h_abs = h_abs_try * factor
            else:
                if h_abs_try <= h_min:
                    return out, 1, total
                h_abs = h_abs_try * max(MIN_FACTOR, SAFETY * err ** -0.2)
        out[i + 1, 0] = u
        out[i + 1, 1] = v
    return out, 0, total
