"""Compiled Dormand-Prince loop for the Pruefer angle equation.

State is ``(residual, acc)``: the angle residual kept in ``[0, 2pi)`` with a
separate integer winding, and a smooth-window accumulator of the angle
velocity used for the windowed rotation estimate.
"""

import math

import numba
import numpy as np
from scipy.integrate import quad

TWO_PI = 2.0 * math.pi

OK = 0
STEP_LIMIT = 1
NON_FINITE = 2


@numba.njit(cache=True, nogil=True)
def _bump(t):
    if t <= 0.0 or t >= 1.0:
        return 0.0
    return math.exp(-1.0 / (t * (1.0 - t)))


BUMP_MASS = quad(lambda t: math.exp(-1.0 / (t * (1.0 - t))) if 0 < t < 1 else 0.0, 0.0, 1.0,
                 epsabs=1e-15, epsrel=1e-13)[0]


@numba.njit(cache=True, nogil=True)
def _trig(x, c, om, ca, sa):
    s = c
    for i in range(om.shape[0]):
        ph = om[i] * x
        s += ca[i] * math.cos(ph) + sa[i] * math.sin(ph)
    return s


@numba.njit(cache=True, nogil=True)
def _rhs(x, th, lam, co, wa, wlen, wnorm):
    r = _trig(x, co[0][0], co[0][1], co[0][2], co[0][3])
    q = _trig(x, co[1][0], co[1][1], co[1][2], co[1][3])
    w = _trig(x, co[2][0], co[2][1], co[2][2], co[2][3])
    c = math.cos(th)
    s = math.sin(th)
    dth = r * c * c + (lam * w - q) * s * s
    dacc = 0.0
    if wlen > 0.0:
        dacc = _bump((x - wa) / wlen) * wnorm * dth
    return dth, dacc


@numba.njit(cache=True, nogil=True)
def prufer_advance(lam, co, x0, x1, res, wind, acc, wa, wlen, wnorm, rtol, atol, h, h_max, max_steps):
    """Integrate the angle equation from ``x0`` to ``x1``.

    On ``[wa, wa + wlen]`` the accumulator gathers ``wnorm * bump * theta'``;
    ``wnorm = 1 / (wlen * BUMP_MASS)`` makes it a weighted mean of ``theta'``.

    Returns ``(res, wind, acc, h_next, n_acc, n_rej, n_rhs, status)``.
    """
    a21 = 1.0 / 5.0
    a31 = 3.0 / 40.0; a32 = 9.0 / 40.0
    a41 = 44.0 / 45.0; a42 = -56.0 / 15.0; a43 = 32.0 / 9.0
    a51 = 19372.0 / 6561.0; a52 = -25360.0 / 2187.0; a53 = 64448.0 / 6561.0; a54 = -212.0 / 729.0
    a61 = 9017.0 / 3168.0; a62 = -355.0 / 33.0; a63 = 46732.0 / 5247.0; a64 = 49.0 / 176.0
    a65 = -5103.0 / 18656.0
    b1 = 35.0 / 384.0; b3 = 500.0 / 1113.0; b4 = 125.0 / 192.0; b5 = -2187.0 / 6784.0; b6 = 11.0 / 84.0
    e1 = b1 - 5179.0 / 57600.0; e3 = b3 - 7571.0 / 16695.0; e4 = b4 - 393.0 / 640.0
    e5 = b5 + 92097.0 / 339200.0; e6 = b6 - 187.0 / 2100.0; e7 = -1.0 / 40.0
    c2 = 0.2; c3 = 0.3; c4 = 0.8; c5 = 8.0 / 9.0

    x = x0
    direction = 1.0 if x1 >= x0 else -1.0
    n_acc = 0
    n_rej = 0
    n_rhs = 1
    k1t, k1a = _rhs(x, res, lam, co, wa, wlen, wnorm)
    if h <= 0.0:
        h = min(0.01, h_max)
    while x != x1:
        if n_acc + n_rej >= max_steps:
            return res, wind, acc, h, n_acc, n_rej, n_rhs, STEP_LIMIT
        hh = min(h, h_max)
        last = hh >= abs(x1 - x)
        if last:
            hh = abs(x1 - x)
        hs = direction * hh
        k2t, k2a = _rhs(x + c2 * hs, res + hs * a21 * k1t, lam, co, wa, wlen, wnorm)
        k3t, k3a = _rhs(x + c3 * hs, res + hs * (a31 * k1t + a32 * k2t), lam, co, wa, wlen, wnorm)
        k4t, k4a = _rhs(x + c4 * hs, res + hs * (a41 * k1t + a42 * k2t + a43 * k3t), lam, co, wa, wlen, wnorm)
        k5t, k5a = _rhs(x + c5 * hs, res + hs * (a51 * k1t + a52 * k2t + a53 * k3t + a54 * k4t),
                        lam, co, wa, wlen, wnorm)
        k6t, k6a = _rhs(x + hs, res + hs * (a61 * k1t + a62 * k2t + a63 * k3t + a64 * k4t + a65 * k5t),
                        lam, co, wa, wlen, wnorm)
        yt = res + hs * (b1 * k1t + b3 * k3t + b4 * k4t + b5 * k5t + b6 * k6t)
        ya = acc + hs * (b1 * k1a + b3 * k3a + b4 * k4a + b5 * k5a + b6 * k6a)
        k7t, k7a = _rhs(x + hs, yt, lam, co, wa, wlen, wnorm)
        n_rhs += 6
        errt = hs * (e1 * k1t + e3 * k3t + e4 * k4t + e5 * k5t + e6 * k6t + e7 * k7t)
        erra = hs * (e1 * k1a + e3 * k3a + e4 * k4a + e5 * k5a + e6 * k6a + e7 * k7a)
        sct = atol + rtol * max(abs(res), abs(yt))
        sca = atol + rtol * max(abs(acc), abs(ya))
        if wlen > 0.0:
            err = math.sqrt(0.5 * ((errt / sct) ** 2 + (erra / sca) ** 2))
        else:
            err = abs(errt / sct)
        if not math.isfinite(err):
            return res, wind, acc, h, n_acc, n_rej, n_rhs, NON_FINITE
        if err <= 1.0:
            if err == 0.0:
                fac = 5.0
            else:
                fac = min(5.0, max(0.2, 0.9 * err ** -0.2))
            x = x1 if last else x + hs
            res = yt
            acc = ya
            k1t = k7t
            k1a = k7a
            # residual back into [0, 2pi), winding carries the multiples
            while res >= TWO_PI:
                res -= TWO_PI
                wind += 1
            while res < 0.0:
                res += TWO_PI
                wind -= 1
            h = hh * fac
            n_acc += 1
        else:
            n_rej += 1
            h = hh * max(0.2, 0.9 * err ** -0.2)
    return res, wind, acc, h, n_acc, n_rej, n_rhs, OK


def pack(v):
    """Coefficient arrays of a :class:`CoefficientTriple` as a tuple numba accepts."""
    out = []
    for f in (v.r, v.q, v.w):
        c, om, ca, sa = f.packed()
        out.append((float(c), np.ascontiguousarray(om, dtype=np.float64),
                    np.ascontiguousarray(ca, dtype=np.float64), np.ascontiguousarray(sa, dtype=np.float64)))
    return tuple(out)
