"""Adaptive Dormand-Prince 5(4) integration for small nonstiff systems.

The same tableau and step controller drive the compiled Pruefer kernel in
:mod:`slrot._kernels`; this module is the generic (any callable, real or
complex state) route used by the Weyl/Green and periodic computations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NonFiniteState, StepLimitExceeded

# Dormand-Prince 5(4), FSAL
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4
# lower-triangular stage matrix, row i holds A[i]
A_MAT = np.zeros((7, 7))
for _i, _row in enumerate(A):
    A_MAT[_i, :len(_row)] = _row

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 5.0


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-9
    atol: float = 1e-12
    h_init: float = 0.0  # 0 selects an automatic first step
    h_max: float = math.inf
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if not self.h_max > 0:
            raise ValueError("h_max must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")

    def with_(self, **kw) -> "IntegratorConfig":
        fields = dict(rtol=self.rtol, atol=self.atol, h_init=self.h_init,
                      h_max=self.h_max, max_steps=self.max_steps)
        fields.update(kw)
        return IntegratorConfig(**fields)


@dataclass
class Trajectory:
    xs: list
    ys: list
    n_accepted: int = 0
    n_rejected: int = 0
    n_rhs: int = 0

    @property
    def x(self) -> float:
        return self.xs[-1]

    @property
    def y(self) -> np.ndarray:
        return self.ys[-1]


@dataclass
class Crossing:
    x: float
    direction: int  # +1 for event going - to +, -1 for + to -


def _norm(err, y0, y1, cfg) -> float:
    if err.size == 1:
        return abs(err[0]) / (cfg.atol + cfg.rtol * max(abs(y0[0]), abs(y1[0])))
    sc = cfg.atol + cfg.rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean(np.abs(err / sc) ** 2)))


class Stepper:
    """Accepted-step iterator over ``[x0, x1]``.

    ``step()`` advances by one accepted step; the last step is clipped to land
    on ``x1``.  ``interpolate`` evaluates the cubic Hermite interpolant of the
    most recent step.  ``restart`` swaps the right-hand side and state in place
    (used for chart changes of the Riccati variable).
    """

    def __init__(self, rhs: Callable, y0, x0: float, x1: float, cfg: IntegratorConfig):
        self.rhs = rhs
        self.cfg = cfg
        self.x = float(x0)
        self.x1 = float(x1)
        self.y = np.atleast_1d(np.asarray(y0)).astype(np.result_type(np.asarray(y0), float), copy=True)
        self.dir = 1.0 if x1 >= x0 else -1.0
        self.n_accepted = 0
        self.n_rejected = 0
        self.n_rhs = 0
        self.f = self._eval(self.x, self.y)
        self.h = cfg.h_init if cfg.h_init > 0 else self._initial_step()
        self.prev = None  # (x0, y0, f0, x1, y1, f1) of the last accepted step

    @property
    def done(self) -> bool:
        return self.x == self.x1

    def _eval(self, x, y):
        self.n_rhs += 1
        f = np.atleast_1d(np.asarray(self.rhs(x, y)))
        if not math.isfinite(abs(f.sum())):
            raise NonFiniteState(f"right-hand side not finite at x={x}")
        return f

    def _initial_step(self) -> float:
        # Hairer-Norsett-Wanner starting step heuristic
        cfg = self.cfg
        sc = cfg.atol + cfg.rtol * np.abs(self.y)
        d0 = float(np.sqrt(np.mean(np.abs(self.y / sc) ** 2)))
        d1 = float(np.sqrt(np.mean(np.abs(self.f / sc) ** 2)))
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h0 = min(h0, cfg.h_max, abs(self.x1 - self.x) or 1.0)
        y1 = self.y + self.dir * h0 * self.f
        f1 = self._eval(self.x + self.dir * h0, y1)
        d2 = float(np.sqrt(np.mean(np.abs((f1 - self.f) / sc) ** 2))) / h0
        if max(d1, d2) <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** (1 / 5)
        return min(100 * h0, h1, cfg.h_max)

    def restart(self, rhs: Callable | None = None, y=None):
        if rhs is not None:
            self.rhs = rhs
        if y is not None:
            self.y = np.atleast_1d(np.asarray(y)).astype(self.y.dtype, copy=True)
        self.f = self._eval(self.x, self.y)

    def retarget(self, x1: float):
        """Move the endpoint further along the same direction."""
        if (x1 - self.x) * self.dir < 0:
            raise ValueError("retarget cannot reverse direction")
        self.x1 = float(x1)

    def step(self) -> bool:
        if self.done:
            return False
        cfg = self.cfg
        while True:
            if self.n_accepted + self.n_rejected >= cfg.max_steps:
                raise StepLimitExceeded(f"more than {cfg.max_steps} steps before x={self.x1}")
            h = min(self.h, cfg.h_max)
            last = h >= abs(self.x1 - self.x)
            if last:
                h = abs(self.x1 - self.x)
            hs = self.dir * h
            K = np.empty((7, self.y.size), dtype=np.result_type(self.y, self.f))
            K[0] = self.f
            # overflow shows up as a non-finite err and is raised below
            with np.errstate(over="ignore", invalid="ignore"):
                for i in range(1, 6):
                    K[i] = self._eval(self.x + C[i] * hs, self.y + hs * (A_MAT[i, :i] @ K[:i]))
                y_new = self.y + hs * (B5[:6] @ K[:6])
                K[6] = self._eval(self.x + hs, y_new)
                err = _norm(hs * (E @ K), self.y, y_new, cfg)
            if not np.isfinite(err):
                raise NonFiniteState(f"non-finite state near x={self.x}")
            if err <= 1.0:
                fac = FAC_MAX if err == 0 else min(FAC_MAX, max(FAC_MIN, SAFETY * err ** -0.2))
                x_new = self.x1 if last else self.x + hs
                self.prev = (self.x, self.y, self.f, x_new, y_new, K[6])
                self.x, self.y, self.f = x_new, y_new, K[6]
                self.h = h * fac
                self.n_accepted += 1
                return True
            self.n_rejected += 1
            self.h = h * max(FAC_MIN, SAFETY * err ** -0.2)
            if self.h < 1e-14 * max(1.0, abs(self.x)):
                raise StepLimitExceeded(f"step size underflow at x={self.x}")

    def step_from_start(self, x: float) -> np.ndarray:
        """Single RK5 step from the start of the last accepted step to ``x``."""
        x0, y0, f0 = self.prev[0], self.prev[1], self.prev[2]
        hs = x - x0
        k = [f0]
        for i in range(1, 6):
            yi = y0 + hs * sum(a * kj for a, kj in zip(A[i], k) if a != 0.0)
            k.append(np.atleast_1d(np.asarray(self.rhs(x0 + C[i] * hs, yi))))
        self.n_rhs += 5
        return y0 + hs * sum(b * kj for b, kj in zip(B5, k) if b != 0.0)

    def interpolate(self, x: float) -> np.ndarray:
        x0, y0, f0, x1, y1, f1 = self.prev
        h = x1 - x0
        s = (x - x0) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def integrate(rhs: Callable, y0, x0: float, x1: float,
              cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate ``y' = rhs(x, y)`` from ``x0`` to ``x1`` (either direction)."""
    cfg = cfg or IntegratorConfig()
    st = Stepper(rhs, y0, x0, x1, cfg)
    traj = Trajectory([st.x], [st.y.copy()])
    while st.step():
        traj.xs.append(st.x)
        traj.ys.append(st.y.copy())
    traj.n_accepted, traj.n_rejected, traj.n_rhs = st.n_accepted, st.n_rejected, st.n_rhs
    return traj


def locate_root(st: Stepper, event: Callable, xa: float, ga: float, xb: float) -> float:
    """Bisection on the dense interpolant of the last step."""
    tol_x = lambda x: 1e-10 * (1.0 + abs(x))  # noqa: E731
    while abs(xb - xa) > tol_x(xb):
        xm = 0.5 * (xa + xb)
        gm = event(st.interpolate(xm))
        if gm == 0.0:
            return xm
        if (gm > 0) == (ga > 0):
            xa, ga = xm, gm
        else:
            xb = xm
    return polish_root(st, event, xa, xb)


def polish_root(st: Stepper, event: Callable, xa: float, xb: float, iters: int = 40) -> float:
    """Refine a Hermite bracket with exact single-step evaluations (Illinois regula falsi)."""
    x0, xe = st.prev[0], st.prev[3]
    s_lo, s_hi = min(x0, xe), max(x0, xe)
    ev = lambda x: float(event(st.step_from_start(x) if x != x0 else st.prev[1]))  # noqa: E731
    xh = 0.5 * (xa + xb)
    delta = 1e-9 * (1 + abs(xh))
    while True:
        lo, hi = max(s_lo, xh - delta), min(s_hi, xh + delta)
        ga, gb = ev(lo), ev(hi)
        if ga == 0.0:
            return lo
        if gb == 0.0:
            return hi
        if (ga > 0) != (gb > 0):
            break
        if lo == s_lo and hi == s_hi:
            return xh
        delta *= 16
    side = 0
    for _ in range(iters):
        xm = (lo * gb - hi * ga) / (gb - ga)
        gm = ev(xm)
        if gm == 0.0 or abs(hi - lo) <= 1e-14 * (1 + abs(xm)):
            return xm
        if (gm > 0) == (gb > 0):
            hi, gb = xm, gm
            if side == -1:
                ga /= 2
            side = -1
        else:
            lo, ga = xm, gm
            if side == 1:
                gb /= 2
            side = 1
        if abs(hi - lo) <= 1e-13 * (1 + abs(xm)):
            break
    return (lo * gb - hi * ga) / (gb - ga)


def integrate_with_events(rhs: Callable, y0, x0: float, x1: float,
                          cfg: IntegratorConfig | None, event: Callable) -> tuple[Trajectory, list[Crossing]]:
    """Integrate and record sign changes of ``event(y)`` between accepted steps."""
    cfg = cfg or IntegratorConfig()
    st = Stepper(rhs, y0, x0, x1, cfg)
    traj = Trajectory([st.x], [st.y.copy()])
    crossings: list[Crossing] = []
    g_prev = float(event(st.y))
    while st.step():
        traj.xs.append(st.x)
        traj.ys.append(st.y.copy())
        g_new = float(event(st.y))
        if g_prev != 0.0 and (g_new == 0.0 or (g_new > 0) != (g_prev > 0)):
            xa = st.prev[0]
            xc = st.x if g_new == 0.0 else locate_root(st, event, xa, g_prev, st.x)
            crossings.append(Crossing(xc, 1 if g_prev < 0 else -1))
        g_prev = g_new
    traj.n_accepted, traj.n_rejected, traj.n_rhs = st.n_accepted, st.n_rejected, st.n_rhs
    return traj, crossings
