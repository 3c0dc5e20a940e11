"""Pruefer angle dynamics for ``-(p u')' + q u = lam w u``.

With ``p u' + i u = R exp(i theta)`` the angle obeys

    theta' = r(x) cos^2 theta + (lam w(x) - q(x)) sin^2 theta,   r = 1/p,

and zeros of ``u`` are exactly the (always upward) crossings of ``theta``
through multiples of pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .apfun import CoefficientTriple, evaluate
from .errors import NonFiniteState, StepLimitExceeded
from .ode import IntegratorConfig, integrate_with_events

TWO_PI = 2.0 * math.pi
# crossings this close (in angle) to the endpoint are treated as lying on it
END_EPS = 1e-7


@dataclass(frozen=True, order=True)
class PruferAngle:
    """``theta = 2 pi * winding + residual`` with ``residual in [0, 2 pi)``."""

    winding: int
    residual: float

    @classmethod
    def from_float(cls, theta: float) -> "PruferAngle":
        w = math.floor(theta / TWO_PI)
        res = theta - TWO_PI * w
        if res >= TWO_PI:
            res -= TWO_PI
            w += 1
        return cls(int(w), res)

    def __float__(self) -> float:
        return TWO_PI * self.winding + self.residual

    @property
    def value(self) -> float:
        return float(self)

    def __sub__(self, other: "PruferAngle") -> float:
        return TWO_PI * (self.winding - other.winding) + (self.residual - other.residual)

    def plus_turns(self, k: int) -> "PruferAngle":
        return PruferAngle(self.winding + k, self.residual)

    def pi_floor(self) -> int:
        """``floor(theta / pi)`` computed without forming ``theta``."""
        return 2 * self.winding + math.floor(self.residual / math.pi)


def as_angle(theta) -> PruferAngle:
    return theta if isinstance(theta, PruferAngle) else PruferAngle.from_float(float(theta))


@dataclass
class PruferTrajectory:
    theta_start: PruferAngle
    theta_end: PruferAngle
    x_end: float
    zero_count: int | None
    samples: list = field(default_factory=list)
    zeros: list | None = None
    n_steps: int = 0
    n_rhs: int = 0


def default_config(v: CoefficientTriple) -> IntegratorConfig:
    """rtol 1e-9, atol 1e-12, ``h_max`` a tenth of the fastest coefficient period."""
    return IntegratorConfig(rtol=1e-9, atol=1e-12, h_max=0.1 * TWO_PI / v.max_frequency())


def prufer_rhs(x: float, theta: float, lam: float, v: CoefficientTriple) -> float:
    r, q, w = evaluate(v.r, x), evaluate(v.q, x), evaluate(v.w, x)
    c, s = math.cos(theta), math.sin(theta)
    return r * c * c + (lam * w - q) * s * s


def count_pi_crossings(theta0: PruferAngle, theta1: PruferAngle) -> int:
    """Number of ``k`` with ``theta0 < k pi <= theta1``.

    A start exactly on a multiple of pi is not a crossing; an endpoint within
    ``END_EPS`` of one is.
    """
    hi = 2 * theta1.winding + math.floor(theta1.residual / math.pi + END_EPS)
    lo = theta0.pi_floor()
    return max(0, hi - lo)


class _Evolver:
    """Stateful wrapper around the compiled kernel, continued segment by segment."""

    def __init__(self, lam: float, v: CoefficientTriple, theta0: PruferAngle, cfg: IntegratorConfig):
        self.lam = float(lam)
        self.co = _kernels.pack(v)
        self.cfg = cfg
        self.x = 0.0
        self.theta = theta0
        self.h = cfg.h_init
        self.n_steps = 0
        self.n_rhs = 0
        self.acc = 0.0

    def advance(self, x1: float, window: tuple[float, float] | None = None) -> PruferAngle:
        wa, wlen = window if window else (0.0, 0.0)
        wnorm = 1.0 / (wlen * _kernels.BUMP_MASS) if wlen > 0 else 0.0
        if window:
            self.acc = 0.0
        budget = self.cfg.max_steps - self.n_steps
        res, wind, acc, h, na, nr, nf, status = _kernels.prufer_advance(
            self.lam, self.co, self.x, float(x1), self.theta.residual, self.theta.winding, self.acc,
            wa, wlen, wnorm, self.cfg.rtol, self.cfg.atol, self.h, self.cfg.h_max, budget)
        self.n_steps += na + nr
        self.n_rhs += nf
        if status == _kernels.STEP_LIMIT:
            raise StepLimitExceeded(f"step limit {self.cfg.max_steps} hit before x={x1}")
        if status == _kernels.NON_FINITE:
            raise NonFiniteState(f"non-finite Pruefer angle near x={self.x}")
        self.x = float(x1)
        self.theta = PruferAngle(int(wind), float(res))
        self.acc = acc
        self.h = h
        return self.theta


def evolve(lam: float, v: CoefficientTriple, theta0=0.0, x_end: float = 1.0,
           cfg: IntegratorConfig | None = None, *, sample_at=None,
           locate_zeros: bool = False) -> PruferTrajectory:
    """Evolve the Pruefer angle from ``x = 0`` to ``x_end``.

    ``zero_count`` counts zeros of the solution on ``(0, x_end]``, i.e. the
    multiples of pi in ``(theta(0), theta(x_end)]``; it is ``None`` for backward
    evolution.  ``sample_at`` gives extra stations (in ``(0, x_end]`` order)
    where the angle is recorded.  ``locate_zeros`` additionally finds zero
    positions with the event integrator (slow, meant for short ranges).
    """
    cfg = cfg or default_config(v)
    th0 = as_angle(theta0)
    ev = _Evolver(lam, v, th0, cfg)
    samples = []
    for xs in (sample_at if sample_at is not None else ()):
        samples.append((float(xs), ev.advance(xs)))
    if ev.x != x_end:
        ev.advance(x_end)
    forward = x_end >= 0
    traj = PruferTrajectory(th0, ev.theta, float(x_end),
                            count_pi_crossings(th0, ev.theta) if forward else None,
                            samples, None, ev.n_steps, ev.n_rhs)
    if locate_zeros and forward:
        traj.zeros = _locate_zeros(lam, v, th0, x_end, cfg)
    return traj


def _locate_zeros(lam, v, th0: PruferAngle, x_end: float, cfg: IntegratorConfig) -> list[float]:
    rhs = lambda x, y: np.array([prufer_rhs(x, y[0], lam, v)])  # noqa: E731
    traj, crossings = integrate_with_events(rhs, [th0.residual], 0.0, x_end, cfg,
                                            lambda y: math.sin(y[0]))
    # every crossing of a multiple of pi is upward in theta
    zeros = [c.x for c in crossings]
    # an endpoint landing just short of k pi still counts, as in count_pi_crossings
    frac = traj.y[0] / math.pi - math.floor(traj.y[0] / math.pi)
    if frac >= 1.0 - END_EPS and (not zeros or zeros[-1] < x_end - 1e-9 * (1 + abs(x_end))):
        zeros.append(float(x_end))
    return zeros


def theta_at(lam: float, v: CoefficientTriple, theta0, x: float,
             cfg: IntegratorConfig | None = None) -> PruferAngle:
    return evolve(lam, v, theta0, x, cfg).theta_end


def cocycle_check(lam: float, v: CoefficientTriple, theta0, x1: float, x2: float,
                  cfg: IntegratorConfig | None = None) -> float:
    """``|theta(x1+x2, Th; v) - theta(x1, theta(x2, Th; v); v shifted by x2)|``."""
    if x2 == 0.0:
        return 0.0
    cfg = cfg or default_config(v)
    direct = theta_at(lam, v, theta0, x1 + x2, cfg)
    mid = theta_at(lam, v, theta0, x2, cfg)
    composed = theta_at(lam, v.shift(x2), mid, x1, cfg)
    return abs(direct - composed)
