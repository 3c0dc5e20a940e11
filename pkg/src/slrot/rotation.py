"""Rotation number estimators.

Three numbers come out of one Pruefer trajectory on ``[0, 2X]``:

* head and tail quotients ``(theta(X) - theta(0)) / X`` and
  ``(theta(2X) - theta(X)) / X``;
* a smooth-window mean of ``theta'`` over ``[X, 2X]``.  Writing
  ``theta = rho x + d(x)`` with ``d`` bounded, integration by parts leaves an
  error ``O(|d| / X^2)``, and for quasi-periodic ``d`` the bump window
  converges faster than any power;
* the zero count ``pi N / x``.

``rho_angle`` reports the windowed mean as its value and keeps the two
quotients; its ``err`` is the quotient discrepancy plus ``2 pi / X``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .apfun import CoefficientTriple
from .errors import HorizonExceeded
from .ode import IntegratorConfig
from .prufer import PruferAngle, _Evolver, as_angle, count_pi_crossings, default_config

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RotationEstimate:
    rho: float
    err: float
    X: float
    method: str  # "angle", "zeros" or "combined"
    rho_tail: float | None = None
    rho_head: float | None = None
    rho_zeros: float | None = None
    zeros_X: float | None = None
    n_zeros: int | None = None
    converged: bool = True


def default_horizon(v: CoefficientTriple) -> float:
    """``10^3`` periods of the slowest generator."""
    return 1e3 * TWO_PI / v.min_generator()


def _angle_pass(ev: _Evolver, th0: PruferAngle, X: float, theta_X: PruferAngle) -> RotationEstimate:
    theta_2X = ev.advance(2 * X, window=(X, X))
    head = (theta_X - th0) / X
    tail = (theta_2X - theta_X) / X
    n = count_pi_crossings(th0, theta_2X)
    return RotationEstimate(
        rho=ev.acc, err=abs(tail - head) + TWO_PI / X, X=X, method="angle",
        rho_tail=tail, rho_head=head, rho_zeros=math.pi * n / (2 * X), zeros_X=2 * X, n_zeros=n)


def rho_angle(lam: float, v: CoefficientTriple, X: float, cfg: IntegratorConfig | None = None,
              theta0=0.0) -> RotationEstimate:
    """Windowed tail estimate from one trajectory on ``[0, 2X]``."""
    if X <= 0:
        raise ValueError("X must be positive")
    th0 = as_angle(theta0)
    ev = _Evolver(lam, v, th0, cfg or default_config(v))
    theta_X = ev.advance(X)
    return _angle_pass(ev, th0, X, theta_X)


def rho_zeros(lam: float, v: CoefficientTriple, X: float, cfg: IntegratorConfig | None = None,
              theta0=0.0) -> RotationEstimate:
    """``pi N / X`` with ``N`` the number of zeros on ``[0, X)``."""
    if X <= 0:
        raise ValueError("X must be positive")
    th0 = as_angle(theta0)
    ev = _Evolver(lam, v, th0, cfg or default_config(v))
    n = count_pi_crossings(th0, ev.advance(X))
    r = math.pi * n / X
    return RotationEstimate(rho=r, err=TWO_PI / X, X=X, method="zeros", rho_zeros=r, zeros_X=X, n_zeros=n)


def rho(lam: float, v: CoefficientTriple, target_err: float = 5e-3, X_init: float | None = None,
        X_max: float | None = None, cfg: IntegratorConfig | None = None) -> RotationEstimate:
    """Adaptive-horizon rotation number.

    ``X`` doubles from ``X_init`` until the angle estimator's ``err`` drops to
    ``target_err``.  The trajectory is continued, not restarted: ``theta(2X)``
    of one pass is ``theta(X')`` of the next.  The returned ``err`` is the
    largest of the angle ``err`` and the angle/zero-count discrepancy.
    Raises :class:`HorizonExceeded` (with ``.best``) once ``X > X_max``.
    """
    if X_init is not None:
        X = X_init
    else:
        X = default_horizon(v) if X_max is None else min(default_horizon(v), X_max)
    X_max = X_max if X_max is not None else 256 * X
    if not (0 < X <= X_max):
        raise ValueError("need 0 < X_init <= X_max")
    if target_err <= 0:
        raise ValueError("target_err must be positive")
    th0 = PruferAngle(0, 0.0)
    ev = _Evolver(lam, v, th0, cfg or default_config(v))
    theta_X = ev.advance(X)
    while True:
        est = _angle_pass(ev, th0, X, theta_X)
        err = max(est.err, abs(est.rho - est.rho_zeros))
        est = replace(est, err=err, method="combined")
        if est.err <= target_err:
            return est
        if 2 * X > X_max:
            raise HorizonExceeded(
                f"err {est.err:.3g} > {target_err:.3g} at X={X:.6g} (X_max={X_max:.6g})",
                replace(est, converged=False))
        theta_X = ev.theta
        X *= 2
