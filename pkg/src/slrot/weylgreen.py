"""Weyl m-functions, the Green function diagonal, and checks on both.

``m = p u'/u`` for a Weyl solution ``u`` obeys the Riccati equation

    m' = (q - z w) - r m^2,   r = 1/p.

``m_plus`` is integrated backward from ``x + X_far`` and ``m_minus`` forward
from ``x - X_far``; in those directions the Weyl value attracts every other
initial value, so the start is forgotten.  Near poles the inverted chart
``n = 1/m`` with ``n' = r - (q - z w) n^2`` takes over.  Values are carried
as homogeneous pairs ``(a, b)`` with ``m = a/b`` so the diagonal

    G(x, x) = 1 / (m_minus - m_plus) = b- b+ / (a- b+ - a+ b-)

and ``dG/dx = r (a- b+ + a+ b-) / (a- b+ - a+ b-)`` stay finite at poles.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .apfun import CoefficientTriple
from .errors import NotDecayed, WronskianVanished
from .ode import IntegratorConfig, Stepper, locate_root
from .prufer import PruferAngle, count_pi_crossings, evolve
from .prufer import default_config as prufer_config

X_FAR_MIN = 40.0
X_FAR_DOUBLINGS = 10
# chart switch threshold on |y|; the other chart starts at |y| < 1/SWITCH
SWITCH = 2.0


class HerglotzWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class MFunctionSample:
    x: float
    a: complex
    b: complex
    chart: str  # "m" (b == 1) or "n" (a == 1)
    discrepancy: float = 0.0
    herglotz_ok: bool = True

    @property
    def m(self) -> complex:
        return self.a / self.b if self.b != 0 else complex(math.inf)

    @property
    def n(self) -> complex:
        return self.b / self.a if self.a != 0 else complex(math.inf)


@dataclass(frozen=True)
class GreenDiagSample:
    x: float
    G: complex
    dGdx: complex
    m_plus: MFunctionSample
    m_minus: MFunctionSample


def default_config(v: CoefficientTriple) -> IntegratorConfig:
    return prufer_config(v).with_(rtol=1e-10, atol=1e-13)


def default_x_far(z: complex) -> float:
    z = complex(z)
    return max(X_FAR_MIN, 12.0 / abs(z.imag)) if z.imag != 0 else X_FAR_MIN


def riccati_rhs(x: float, m: complex, z: complex, v: CoefficientTriple) -> complex:
    r, q, w = v.r(x), v.q(x), v.w(x)
    return (q - z * w) - m * m * r


class _Riccati:
    """Chart-switching Riccati integrator between stations."""

    def __init__(self, z: complex, v: CoefficientTriple, x0: float, init: tuple[complex, complex],
                 cfg: IntegratorConfig):
        self.z = complex(z)
        rf, qf, wf = v.r.scalar_fn(), v.q.scalar_fn(), v.w.scalar_fn()
        self.real = self.z.imag == 0 and all(isinstance(c, float) or c.imag == 0 for c in init)
        zr = self.z.real if self.real else self.z

        def rhs_m(x, y):
            m = y[0]
            return np.array([(qf(x) - zr * wf(x)) - m * m * rf(x)])

        def rhs_n(x, y):
            n = y[0]
            return np.array([rf(x) - (qf(x) - zr * wf(x)) * n * n])

        self.rf = rf
        self._rhs = {"m": rhs_m, "n": rhs_n}
        a, b = init
        if abs(a) <= abs(b):
            self.chart, y = "m", a / b
        else:
            self.chart, y = "n", b / a
        dtype = float if self.real else complex
        self.y0 = np.array([y], dtype=dtype)
        self.x0 = float(x0)
        self.cfg = cfg
        self.st: Stepper | None = None

    def pair(self) -> tuple[complex, complex, str]:
        y = complex(self.st.y[0]) if self.st else complex(self.y0[0])
        return (y, 1.0, "m") if self.chart == "m" else (1.0, y, "n")

    def _maybe_switch(self):
        y = self.st.y[0]
        if abs(y) > SWITCH:
            self.chart = "n" if self.chart == "m" else "m"
            self.st.restart(self._rhs[self.chart], np.array([1.0 / y]))
            return True
        return False

    def run_to(self, x1: float, poles: list | None = None) -> tuple[complex, complex]:
        """Advance to ``x1``; if ``poles`` is a list, append positions where ``b`` crosses 0."""
        if self.st is None:
            self.st = Stepper(self._rhs[self.chart], self.y0, self.x0, x1, self.cfg)
        else:
            self.st.retarget(x1)
        while self.st.step():
            if poles is not None and self.chart == "n" and self.real:
                y_prev, y_new = self.st.prev[1][0], self.st.y[0]
                if y_prev != 0.0 and (y_new == 0.0 or (y_new > 0) != (y_prev > 0)):
                    xa = self.st.prev[0]
                    ev = lambda y: float(np.real(y[0]))  # noqa: E731
                    poles.append(self.st.x if y_new == 0.0 else locate_root(self.st, ev, xa, float(y_prev), self.st.x))
            self._maybe_switch()
        return self.pair()


def _chordal(p: tuple[complex, complex], q: tuple[complex, complex]) -> float:
    """Chordal distance on the Riemann sphere between ``p0/p1`` and ``q0/q1``."""
    num = abs(p[0] * q[1] - p[1] * q[0])
    den = math.sqrt(abs(p[0]) ** 2 + abs(p[1]) ** 2) * math.sqrt(abs(q[0]) ** 2 + abs(q[1]) ** 2)
    return num / den


def _discrepancy(p, q) -> float:
    ma = p[0] / p[1] if p[1] != 0 else None
    mb = q[0] / q[1] if q[1] != 0 else None
    if ma is not None and mb is not None and abs(ma) <= SWITCH and abs(mb) <= SWITCH:
        return abs(ma - mb)
    return _chordal(p, q)


def _inits(z: complex, side: int) -> list[tuple[complex, complex]]:
    """Two starting values of the Riccati variable.

    Off the axis: ``m = s i`` and ``2 s i`` with the sign ``s`` of the
    side's Herglotz half-plane.  On the axis: Neumann (``m = 0``) and
    Dirichlet (``m = inf``) conditions at the far end.
    """
    z = complex(z)
    if z.imag == 0:
        return [(0.0, 1.0), (1.0, 0.0)]
    s = side * (1.0 if z.imag > 0 else -1.0)
    return [(s * 1j, 1.0), (2 * s * 1j, 1.0)]


def _tolerance(cfg: IntegratorConfig, pair) -> float:
    m = abs(pair[0] / pair[1]) if pair[1] != 0 and abs(pair[0]) <= abs(pair[1]) * SWITCH else 1.0
    return 10 * (cfg.atol + cfg.rtol * max(1.0, m))


def _path(z, v, xs, X_far, cfg, side: int, poles: list | None = None):
    """Weyl pairs at stations ``xs`` for ``side = +1`` (m_plus) or ``-1`` (m_minus)."""
    xs = np.asarray(xs, dtype=float)
    order = np.argsort(-side * xs, kind="stable")  # plus: descending; minus: ascending
    start = float(xs.max() + X_far) if side > 0 else float(xs.min() - X_far)
    results = []
    for k, init in enumerate(_inits(z, side)):
        ric = _Riccati(z, v, start, init, cfg)
        out = [None] * len(xs)
        for idx in order:
            out[idx] = ric.run_to(float(xs[idx]), poles if k == 0 else None)
        results.append(out)
    return results


def _samples(z, v, xs, X_far, cfg, side, poles=None, check=True) -> list[MFunctionSample]:
    z = complex(z)
    first, second = _path(z, v, xs, X_far, cfg, side, poles)
    samples = []
    for x, p, q in zip(np.asarray(xs, dtype=float), first, second):
        disc = _discrepancy(p, q)
        if check and disc > _tolerance(cfg, p):
            raise NotDecayed(
                f"m_{'plus' if side > 0 else 'minus'} at x={x}: initializations differ by {disc:.3g} "
                f"(X_far={X_far})")
        chart = p[2]
        ok = True
        if z.imag != 0:
            im = (p[0] / p[1]).imag if p[1] != 0 else -(p[1] / p[0]).imag
            ok = side * z.imag * im > 0
            if not ok:
                warnings.warn(f"Herglotz sign violated at x={x}", HerglotzWarning, stacklevel=3)
        samples.append(MFunctionSample(float(x), complex(p[0]), complex(p[1]), chart, disc, ok))
    return samples


def _adaptive_samples(z, v, xs, X_far, cfg, side, poles=None) -> list[MFunctionSample]:
    """Without an explicit ``X_far``, double it from the default until the two starts agree.

    An explicit ``X_far`` is used as given.
    """
    if X_far is not None:
        return _samples(z, v, xs, X_far, cfg, side, poles)
    X = default_x_far(z)
    for k in range(X_FAR_DOUBLINGS + 1):
        trial_poles = [] if poles is not None else None
        try:
            out = _samples(z, v, xs, X, cfg, side, trial_poles)
        except NotDecayed:
            if k == X_FAR_DOUBLINGS:
                raise
            X *= 2
            continue
        if poles is not None:
            poles.extend(trial_poles)
        return out
    raise AssertionError("unreachable")


def m_plus_path(z, v: CoefficientTriple, xs, X_far: float | None = None,
                cfg: IntegratorConfig | None = None, poles: list | None = None) -> list[MFunctionSample]:
    return _adaptive_samples(z, v, xs, X_far, cfg or default_config(v), +1, poles)


def m_minus_path(z, v: CoefficientTriple, xs, X_far: float | None = None,
                 cfg: IntegratorConfig | None = None, poles: list | None = None) -> list[MFunctionSample]:
    return _adaptive_samples(z, v, xs, X_far, cfg or default_config(v), -1, poles)


def m_plus(z, v: CoefficientTriple, x: float = 0.0, X_far: float | None = None,
           cfg: IntegratorConfig | None = None) -> MFunctionSample:
    """``p u+'/u+`` at ``x`` for the solution square integrable at ``+inf``."""
    return m_plus_path(z, v, [x], X_far, cfg)[0]


def m_minus(z, v: CoefficientTriple, x: float = 0.0, X_far: float | None = None,
            cfg: IntegratorConfig | None = None) -> MFunctionSample:
    return m_minus_path(z, v, [x], X_far, cfg)[0]


def _green(x: float, r: float, mp: MFunctionSample, mm: MFunctionSample) -> GreenDiagSample:
    ap, bp, am, bm = mp.a, mp.b, mm.a, mm.b
    wr = am * bp - ap * bm
    scale = math.hypot(abs(ap), abs(bp)) * math.hypot(abs(am), abs(bm))
    if abs(wr) <= 1e-14 * scale:
        raise WronskianVanished(f"m_plus == m_minus at x={x}")
    return GreenDiagSample(x, bm * bp / wr, r * (am * bp + ap * bm) / wr, mp, mm)


def green_diag_path(z, v: CoefficientTriple, xs, X_far: float | None = None,
                    cfg: IntegratorConfig | None = None) -> list[GreenDiagSample]:
    cfg = cfg or default_config(v)
    plus = m_plus_path(z, v, xs, X_far, cfg)
    minus = m_minus_path(z, v, xs, X_far, cfg)
    rf = v.r.scalar_fn()
    return [_green(float(x), rf(float(x)), mp, mm) for x, mp, mm in zip(np.asarray(xs, dtype=float), plus, minus)]


def green_diag(z, v: CoefficientTriple, x: float = 0.0, X_far: float | None = None,
               cfg: IntegratorConfig | None = None) -> GreenDiagSample:
    """``G(x, x, z)`` and its x-derivative."""
    return green_diag_path(z, v, [x], X_far, cfg)[0]


def initial_angle(sample: MFunctionSample) -> float:
    """Pruefer angle of the solution with ``(p u', u)`` proportional to ``(a, b)``."""
    return math.atan2(float(np.real(sample.b)), float(np.real(sample.a)))


def count_green_zeros(lam: float, v: CoefficientTriple, X: float, X_far: float | None = None,
                      cfg: IntegratorConfig | None = None) -> int:
    """Zeros of ``G(s, s, lam)`` on ``(0, X]`` as ``N(u+) + N(u-)`` via the Pruefer angle.

    Each Weyl solution is evolved in the direction where it dominates: ``u-``
    forward from 0, ``u+`` backward from ``X``.  Forward evolution of ``u+``
    would be captured by the growing solution and drift onto the zeros of ``u-``.
    """
    if X <= 0:
        raise ValueError("X must be positive")
    cfg = cfg or default_config(v)
    pcfg = prufer_config(v)
    th_minus = initial_angle(m_minus(lam, v, 0.0, X_far, cfg)) % math.pi
    n_minus = evolve(lam, v, th_minus, X, pcfg).zero_count
    th_plus = PruferAngle.from_float(initial_angle(m_plus_path(lam, v, [X], X_far, cfg)[0]) % math.pi)
    # shifted coordinates y = s - X; zeros at y in (-X, 0]
    back = evolve(lam, v.shift(X), th_plus, -X, pcfg).theta_end
    return n_minus + count_pi_crossings(back, th_plus)


@dataclass(frozen=True)
class GreenZero:
    x: float
    side: int  # +1: zero of u+, -1: zero of u-
    dGdx: float
    r: float


def green_zeros(lam: float, v: CoefficientTriple, X: float, X_far: float | None = None,
                cfg: IntegratorConfig | None = None) -> list[GreenZero]:
    """Zeros of the diagonal on ``(0, X]`` as poles of ``m_plus``/``m_minus``, with ``dG/dx`` there."""
    cfg = cfg or default_config(v)
    found = []
    for side, path in ((+1, m_plus_path), (-1, m_minus_path)):
        poles: list[float] = []
        path(lam, v, [0.0, X], X_far, cfg, poles)
        found += [(s, side) for s in poles if 0.0 < s <= X]
    found.sort()
    if not found:
        return []
    xs = [s for s, _ in found]
    diag = green_diag_path(lam, v, xs, X_far, cfg)
    rf = v.r.scalar_fn()
    return [GreenZero(s, side, float(np.real(g.dGdx)), rf(s)) for (s, side), g in zip(found, diag)]


def check_shift_covariance(z, v: CoefficientTriple, t: float, xs, X_far: float | None = None,
                           cfg: IntegratorConfig | None = None) -> float:
    """``max_x |G(x+t, x+t; v) - G(x, x; v shifted by t)|``."""
    if t == 0.0:
        return 0.0
    xs = np.asarray(xs, dtype=float)
    a = green_diag_path(z, v, xs + t, X_far, cfg)
    b = green_diag_path(z, v.shift(t), xs, X_far, cfg)
    return max(abs(ga.G - gb.G) for ga, gb in zip(a, b))


def almost_period_scan(z, v: CoefficientTriple, taus, xs, X_far: float | None = None,
                       cfg: IntegratorConfig | None = None) -> list[tuple[float, float, float]]:
    """For each ``tau``: sup deviations of ``G`` and ``dG/dx`` under translation by ``tau``."""
    xs = np.asarray(xs, dtype=float)
    base = green_diag_path(z, v, xs, X_far, cfg)
    out = []
    for tau in taus:
        if tau == 0.0:
            out.append((0.0, 0.0, 0.0))
            continue
        moved = green_diag_path(z, v, xs + tau, X_far, cfg)
        out.append((float(tau), max(abs(a.G - b.G) for a, b in zip(moved, base)),
                    max(abs(a.dGdx - b.dGdx) for a, b in zip(moved, base))))
    return out


def herglotz_ok(sample: MFunctionSample | GreenDiagSample, z: complex, side: int | None = None) -> bool:
    """Sign checks for ``Im z > 0``: ``Im m+ > 0``, ``Im m- < 0``, ``Im G > 0``."""
    z = complex(z)
    if isinstance(sample, GreenDiagSample):
        return (sample.G.imag * z.imag > 0 and herglotz_ok(sample.m_plus, z, +1)
                and herglotz_ok(sample.m_minus, z, -1))
    m = sample.m
    im = m.imag if cmath.isfinite(m) else -(sample.n.imag)
    return side * z.imag * im > 0
