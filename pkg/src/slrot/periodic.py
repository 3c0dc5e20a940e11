"""Floquet oracle for triples sharing one period ``T``.

The monodromy matrix of ``(u, p u')' = (r p u', (q - lam w) u)`` over one
period gives the Hill discriminant ``Delta = u1(T) + p u2'(T)``; ``|Delta| > 2``
marks a spectral gap.  This route never touches the Pruefer angle and so
cross-checks the plateau scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .apfun import CoefficientTriple, evaluate
from .errors import NotPeriodic
from .ode import IntegratorConfig, integrate

EDGE_TOL = 1e-8


@dataclass(frozen=True)
class Monodromy:
    T: float
    u1: float
    u2: float
    pu1p: float
    pu2p: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.u1, self.u2], [self.pu1p, self.pu2p]])

    @property
    def delta(self) -> float:
        return self.u1 + self.pu2p

    @property
    def det(self) -> float:
        return self.u1 * self.pu2p - self.u2 * self.pu1p


@dataclass(frozen=True)
class BandEdge:
    lam: float
    kind: str  # "periodic" (Delta = 2) or "antiperiodic" (Delta = -2)


def default_config(v: CoefficientTriple) -> IntegratorConfig:
    return IntegratorConfig(rtol=1e-12, atol=1e-14, h_max=0.1 * 2 * math.pi / v.max_frequency())


def linear_system_rhs(x: float, y, lam: float, v: CoefficientTriple) -> np.ndarray:
    """``(u, p u')' = (r(x) p u', (q(x) - lam w(x)) u)``."""
    return np.array([evaluate(v.r, x) * y[1], (evaluate(v.q, x) - lam * evaluate(v.w, x)) * y[0]])


def check_periodic(v: CoefficientTriple, T: float, n: int = 64, tol: float = 1e-12):
    xs = np.linspace(0.0, T, n)
    for name, f in (("r", v.r), ("q", v.q), ("w", v.w)):
        dev = float(np.max(np.abs(evaluate(f, xs + T) - evaluate(f, xs))))
        if dev > tol:
            raise NotPeriodic(f"{name} is not {T}-periodic (max deviation {dev:.3g})")


def _monodromy(lam: float, v: CoefficientTriple, T: float, cfg: IntegratorConfig) -> Monodromy:
    rf, qf, wf = v.r.scalar_fn(), v.q.scalar_fn(), v.w.scalar_fn()

    def rhs(x, y):
        r, c = rf(x), qf(x) - lam * wf(x)
        # both fundamental solutions side by side: (u1, pu1', u2, pu2')
        return np.array([r * y[1], c * y[0], r * y[3], c * y[2]])

    y = integrate(rhs, [1.0, 0.0, 0.0, 1.0], 0.0, T, cfg).y
    return Monodromy(T, float(y[0]), float(y[2]), float(y[1]), float(y[3]))


def monodromy(lam: float, v: CoefficientTriple, T: float, cfg: IntegratorConfig | None = None) -> Monodromy:
    check_periodic(v, T)
    return _monodromy(lam, v, T, cfg or default_config(v))


def discriminant(lam: float, v: CoefficientTriple, T: float, cfg: IntegratorConfig | None = None) -> float:
    return monodromy(lam, v, T, cfg).delta


def band_edges(v: CoefficientTriple, T: float, lambda_min: float, lambda_max: float,
               n_seed: int = 400, cfg: IntegratorConfig | None = None) -> list[BandEdge]:
    """Sign changes of ``Delta - 2`` and ``Delta + 2`` on a seed grid, refined to 1e-8.

    Touching edges (``|Delta| = 2`` without a crossing) are not reported.
    """
    if lambda_min >= lambda_max:
        return []
    check_periodic(v, T)
    cfg = cfg or default_config(v)
    lams = np.linspace(lambda_min, lambda_max, n_seed)
    deltas = np.array([_monodromy(float(l), v, T, cfg).delta for l in lams])
    edges = []
    for level, kind in ((2.0, "periodic"), (-2.0, "antiperiodic")):
        g = deltas - level
        f = lambda lam, level=level: _monodromy(lam, v, T, cfg).delta - level  # noqa: E731
        for i in range(n_seed - 1):
            if g[i] == 0.0:
                edges.append(BandEdge(float(lams[i]), kind))
            elif g[i + 1] != 0.0 and (g[i] > 0) != (g[i + 1] > 0):
                edges.append(BandEdge(brentq(f, float(lams[i]), float(lams[i + 1]), xtol=EDGE_TOL), kind))
    edges.sort(key=lambda e: e.lam)
    return edges


def gap_intervals(v: CoefficientTriple, T: float, lambda_min: float, lambda_max: float,
                  n_seed: int = 400, cfg: IntegratorConfig | None = None) -> list[tuple[float, float]]:
    """Maximal sub-intervals of ``[lambda_min, lambda_max]`` where ``|Delta| > 2``.

    Ends that run into the range boundary are clipped to it.
    """
    cfg = cfg or default_config(v)
    edges = band_edges(v, T, lambda_min, lambda_max, n_seed, cfg)
    cuts = [lambda_min] + [e.lam for e in edges] + [lambda_max]
    gaps = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a <= 0:
            continue
        if abs(_monodromy(0.5 * (a + b), v, T, cfg).delta) > 2.0:
            if gaps and gaps[-1][1] == a:
                gaps[-1] = (gaps[-1][0], b)
            else:
                gaps.append((a, b))
    return gaps


def rows(v: CoefficientTriple, T: float, lams, cfg: IntegratorConfig | None = None):
    """``(lambda, Delta, in_band)`` rows."""
    check_periodic(v, T)
    cfg = cfg or default_config(v)
    out = []
    for lam in lams:
        d = _monodromy(float(lam), v, T, cfg).delta
        out.append((float(lam), d, abs(d) <= 2.0))
    return out


@dataclass(frozen=True)
class CrossCheck:
    """Agreement between scan plateaus and Floquet gaps on one lambda grid."""

    pairs: tuple          # ((scan_lo, scan_hi), (oracle_lo, oracle_hi))
    unmatched_scan: tuple
    unmatched_oracle: tuple  # oracle gaps wider than ``min_width`` with no scan plateau
    max_edge_gap: float

    @property
    def ok(self) -> bool:
        return not self.unmatched_scan and not self.unmatched_oracle


def cross_check(scan_gaps, oracle_gaps, min_width: float = 0.0) -> CrossCheck:
    """Pair overlapping intervals; report the worst edge disagreement over pairs."""
    def overlaps(a, b):
        return a[0] <= b[1] and b[0] <= a[1]

    pairs, lone_scan = [], []
    for s in scan_gaps:
        hits = [o for o in oracle_gaps if overlaps(s, o)]
        if not hits:
            lone_scan.append(tuple(s))
            continue
        best = max(hits, key=lambda o: min(s[1], o[1]) - max(s[0], o[0]))
        pairs.append((tuple(s), tuple(best)))
    lone_oracle = [tuple(o) for o in oracle_gaps
                   if o[1] - o[0] > min_width and not any(overlaps(s, o) for s in scan_gaps)]
    worst = max((max(abs(s[0] - o[0]), abs(s[1] - o[1])) for s, o in pairs), default=0.0)
    return CrossCheck(tuple(pairs), tuple(lone_scan), tuple(lone_oracle), worst)
