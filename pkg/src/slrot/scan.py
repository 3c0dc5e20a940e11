"""Rotation-number curves over a lambda grid, plateau detection, gap labels."""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .apfun import CoefficientTriple, FrequencyModule, module_of
from .errors import HorizonExceeded, NoLabelWithinTol
from .ode import IntegratorConfig
from .rotation import RotationEstimate, default_horizon, rho

# residuals closer than this are ties, broken by L1 norm then lexicographically
_TIE = 1e-12


@dataclass(frozen=True)
class ScanConfig:
    lambda_min: float
    lambda_max: float
    n_points: int = 401
    target_err: float = 5e-3
    plateau_tol: float = 5e-3
    min_run: int = 3
    N_max: int = 10
    label_tol: float = 1e-2
    X_init: float | None = None
    X_max: float | None = None
    workers: int | None = None

    def __post_init__(self):
        if not self.lambda_min < self.lambda_max:
            raise ValueError("lambda_min must be below lambda_max")
        if self.n_points < 16:
            raise ValueError("n_points must be >= 16")
        if self.min_run < 3:
            raise ValueError("min_run must be >= 3")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.lambda_min, self.lambda_max, self.n_points)

    @property
    def step(self) -> float:
        return (self.lambda_max - self.lambda_min) / (self.n_points - 1)


@dataclass
class RhoCurve:
    lambdas: np.ndarray
    estimates: list[RotationEstimate]
    flags: list[str]

    @property
    def rho(self) -> np.ndarray:
        return np.array([e.rho for e in self.estimates])

    @property
    def err(self) -> np.ndarray:
        return np.array([e.err for e in self.estimates])

    def __len__(self):
        return len(self.lambdas)


@dataclass(frozen=True)
class Label:
    n: tuple[int, ...]
    value: float
    residual: float
    ambiguous: bool
    alternatives: tuple = ()
    within_tol: bool = True


@dataclass(frozen=True)
class GapReport:
    lambda_lo: float
    lambda_hi: float
    index_lo: int
    index_hi: int
    rho_plateau: float
    label: tuple[int, ...]
    label_value: float
    residual: float
    ambiguous: bool
    alternatives: tuple = field(default=())
    within_tol: bool = True


def _rho_point(lam: float, v: CoefficientTriple, cfg: ScanConfig,
               icfg: IntegratorConfig | None) -> tuple[RotationEstimate, str]:
    try:
        return rho(lam, v, cfg.target_err, cfg.X_init, cfg.X_max, icfg), ""
    except HorizonExceeded as exc:
        best = exc.best
        return replace(best, err=2 * best.err), "horizon"


def scan_rho(v: CoefficientTriple, cfg: ScanConfig, icfg: IntegratorConfig | None = None) -> RhoCurve:
    """Rotation number on the uniform grid; order-deterministic under threading."""
    lams = cfg.grid
    workers = cfg.workers if cfg.workers is not None else (os.cpu_count() or 1)
    if workers > 1:
        # the Pruefer kernel releases the GIL
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda lam: _rho_point(float(lam), v, cfg, icfg), lams))
    else:
        results = [_rho_point(float(lam), v, cfg, icfg) for lam in lams]
    return RhoCurve(lams, [r[0] for r in results], [r[1] for r in results])


def _run_ok(rho_vals: np.ndarray, err_vals: np.ndarray, tol: float) -> bool:
    med = float(np.median(rho_vals))
    return bool(np.all(np.abs(rho_vals - med) <= tol) and np.all(err_vals <= tol))


def detect_plateaus(curve: RhoCurve, plateau_tol: float = 5e-3,
                    min_run: int = 3) -> list[tuple[tuple[int, int], float]]:
    """Maximal runs (inclusive index ranges) on which rho is flat to ``plateau_tol``.

    Runs grow greedily left to right; each point also needs ``err <= plateau_tol``.
    The plateau height is the run median.
    """
    if len(curve) == 0:
        raise ValueError("empty curve")
    rho_v, err_v = curve.rho, curve.err
    out = []
    i, n = 0, len(curve)
    while i < n:
        if err_v[i] > plateau_tol:
            i += 1
            continue
        j = i
        while j + 1 < n and _run_ok(rho_v[i:j + 2], err_v[i:j + 2], plateau_tol):
            j += 1
        if j - i + 1 >= min_run:
            out.append(((i, j), float(np.median(rho_v[i:j + 1]))))
            i = j + 1
        else:
            i += 1
    return out


def fit_integer_combination(value: float, generators, tol: float, N_max: int,
                            member=None) -> Label:
    """Closest ``sum n_j g_j`` to ``value`` over ``|n_j| <= N_max`` by exhaustive enumeration."""
    if tol <= 0 or N_max < 1:
        raise ValueError("need tol > 0 and N_max >= 1")
    g = np.asarray(generators, dtype=float)
    rng = range(-N_max, N_max + 1)
    cands = np.array(list(itertools.product(rng, repeat=len(g))), dtype=np.int64)
    if member is not None:
        cands = cands[[member(c) for c in cands]]
    resid = np.abs(value - cands @ g)
    l1 = np.abs(cands).sum(axis=1)
    best_r = resid.min()
    tied = np.flatnonzero(resid <= best_r + _TIE)
    pick = min(tied, key=lambda t: (l1[t], tuple(cands[t])))
    alt_idx = [t for t in np.argsort(resid, kind="stable") if t != pick and resid[t] <= tol]
    alts = tuple((tuple(int(a) for a in cands[t]), float(resid[t])) for t in alt_idx)
    n = tuple(int(a) for a in cands[pick])
    return Label(n, float(cands[pick] @ g), float(resid[pick]), bool(alts), alts,
                 bool(resid[pick] <= tol))


def label_gap(rho_plateau: float, module: FrequencyModule, tol: float = 1e-2,
              N_max: int = 10) -> Label:
    """Label a gap by the integer vector ``n`` with ``2 rho ~ sum n_j beta_j``."""
    lab = fit_integer_combination(2.0 * rho_plateau, module.base.generators, tol, N_max,
                                  member=module.contains)
    if not lab.within_tol:
        raise NoLabelWithinTol(
            f"no module element within {tol} of 2*rho={2 * rho_plateau:.6g} "
            f"(best {lab.n}, residual {lab.residual:.3g})", lab)
    return lab


def find_gaps(curve: RhoCurve, module: FrequencyModule, cfg: ScanConfig) -> list[GapReport]:
    reports = []
    for (i, j), height in detect_plateaus(curve, cfg.plateau_tol, cfg.min_run):
        try:
            lab = label_gap(height, module, cfg.label_tol, cfg.N_max)
        except NoLabelWithinTol as exc:
            lab = exc.best
        reports.append(GapReport(float(curve.lambdas[i]), float(curve.lambdas[j]), i, j, height,
                                 lab.n, lab.value, lab.residual, lab.ambiguous, lab.alternatives,
                                 lab.within_tol))
    return reports


def scan(v: CoefficientTriple, cfg: ScanConfig,
         icfg: IntegratorConfig | None = None) -> tuple[RhoCurve, list[GapReport]]:
    curve = scan_rho(v, cfg, icfg)
    return curve, find_gaps(curve, module_of(v), cfg)


__all__ = ["ScanConfig", "RhoCurve", "Label", "GapReport", "scan_rho", "detect_plateaus",
           "fit_integer_combination", "label_gap", "find_gaps", "scan", "default_horizon"]
