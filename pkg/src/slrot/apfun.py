"""Quasi-periodic trigonometric polynomials over a declared frequency base.

A :class:`TrigPolynomial` is ``c + sum_t a_t cos(w_t x) + b_t sin(w_t x)`` with
every frequency ``w_t = k_t . beta`` an integer combination of the base
generators.  Mean values and Fourier coefficients are therefore exact, and
positivity over the hull reduces to positivity of the torus lift
``F(phi) = c + sum_t a_t cos(k_t . phi) + b_t sin(k_t . phi)``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import AmbiguousFrequency, BaseMismatch, PositivityError

HULL_GRID_DEFAULT = 256
HULL_GRID_MAX = 4096
# ceiling on torus lift points evaluated in one hull_min call
_HULL_MAX_POINTS = 1 << 26


@dataclass(frozen=True)
class FrequencyBase:
    """Generators ``beta_1..beta_d`` declared rationally independent."""

    generators: tuple[float, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        gens = tuple(float(g) for g in self.generators)
        if not gens:
            raise ValueError("a frequency base needs at least one generator")
        if any(not math.isfinite(g) or g <= 0.0 for g in gens):
            raise ValueError(f"generators must be finite and positive, got {gens}")
        labels = tuple(self.labels) or tuple(repr(g) for g in gens)
        if len(labels) != len(gens):
            raise ValueError("one label per generator is required")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "labels", labels)
        for i, j in itertools.combinations(range(len(gens)), 2):
            ratio = gens[i] / gens[j]
            approx = Fraction(ratio).limit_denominator(64)
            if approx.numerator <= 64 and abs(ratio - float(approx)) <= 1e-12:
                warnings.warn(
                    f"generators {labels[i]} and {labels[j]} look rationally "
                    f"dependent (ratio ~ {approx})",
                    stacklevel=3,
                )

    @property
    def dim(self) -> int:
        return len(self.generators)

    def frequency(self, k: Sequence[int]) -> float:
        return float(sum(kj * bj for kj, bj in zip(k, self.generators)))


def _canonical_k(k: Sequence[int]) -> tuple[tuple[int, ...], int]:
    """Return ``(k', s)`` with ``k' = s*k`` and the first nonzero entry of ``k'`` positive."""
    k = tuple(int(v) for v in k)
    for v in k:
        if v != 0:
            return (k, 1) if v > 0 else (tuple(-v2 for v2 in k), -1)
    raise ValueError("term vectors must be nonzero")


@dataclass(frozen=True)
class TrigPolynomial:
    base: FrequencyBase
    constant: float = 0.0
    terms: tuple[tuple[tuple[int, ...], float, float], ...] = ()
    _omega: np.ndarray = field(init=False, repr=False, compare=False)
    _ca: np.ndarray = field(init=False, repr=False, compare=False)
    _sa: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        canon = []
        seen = set()
        for k, a, b in self.terms:
            if len(k) != self.base.dim:
                raise ValueError(f"term vector {k} does not match base dimension {self.base.dim}")
            kc, s = _canonical_k(k)
            if kc in seen:
                raise ValueError(f"duplicate term vector {kc}")
            seen.add(kc)
            # cos is even, sin is odd under k -> -k
            canon.append((kc, float(a), float(s * b)))
        object.__setattr__(self, "constant", float(self.constant))
        object.__setattr__(self, "terms", tuple(canon))
        object.__setattr__(self, "_omega", np.array([self.base.frequency(k) for k, _, _ in canon], dtype=float))
        object.__setattr__(self, "_ca", np.array([a for _, a, _ in canon], dtype=float))
        object.__setattr__(self, "_sa", np.array([b for _, _, b in canon], dtype=float))

    @classmethod
    def const(cls, base: FrequencyBase, c: float) -> "TrigPolynomial":
        return cls(base, c, ())

    @property
    def frequencies(self) -> np.ndarray:
        return self._omega.copy()

    def packed(self) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
        """``(constant, omega, cos_amp, sin_amp)`` arrays for compiled kernels."""
        return self.constant, self._omega, self._ca, self._sa

    def __call__(self, x):
        return evaluate(self, x)

    def scalar_fn(self):
        """Plain-float evaluator, cheaper than :func:`evaluate` inside ODE right-hand sides."""
        c = self.constant
        rows = [(float(om), float(a), float(b)) for om, a, b in zip(self._omega, self._ca, self._sa)]
        if not rows:
            return lambda x: c
        cos, sin = math.cos, math.sin

        def f(x):
            s = c
            for om, a, b in rows:
                s += a * cos(om * x) + b * sin(om * x)
            return s
        return f

    def sup_norm_bound(self) -> float:
        return abs(self.constant) + float(np.sum(np.hypot(self._ca, self._sa)))


def evaluate(f: TrigPolynomial, x):
    """Evaluate ``f`` at a scalar or array ``x``."""
    if not f.terms:
        if np.ndim(x) == 0:
            return f.constant
        return np.full(np.shape(x), f.constant)
    xa = np.asarray(x, dtype=float)
    ph = np.multiply.outer(xa, f._omega)
    val = f.constant + np.cos(ph) @ f._ca + np.sin(ph) @ f._sa
    return float(val) if np.ndim(x) == 0 else val


def shift(f: TrigPolynomial, t: float) -> TrigPolynomial:
    """Return ``g`` with ``g(x) = f(x + t)``."""
    if t == 0.0:
        return f
    terms = []
    for (k, a, b), om in zip(f.terms, f._omega):
        c, s = math.cos(om * t), math.sin(om * t)
        terms.append((k, a * c + b * s, b * c - a * s))
    return TrigPolynomial(f.base, f.constant, tuple(terms))


def mean_value(f: TrigPolynomial) -> float:
    return f.constant


def fourier_coefficient(f: TrigPolynomial, lam: float, tol: float = 1e-12) -> complex:
    """Bohr-Fourier coefficient ``lim (1/T) int_0^T f(x) exp(-i lam x) dx``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    hits = []
    if abs(lam) <= tol:
        hits.append((0.0, complex(f.constant)))
    for (_, a, b), om in zip(f.terms, f._omega):
        if abs(lam - om) <= tol:
            hits.append((om, complex(a, -b) / 2))
        if abs(lam + om) <= tol:
            hits.append((-om, complex(a, b) / 2))
    if len(hits) > 1:
        raise AmbiguousFrequency(
            f"frequencies {[h[0] for h in hits]} all lie within {tol} of {lam}"
        )
    return hits[0][1] if hits else 0j


def _lipschitz(f: TrigPolynomial) -> float:
    return float(sum(math.hypot(*k) * math.hypot(a, b) for k, a, b in f.terms))


def _grid_min(f: TrigPolynomial, g: int) -> float:
    d = f.base.dim
    if g ** d > _HULL_MAX_POINTS:
        raise ValueError(f"torus grid {g}^{d} too large")
    phi = 2 * np.pi * np.arange(g) / g
    ks = np.array([k for k, _, _ in f.terms], dtype=float)
    # Re((a - ib) exp(i k.phi)) = a cos(k.phi) + b sin(k.phi)
    coef = f._ca - 1j * f._sa
    if d == 1:
        return float((f.constant + (np.exp(1j * np.outer(phi, ks[:, 0])) @ coef).real).min())
    # first axis looped, remaining axes broadcast
    tail = [np.exp(1j * np.multiply.outer(ks[:, ax], phi)) for ax in range(1, d)]
    best = math.inf
    for i0 in range(g):
        acc = np.full((g,) * (d - 1), f.constant)
        for t in range(len(ks)):
            arr = coef[t] * np.exp(1j * ks[t, 0] * phi[i0])
            for ax, e in enumerate(tail):
                shape = [1] * (d - 1)
                shape[ax] = g
                arr = arr * e[t].reshape(shape)
            acc = acc + arr.real
        best = min(best, float(acc.min()))
    return best


def hull_min(f: TrigPolynomial, grid_per_dim: int = HULL_GRID_DEFAULT) -> float:
    """Certified lower bound on the infimum of ``f`` over its hull.

    The torus lift is sampled on a uniform grid and the minimum is lowered by
    the Lipschitz slack ``L * (pi / g) * sqrt(d)``.  The bound is the best one
    over the dyadic chain ``g, g/2, ..., >= 8`` so it never decreases when the
    grid is doubled.
    """
    if grid_per_dim < 8:
        raise ValueError("grid_per_dim must be >= 8")
    if not f.terms:
        return f.constant
    lip = _lipschitz(f)
    d = f.base.dim
    best = -math.inf
    g = grid_per_dim
    while g >= 8:
        best = max(best, _grid_min(f, g) - lip * (math.pi / g) * math.sqrt(d))
        if g % 2:
            break
        g //= 2
    return best


def certify_positive(f: TrigPolynomial, name: str = "f",
                     grid_per_dim: int = HULL_GRID_DEFAULT,
                     grid_max: int = HULL_GRID_MAX) -> float:
    """Refine the hull grid until the bound is positive; raise otherwise."""
    g = grid_per_dim
    while True:
        try:
            bound = hull_min(f, g)
        except ValueError:
            break
        if bound > 0:
            return bound
        if g >= grid_max:
            break
        g *= 2
    raise PositivityError(
        f"{name}: hull positivity could not be certified (bound {bound:.3g} at grid {g})",
        name,
    )


def _echelon(rows: list[list[int]]) -> list[list[int]]:
    """Integer row echelon form spanning the same lattice as ``rows``."""
    rows = [list(r) for r in rows if any(r)]
    out = []
    ncol = len(rows[0]) if rows else 0
    for col in range(ncol):
        active = [r for r in rows if r[col] != 0]
        rows = [r for r in rows if r[col] == 0]
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[col]))
            piv = active[0]
            nxt = [piv]
            for r in active[1:]:
                q = r[col] // piv[col]
                r = [a - q * b for a, b in zip(r, piv)]
                (nxt if r[col] != 0 else rows).append(r)
            active = nxt
        if active:
            piv = active[0]
            if piv[col] < 0:
                piv = [-a for a in piv]
            out.append(piv)
        rows = [r for r in rows if any(r)]
    return out


@dataclass(frozen=True)
class FrequencyModule:
    """Integer combinations of the base spanned by the coefficient exponents."""

    base: FrequencyBase
    witnesses: frozenset

    @property
    def basis(self) -> list[list[int]]:
        return _echelon([list(k) for k in sorted(self.witnesses)])

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def is_trivial(self) -> bool:
        return not self.witnesses

    def value_of(self, n: Sequence[int]) -> float:
        return self.base.frequency(n)

    def contains(self, n: Sequence[int]) -> bool:
        """Whether the integer vector ``n`` lies in the spanned sublattice."""
        res = [int(v) for v in n]
        for piv in self.basis:
            col = next(i for i, v in enumerate(piv) if v != 0)
            if res[col] % piv[col]:
                return False
            q = res[col] // piv[col]
            res = [a - q * b for a, b in zip(res, piv)]
        return not any(res)

    def describe(self) -> str:
        if self.is_trivial:
            return "{0}"
        parts = []
        for row in self.basis:
            terms = [f"{v}*{lab}" if v != 1 else lab for v, lab in zip(row, self.base.labels) if v]
            parts.append("(" + " + ".join(terms) + ")Z" if len(terms) > 1 else f"{terms[0]}Z")
        return " + ".join(parts)


@dataclass(frozen=True)
class CoefficientTriple:
    """``v = (1/p, q, w)`` with certified hull floors for ``r = 1/p`` and ``w``."""

    r: TrigPolynomial
    q: TrigPolynomial
    w: TrigPolynomial
    hull_floor_r: float
    hull_floor_w: float

    def __post_init__(self):
        if not (self.r.base == self.q.base == self.w.base):
            raise BaseMismatch("r, q and w must share one frequency base")
        if not (self.hull_floor_r > 0 and self.hull_floor_w > 0):
            raise PositivityError("hull floors must be positive", "r" if self.hull_floor_r <= 0 else "w")

    @classmethod
    def certified(cls, r: TrigPolynomial, q: TrigPolynomial, w: TrigPolynomial) -> "CoefficientTriple":
        if not (r.base == q.base == w.base):
            raise BaseMismatch("r, q and w must share one frequency base")
        return cls(r, q, w, certify_positive(r, "r"), certify_positive(w, "w"))

    @property
    def base(self) -> FrequencyBase:
        return self.r.base

    def shift(self, t: float) -> "CoefficientTriple":
        if t == 0.0:
            return self
        return CoefficientTriple(shift(self.r, t), shift(self.q, t), shift(self.w, t),
                                 self.hull_floor_r, self.hull_floor_w)

    def all_frequencies(self) -> np.ndarray:
        return np.concatenate([self.r.frequencies, self.q.frequencies, self.w.frequencies])

    def max_frequency(self) -> float:
        om = np.abs(self.all_frequencies())
        return float(max(max(self.base.generators), om.max() if om.size else 0.0))

    def min_generator(self) -> float:
        return min(self.base.generators)

    def is_constant(self) -> bool:
        return not (self.r.terms or self.q.terms or self.w.terms)

    def packed(self) -> tuple:
        return self.r.packed() + self.q.packed() + self.w.packed()


def constant_triple(r: float = 1.0, q: float = 0.0, w: float = 1.0,
                    base: FrequencyBase | None = None) -> CoefficientTriple:
    base = base or FrequencyBase((1.0,))
    return CoefficientTriple.certified(TrigPolynomial.const(base, r), TrigPolynomial.const(base, q),
                                       TrigPolynomial.const(base, w))


def module_of(v: CoefficientTriple) -> FrequencyModule:
    if not (v.r.base == v.q.base == v.w.base):
        raise BaseMismatch("r, q and w carry different bases")
    wit = {k for f in (v.r, v.q, v.w) for k, _, _ in f.terms}
    return FrequencyModule(v.base, frozenset(wit))


def numeric_mean(f: TrigPolynomial, T: float, n: int | None = None) -> float:
    """Trapezoidal ``(1/T) int_0^T f``; an independent check on :func:`mean_value`."""
    wmax = float(np.abs(f._omega).max()) if f.terms else 1.0
    n = n or int(max(64, 40 * wmax * T / (2 * np.pi)))
    xs = np.linspace(0.0, T, n + 1)
    trap = getattr(np, "trapezoid", None) or np.trapz
    return float(trap(evaluate(f, xs), xs) / T)
