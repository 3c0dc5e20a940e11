"""Command-line front end.

Coefficient files are INI-like::

    # p = 1/(sin x + 2), q = 2 cos x, w = 2 - cos x
    [base]
    omega = 1.0
    [r]
    const = 2.0
    term = 0.0 1.0 @ 1        # A cos(w x) + B sin(w x), w = sum k_j omega_j
    [q]
    term = 2.0 0.0 @ 1
    [w]
    const = 2.0
    term = -1.0 0.0 @ 1

A missing function section is the zero function.  Exit codes: 0 ok, 1 usage or
input error, 2 horizon exceeded, 3 Weyl data not decayed, 4 not periodic.
"""

from __future__ import annotations

import argparse
import csv
import math
import re
import sys
import warnings
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .apfun import CoefficientTriple, FrequencyBase, TrigPolynomial, module_of
from .errors import (DimensionError, HorizonExceeded, NotDecayed, NotPeriodic, ParseError,
                     SLRotError)

EXIT_OK, EXIT_INPUT, EXIT_HORIZON, EXIT_NOT_DECAYED, EXIT_NOT_PERIODIC = 0, 1, 2, 3, 4

_SECTIONS = ("base", "r", "q", "w")
_HEADER = re.compile(r"^\[\s*([A-Za-z]+)\s*\]$")


def fmt(x) -> str:
    """Shortest round-trip decimal; the same float always prints the same bytes."""
    return repr(float(x))


def _number(tok: str, line: int) -> float:
    try:
        val = float(tok)
    except ValueError:
        raise ParseError(f"not a number: {tok!r}", line) from None
    if not math.isfinite(val):
        raise ParseError(f"non-finite number: {tok!r}", line)
    return val


def _integer(tok: str, line: int) -> int:
    if not re.fullmatch(r"[+-]?\d+", tok):
        raise ParseError(f"not an integer: {tok!r}", line)
    return int(tok)


@dataclass
class _Section:
    const: float | None = None
    terms: list = field(default_factory=list)
    lines: list = field(default_factory=list)


def parse_coefficients(text: str) -> CoefficientTriple:
    """Parse a coefficient file; ``r`` and ``w`` are hull-certified on the way in."""
    omega = None
    omega_line = 0
    sections: dict[str, _Section] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _HEADER.match(line)
        if m:
            name = m.group(1).lower()
            if name not in _SECTIONS:
                raise ParseError(f"unknown section [{name}]", lineno)
            if name in sections or (name == "base" and omega is not None):
                raise ParseError(f"section [{name}] given twice", lineno)
            current = name
            if name != "base":
                sections[name] = _Section()
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno)
        if current is None:
            raise ParseError("entry before any section header", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if current == "base":
            if key != "omega":
                raise ParseError(f"unknown key {key!r} in [base]", lineno)
            if omega is not None:
                raise ParseError("omega given twice", lineno)
            toks = [t.strip() for t in value.split(",")]
            if not toks or any(not t for t in toks):
                raise ParseError("omega needs a comma-separated list of numbers", lineno)
            omega = tuple(_number(t, lineno) for t in toks)
            if any(g <= 0 for g in omega):
                raise ParseError("omega entries must be positive", lineno)
            omega_line = lineno
            continue
        sec = sections[current]
        if key == "const":
            if sec.const is not None:
                raise ParseError(f"const given twice in [{current}]", lineno)
            sec.const = _number(value, lineno)
        elif key == "term":
            if "@" not in value:
                raise ParseError("term needs the form 'A B @ k1 ... kd'", lineno)
            amp, ks = value.split("@", 1)
            amp_t, k_t = amp.split(), ks.split()
            if len(amp_t) != 2 or not k_t:
                raise ParseError("term needs the form 'A B @ k1 ... kd'", lineno)
            sec.terms.append((tuple(_integer(t, lineno) for t in k_t),
                              _number(amp_t[0], lineno), _number(amp_t[1], lineno)))
            sec.lines.append(lineno)
        else:
            raise ParseError(f"unknown key {key!r} in [{current}]", lineno)
    if omega is None:
        raise ParseError("missing [base] section with omega")
    with warnings.catch_warnings():
        # a near-rational base is the author's call; the file format stays silent
        warnings.simplefilter("ignore")
        base = FrequencyBase(omega)
    funcs = {}
    for name in ("r", "q", "w"):
        sec = sections.get(name, _Section())
        for (k, _, _), lineno in zip(sec.terms, sec.lines):
            if len(k) != base.dim:
                raise DimensionError(f"term vector has {len(k)} entries, base has {base.dim}", lineno)
            if not any(k):
                raise ParseError("term vector must be nonzero (use const)", lineno)
        try:
            funcs[name] = TrigPolynomial(base, sec.const or 0.0, tuple(sec.terms))
        except ValueError as exc:
            raise ParseError(f"[{name}]: {exc}", sec.lines[-1] if sec.lines else omega_line) from None
    return CoefficientTriple.certified(funcs["r"], funcs["q"], funcs["w"])


def render_coefficients(v: CoefficientTriple) -> str:
    """Inverse of :func:`parse_coefficients` (bit-exact decimals)."""
    out = ["[base]", "omega = " + ", ".join(fmt(g) for g in v.base.generators)]
    for name, f in (("r", v.r), ("q", v.q), ("w", v.w)):
        out.append(f"[{name}]")
        out.append(f"const = {fmt(f.constant)}")
        for k, a, b in f.terms:
            out.append(f"term = {fmt(a)} {fmt(b)} @ " + " ".join(str(j) for j in k))
    return "\n".join(out) + "\n"


def load_coefficients(path: str) -> CoefficientTriple:
    with open(path, encoding="utf-8") as fh:
        return parse_coefficients(fh.read())


# ---------------------------------------------------------------- output helpers

@contextmanager
def _open_out(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def svg_chart(lams, rhos, guides=(), width: int = 800, height: int = 500,
              title: str = "rotation number") -> str:
    """Self-contained SVG 1.1: one polyline of rho against lambda, axes, ticks, guides."""
    lams, rhos = np.asarray(lams, float), np.asarray(rhos, float)
    ml, mr, mt, mb = 70.0, 20.0, 30.0, 50.0
    x0, x1 = float(lams.min()), float(lams.max())
    y0, y1 = float(np.nanmin(rhos)), float(np.nanmax(rhos))
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = width - ml - mr, height - mt - mb

    def px(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def py(y):
        return mt + (y1 - y) / (y1 - y0) * ph

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<title>{title}</title>',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line class="axis" x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line class="axis" x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
    ]
    for t in np.linspace(x0, x1, 6):
        X = px(t)
        parts.append(f'<line class="tick" x1="{X:.3f}" y1="{mt + ph}" x2="{X:.3f}" y2="{mt + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{X:.3f}" y="{mt + ph + 20}" font-size="11" text-anchor="middle">{t:.3g}</text>')
    for t in np.linspace(y0, y1, 6):
        Y = py(t)
        parts.append(f'<line class="tick" x1="{ml - 5}" y1="{Y:.3f}" x2="{ml}" y2="{Y:.3f}" stroke="black"/>')
        parts.append(f'<text x="{ml - 8}" y="{Y + 4:.3f}" font-size="11" text-anchor="end">{t:.3g}</text>')
    parts.append(f'<text x="{ml + pw / 2}" y="{height - 10}" font-size="12" text-anchor="middle">lambda</text>')
    parts.append(f'<text x="15" y="{mt + ph / 2}" font-size="12" text-anchor="middle" '
                 f'transform="rotate(-90 15 {mt + ph / 2})">rho</text>')
    for g in guides:
        Y = py(g)
        parts.append(f'<line class="plateau" x1="{ml}" y1="{Y:.3f}" x2="{ml + pw}" y2="{Y:.3f}" '
                     'stroke="gray" stroke-dasharray="4 3"/>')
    pts = " ".join(f"{px(a):.3f},{py(b):.3f}" for a, b in zip(lams, rhos))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="steelblue" stroke-width="1.5"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------- subcommands

def cmd_rho(args) -> int:
    from .rotation import rho
    v = load_coefficients(args.coeff)
    code, flag = EXIT_OK, None
    try:
        est = rho(args.lam, v, args.err, args.x_init, args.x_max)
    except HorizonExceeded as exc:
        est, code, flag = exc.best, EXIT_HORIZON, "horizon"
        print(f"slrot: {exc}", file=sys.stderr)
    w = _writer(sys.stdout)
    if args.header:
        w.writerow(["lambda", "rho", "err", "X", "method"] + (["flag"] if flag else []))
    w.writerow([fmt(args.lam), fmt(est.rho), fmt(est.err), fmt(est.X), est.method] + ([flag] if flag else []))
    return code


def cmd_scan(args) -> int:
    from .scan import ScanConfig, scan
    cfg = ScanConfig(args.lmin, args.lmax, args.n, args.err, args.plateau_tol, args.min_run, args.nmax,
                     args.label_tol, workers=args.workers)
    v = load_coefficients(args.coeff)
    curve, gaps = scan(v, cfg)
    with _open_out(args.out) as fh:
        w = _writer(fh)
        w.writerow(["lambda", "rho", "err", "flag"])
        for lam, est, flag in zip(curve.lambdas, curve.estimates, curve.flags):
            w.writerow([fmt(lam), fmt(est.rho), fmt(est.err), flag])
    if args.gaps:
        d = v.base.dim
        with _open_out(args.gaps) as fh:
            w = _writer(fh)
            w.writerow(["lambda_lo", "lambda_hi", "rho"] + [f"label_n{j + 1}" for j in range(d)]
                       + ["label_value", "residual", "ambiguous"])
            for g in gaps:
                w.writerow([fmt(g.lambda_lo), fmt(g.lambda_hi), fmt(g.rho_plateau)]
                           + [str(n) for n in g.label]
                           + [fmt(g.label_value), fmt(g.residual), str(int(g.ambiguous))])
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(svg_chart(curve.lambdas, curve.rho, [g.rho_plateau for g in gaps]))
    print(f"slrot: {len(gaps)} plateau(s); module {module_of(v).describe()}", file=sys.stderr)
    return EXIT_OK


def _x_grid(a: float, b: float, step: float | None) -> np.ndarray:
    if step is None or a == b:
        return np.array([a]) if a == b or step is None else np.array([a, b])
    if step <= 0:
        raise ValueError("--x-step must be positive")
    n = int(math.floor((b - a) / step + 1e-9))
    if n < 0:
        raise ValueError("--x-to must not be below --x-from")
    return a + step * np.arange(n + 1)


def cmd_green(args) -> int:
    from .weylgreen import check_shift_covariance, green_diag_path, herglotz_ok
    z = complex(args.z_re, args.z_im)
    if z.imag == 0 and not args.gap_lambda:
        raise _Usage("real z needs --gap-lambda (asserting that Re z lies in a spectral gap)")
    v = load_coefficients(args.coeff)
    xs = _x_grid(args.x_from, args.x_to, args.x_step)
    rows = green_diag_path(z, v, xs, args.xfar)
    with _open_out(args.out) as fh:
        w = _writer(fh)
        w.writerow(["x", "re_m_plus", "im_m_plus", "re_m_minus", "im_m_minus", "re_G", "im_G", "re_dG", "im_dG"])
        for g in rows:
            mp, mm = g.m_plus.m, g.m_minus.m
            w.writerow([fmt(g.x), fmt(mp.real), fmt(mp.imag), fmt(mm.real), fmt(mm.imag),
                        fmt(g.G.real), fmt(g.G.imag), fmt(g.dGdx.real), fmt(g.dGdx.imag)])
    if z.imag > 0:
        bad = [g.x for g in rows if not herglotz_ok(g, z)]
        if bad:
            print(f"slrot: Herglotz sign check failed at x = {bad}", file=sys.stderr)
    if args.check_shift is not None:
        dev = check_shift_covariance(z, v, args.check_shift, xs, args.xfar)
        print(f"shift_deviation,{fmt(dev)}", file=sys.stderr)
    return EXIT_OK


def cmd_bands(args) -> int:
    from .periodic import band_edges, check_periodic, rows
    v = load_coefficients(args.coeff)
    check_periodic(v, args.period)
    lams = np.linspace(args.lmin, args.lmax, args.n)
    table = rows(v, args.period, lams)
    edges = band_edges(v, args.period, args.lmin, args.lmax, args.n)
    with _open_out(args.out) as fh:
        w = _writer(fh)
        w.writerow(["lambda", "delta", "in_band"])
        for lam, d, ok in table:
            w.writerow([fmt(lam), fmt(d), str(int(ok))])
    with _open_out(args.edges) as fh:
        w = _writer(fh)
        w.writerow(["lambda_edge", "kind"])
        for e in edges:
            w.writerow([fmt(e.lam), e.kind])
    return EXIT_OK


# ---------------------------------------------------------------- parser

class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="slrot", description="Rotation numbers, gap labels and Green functions for "
                                           "almost periodic Sturm-Liouville operators.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("rho", help="rotation number at one lambda")
    r.add_argument("--coeff", required=True, help="coefficient file")
    r.add_argument("--lambda", dest="lam", type=float, required=True)
    r.add_argument("--err", type=float, default=5e-3, help="target error (default 5e-3)")
    r.add_argument("--x-init", type=float, default=None)
    r.add_argument("--x-max", type=float, default=None)
    r.add_argument("--header", action="store_true", help="print a CSV header line first")
    r.set_defaults(parser=r, func=cmd_rho)

    s = sub.add_parser("scan", help="rotation number curve, plateaus and gap labels")
    s.add_argument("--coeff", required=True)
    s.add_argument("--lmin", type=float, required=True)
    s.add_argument("--lmax", type=float, required=True)
    s.add_argument("--n", type=int, default=401, help="grid points (>= 16)")
    s.add_argument("--err", type=float, default=5e-3)
    s.add_argument("--plateau-tol", type=float, default=5e-3)
    s.add_argument("--min-run", type=int, default=3)
    s.add_argument("--nmax", type=int, default=10)
    s.add_argument("--label-tol", type=float, default=1e-2)
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--out", required=True, help="curve CSV ('-' for stdout)")
    s.add_argument("--svg", default=None)
    s.add_argument("--gaps", default=None, help="gap CSV")
    s.set_defaults(parser=s, func=cmd_scan)

    g = sub.add_parser("green", help="Weyl m-functions and the Green function diagonal")
    g.add_argument("--coeff", required=True)
    g.add_argument("--z-re", type=float, required=True)
    g.add_argument("--z-im", type=float, required=True)
    g.add_argument("--x-from", type=float, default=0.0)
    g.add_argument("--x-to", type=float, default=None)
    g.add_argument("--x-step", type=float, default=None)
    g.add_argument("--xfar", type=float, default=None)
    g.add_argument("--gap-lambda", action="store_true", help="accept real z, asserting it lies in a gap")
    g.add_argument("--check-shift", type=float, default=None, metavar="T",
                   help="also report the shift-covariance deviation for translation T")
    g.add_argument("--out", default="-")
    g.set_defaults(parser=g, func=cmd_green)

    b = sub.add_parser("bands", help="Hill discriminant and band edges of a periodic triple")
    b.add_argument("--coeff", required=True)
    b.add_argument("--period", type=float, required=True)
    b.add_argument("--lmin", type=float, required=True)
    b.add_argument("--lmax", type=float, required=True)
    b.add_argument("--n", type=int, default=400)
    b.add_argument("--out", default="-")
    b.add_argument("--edges", default="-", help="edge list CSV (default stdout)")
    b.set_defaults(parser=b, func=cmd_bands)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "x_to", 0.0) is None:
        args.x_to = args.x_from
    try:
        return args.func(args)
    except _Usage as exc:
        args.parser.print_usage(sys.stderr)
        print(f"slrot: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NotDecayed as exc:
        print(f"slrot: {exc}", file=sys.stderr)
        return EXIT_NOT_DECAYED
    except NotPeriodic as exc:
        print(f"slrot: {exc}", file=sys.stderr)
        return EXIT_NOT_PERIODIC
    except (SLRotError, ValueError, OSError) as exc:
        print(f"slrot: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
