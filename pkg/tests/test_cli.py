import csv
import io
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slrot.apfun import CoefficientTriple, FrequencyBase, TrigPolynomial, module_of
from slrot.cli import main, parse_coefficients, render_coefficients
from slrot.errors import DimensionError, ParseError, PositivityError

FREE = """[base]
omega = 1.0
[r]
const = 1
[w]
const = 1
"""

FIG1 = """# p = 1/(sin x + 2), q = 2 cos x, w = 2 - cos x
[base]
omega = 1.0
[r]
const = 2
term = 0 1 @ 1
[q]
term = 2 0 @ 1
[w]
const = 2
term = -1 0 @ 1
"""

FIG2 = """[base]
omega = 1.0, 1.4142135623730951
[r]
const = 2
term = 0 1 @ 1 0
[q]
term = 2 0 @ 0 1   # 2 cos(sqrt2 x)
[w]
const = 2
term = -1 0 @ 1 0
"""


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, text in (("free", FREE), ("fig1", FIG1), ("fig2", FIG2)):
        p = tmp_path / f"{name}.txt"
        p.write_text(text)
        out[name] = str(p)
    return out


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


# ---------------------------------------------------------------- parsing

def test_parse_examples(fig1, fig2):
    v1 = parse_coefficients(FIG1)
    assert v1.hull_floor_r > 0 and v1.hull_floor_w > 0
    assert module_of(v1).rank == 1 and v1.r(0.3) == pytest.approx(fig1.r(0.3))
    v2 = parse_coefficients(FIG2)
    assert module_of(v2).rank == 2 and v2.q(1.1) == pytest.approx(fig2.q(1.1))


def test_positivity_rejected():
    with pytest.raises(PositivityError) as exc:
        parse_coefficients("[base]\nomega = 1\n[r]\nconst = 1\n[w]\nterm = 1 0 @ 1\nconst = 1\n")
    assert exc.value.section == "w"


def test_missing_function_section_is_zero():
    with pytest.raises(PositivityError) as exc:
        parse_coefficients("[base]\nomega = 1\n[r]\nconst = 1\n")
    assert exc.value.section == "w"


@pytest.mark.parametrize("text,line", [
    ("[base]\nomega = 1\n[r]\nconst = x\n", 4),
    ("[base]\nomega = 1\n[s]\n", 3),
    ("omega = 1\n", 1),
    ("[base]\nomega = 1, -2\n", 2),
    ("[base]\nomega = 1\n[r]\nterm = 1 0 1\n", 4),
    ("[base]\nomega = 1\n[r]\nconst = 1\nconst = 2\n", 5),
    ("[base]\nomega = 1\n[r]\nterm = 1 0 @ 1.5\n", 4),
    ("[base]\nomega = 1\n[r]\nconst = 1\njunk\n", 5),
])
def test_parse_errors_have_line_numbers(text, line):
    with pytest.raises(ParseError) as exc:
        parse_coefficients(text)
    assert exc.value.line == line
    assert str(exc.value).startswith(f"line {line}:")


def test_missing_base():
    with pytest.raises(ParseError):
        parse_coefficients("[r]\nconst = 1\n")


def test_dimension_error():
    with pytest.raises(DimensionError) as exc:
        parse_coefficients("[base]\nomega = 1, 1.4142135623730951\n[r]\nconst = 2\nterm = 0 1 @ 1\n")
    assert exc.value.line == 5


def test_roundtrip_examples():
    for text in (FREE, FIG1, FIG2):
        v = parse_coefficients(text)
        assert parse_coefficients(render_coefficients(v)) == v
        assert render_coefficients(parse_coefficients(render_coefficients(v))) == render_coefficients(v)


amp = st.floats(-1.0, 1.0, allow_nan=False)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3), amp, amp), max_size=4, unique_by=lambda t: (t[0], t[1])),
       st.floats(-5, 5), amp, amp)
def test_roundtrip_property(qterms, qc, ra, wb):
    base = FrequencyBase((1.0, math.sqrt(2.0)))
    terms, seen = [], set()
    for a, b, A, B in qterms:
        k = (a, b)
        if k == (0, 0) or k in seen or (-a, -b) in seen:
            continue
        seen.add(k)
        terms.append((k, A, B))
    v = CoefficientTriple.certified(TrigPolynomial(base, 3.0, (((1, 0), ra, 0.1),)),
                                    TrigPolynomial(base, qc, tuple(terms)),
                                    TrigPolynomial(base, 2.5, (((0, 1), 0.2, wb),)))
    assert parse_coefficients(render_coefficients(v)) == v


# ---------------------------------------------------------------- rho

def test_rho_free(capsys, files):
    code, out, _ = run(capsys, "rho", "--coeff", files["free"], "--lambda", "4")
    assert code == 0
    row = out.strip().split(",")
    assert row[0] == "4.0" and abs(float(row[1]) - 2.0) < 1e-3 and row[4] == "combined"


def test_rho_header(capsys, files):
    code, out, _ = run(capsys, "rho", "--coeff", files["free"], "--lambda", "1", "--header")
    assert out.splitlines()[0] == "lambda,rho,err,X,method"


def test_rho_malformed(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("[base]\nomega = one\n")
    code, _, err = run(capsys, "rho", "--coeff", str(bad), "--lambda", "1")
    assert code == 1 and "line 2" in err


def test_rho_missing_lambda(capsys, files):
    with pytest.raises(SystemExit) as exc:
        main(["rho", "--coeff", files["free"]])
    assert exc.value.code == 1


def test_rho_horizon(capsys, files):
    code, out, _ = run(capsys, "rho", "--coeff", files["free"], "--lambda", "2", "--err", "1e-9",
                       "--x-init", "50", "--x-max", "100")
    assert code == 2 and out.strip().endswith(",horizon")


def test_missing_file(capsys):
    code, _, err = run(capsys, "rho", "--coeff", "/nonexistent/file", "--lambda", "1")
    assert code == 1 and err


# ---------------------------------------------------------------- scan

def test_scan_rejects_small_n(capsys, files, tmp_path):
    code, _, _ = run(capsys, "scan", "--coeff", files["free"], "--lmin", "0", "--lmax", "1", "--n", "1",
                     "--out", str(tmp_path / "c.csv"))
    assert code == 1


def test_scan_outputs(capsys, files, tmp_path):
    args = ["scan", "--coeff", files["free"], "--lmin", "0", "--lmax", "9", "--n", "16", "--err", "1e-2"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    svg, gaps = tmp_path / "a.svg", tmp_path / "g.csv"
    assert run(capsys, *args, "--out", str(a), "--svg", str(svg), "--gaps", str(gaps))[0] == 0
    assert run(capsys, *args, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.reader(io.StringIO(a.read_text())))
    assert rows[0] == ["lambda", "rho", "err", "flag"] and len(rows) == 17
    for lam, r, e, _ in rows[1:]:
        assert abs(float(r) - math.sqrt(float(lam))) <= max(2 * float(e), 1e-9)
    root = ET.parse(svg).getroot()
    assert root.tag.endswith("svg") and root.get("version") == "1.1"
    poly = [el for el in root.iter() if el.tag.endswith("polyline")]
    assert len(poly) == 1 and len(poly[0].get("points").split()) == 16
    assert gaps.read_text().splitlines()[0] == "lambda_lo,lambda_hi,rho,label_n1,label_value,residual,ambiguous"


def test_scan_fig1_gap_rows(capsys, files, tmp_path):
    out, gaps, svg = tmp_path / "c.csv", tmp_path / "g.csv", tmp_path / "s.svg"
    code, _, _ = run(capsys, "scan", "--coeff", files["fig1"], "--lmin", "-0.2", "--lmax", "1.2", "--n", "36",
                     "--out", str(out), "--gaps", str(gaps), "--svg", str(svg))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(gaps.read_text())))
    assert len(rows) >= 3
    for row in rows:
        assert abs(2 * float(row["rho"]) - round(2 * float(row["rho"]))) <= 1e-2
    guides = [el for el in ET.parse(svg).getroot().iter() if el.get("class") == "plateau"]
    assert len(guides) == len(rows)


def test_scan_fig2_sqrt2_label(capsys, files, tmp_path):
    out, gaps = tmp_path / "c.csv", tmp_path / "g.csv"
    code, _, _ = run(capsys, "scan", "--coeff", files["fig2"], "--lmin", "-0.3", "--lmax", "0.1", "--n", "21",
                     "--out", str(out), "--gaps", str(gaps))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(gaps.read_text())))
    assert any(int(r["label_n2"]) != 0 for r in rows)


# ---------------------------------------------------------------- green

def test_green_free(capsys, files):
    code, out, _ = run(capsys, "green", "--coeff", files["free"], "--z-re", "0", "--z-im", "1")
    assert code == 0
    header, row = out.strip().splitlines()
    assert header == "x,re_m_plus,im_m_plus,re_m_minus,im_m_minus,re_G,im_G,re_dG,im_dG"
    vals = [float(t) for t in row.split(",")]
    assert abs(complex(vals[5], vals[6]) - (math.sqrt(2) / 4) * (1 + 1j)) < 1e-6


def test_green_grid_and_shift(capsys, files):
    code, out, err = run(capsys, "green", "--coeff", files["fig1"], "--z-re", "1", "--z-im", "1",
                         "--x-from", "0", "--x-to", "1", "--x-step", "0.25",
                         "--check-shift", "6.283185307179586")
    assert code == 0 and len(out.strip().splitlines()) == 6
    dev = float(err.strip().splitlines()[-1].split(",")[1])
    assert dev <= 1e-6


def test_green_real_needs_flag(capsys, files):
    code, _, err = run(capsys, "green", "--coeff", files["free"], "--z-re", "-1", "--z-im", "0")
    assert code == 1 and "gap-lambda" in err
    code, out, _ = run(capsys, "green", "--coeff", files["free"], "--z-re", "-1", "--z-im", "0", "--gap-lambda")
    assert code == 0 and float(out.splitlines()[1].split(",")[5]) == pytest.approx(0.5)


def test_green_not_decayed(capsys, files):
    code, _, _ = run(capsys, "green", "--coeff", files["free"], "--z-re", "1", "--z-im", "0.01", "--xfar", "1")
    assert code == 3


# ---------------------------------------------------------------- bands

def test_bands_free(capsys, files):
    code, out, _ = run(capsys, "bands", "--coeff", files["free"], "--period", repr(2 * math.pi),
                       "--lmin", "0.1", "--lmax", "3", "--n", "16")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "lambda,delta,in_band"
    for line in lines[1:17]:
        lam, d, _ = line.split(",")
        assert abs(float(d) - 2 * math.cos(2 * math.pi * math.sqrt(float(lam)))) < 1e-8
    assert lines[17] == "lambda_edge,kind"


def test_bands_not_periodic(capsys, files):
    code, _, _ = run(capsys, "bands", "--coeff", files["fig2"], "--period", repr(2 * math.pi),
                     "--lmin", "0", "--lmax", "1")
    assert code == 4


def test_bands_fig1_edges(capsys, files, tmp_path):
    edges = tmp_path / "e.csv"
    code, _, _ = run(capsys, "bands", "--coeff", files["fig1"], "--period", repr(2 * math.pi),
                     "--lmin", "0", "--lmax", "1.2", "--n", "40", "--out", str(tmp_path / "b.csv"),
                     "--edges", str(edges))
    assert code == 0
    assert len(edges.read_text().splitlines()) > 1


# ---------------------------------------------------------------- help

@pytest.mark.parametrize("sub", [[], ["rho"], ["scan"], ["green"], ["bands"]])
def test_help(sub):
    with pytest.raises(SystemExit) as exc:
        main(sub + ["--help"])
    assert exc.value.code == 0


def test_console_entry(files):
    proc = subprocess.run([sys.executable, "-m", "slrot", "rho", "--coeff", files["free"], "--lambda", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("1.0,")
