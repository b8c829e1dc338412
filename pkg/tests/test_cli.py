"""Command-line interface: parsing, reports, exit codes, serialization."""

import numpy as np
import pytest

from mcinner.cli import (emit_plotdata, load_inner, main, parse_problem,
                         serialize_inner)

DISK = """
curve outer
nodes 96
coeff 1 1 0
"""

ANNULUS = """
curve outer
nodes 96
coeff 1 2.718281828459045 0
curve hole
nodes 96
coeff 1 1 0
"""


@pytest.fixture()
def disk_file(tmp_path):
    p = tmp_path / "disk.dom"
    p.write_text(DISK)
    return str(p)


@pytest.fixture()
def annulus_file(tmp_path):
    p = tmp_path / "annulus.dom"
    p.write_text(ANNULUS)
    return str(p)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_problem_directives():
    out = parse_problem("""
# data
node 0 0 0.5 0
node 0.1 0.2 0.3 -0.4 1 0   # hermite node
zero 1.5 0 2
point 0.3 0.3
row 0 0 1 0
lam 0 1
""")
    assert out["nodes"][0] == (0j, [0.5 + 0j])
    assert out["nodes"][1] == (0.1 + 0.2j, [0.3 - 0.4j, 1.0 + 0j])
    assert out["zeros"] == [(1.5 + 0j, 2)]
    assert out["points"] == [0.3 + 0.3j]
    assert out["rows"] == [[0j, 1 + 0j]]
    assert out["lam"] == 1j


def test_parse_problem_rejects_garbage():
    with pytest.raises(ValueError, match="line 1"):
        parse_problem("node 0 0 0.5")
    with pytest.raises(ValueError, match="unknown directive"):
        parse_problem("frobnicate 1 2")


def test_measures_report(tmp_path, annulus_file):
    out = str(tmp_path / "rep.txt")
    code = main(["measures", "--domain", annulus_file, "--out", out])
    assert code == 0
    text = open(out).read()
    assert "tool = mcinner" in text
    row = [ln for ln in text.splitlines()
           if ln.startswith("period_matrix_row_0")][0]
    assert float(row.split("=")[1]) == pytest.approx(2 * np.pi, abs=1e-6)


def test_solve_report_and_exit_codes(tmp_path, disk_file):
    prob = write(tmp_path, "p.prob", "node 0 0 0 0\nnode 0.5 0 0.5 0\n")
    out = str(tmp_path / "solve.txt")
    code = main(["solve", "--domain", disk_file, "--problem", prob,
                 "--out", out, "--starts", "4"])
    assert code == 0
    text = open(out).read()
    m = [ln for ln in text.splitlines() if ln.startswith("m_star")][0]
    assert float(m.split("=")[1]) == pytest.approx(1.0, abs=1e-5)
    # plot data and the serialized function are written alongside
    for suffix in ("_boundary.csv", "_grid.csv", "_zeros.csv", ".inner"):
        assert (tmp_path / ("solve.txt" + suffix)).exists()
    head = open(out + "_boundary.csv").readline().strip()
    assert head == "x,y,abs_f,arg_f"


def test_feasibility_exit_code_two(tmp_path, disk_file):
    prob = write(tmp_path, "p.prob",
                 "node 0 0 0.99 0\nnode 0.05 0 -0.99 0\n")
    out = str(tmp_path / "feas.txt")
    code = main(["feasibility", "--domain", disk_file, "--problem", prob,
                 "--out", out, "--starts", "4"])
    assert code == 2
    assert "classification = infeasible" in open(out).read()


def test_error_exit_code_one(tmp_path, disk_file, capsys):
    prob = write(tmp_path, "p.prob", "node 5 0 0.5 0\n")
    out = str(tmp_path / "bad.txt")
    code = main(["solve", "--domain", disk_file, "--problem", prob,
                 "--out", out])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_report_determinism(tmp_path, disk_file):
    prob = write(tmp_path, "p.prob", "node 0.2 0.1 0.4 -0.3\n")
    outs = []
    for name in ("a.txt", "b.txt"):
        out = str(tmp_path / name)
        assert main(["pick", "--domain", disk_file, "--problem", prob,
                     "--out", out]) == 0
        lines = [ln for ln in open(out).read().splitlines()
                 if not ln.startswith("timestamp")
                 and not ln.startswith("out =")]
        outs.append(lines)
    assert outs[0] == outs[1]


def test_inner_roundtrip(tmp_path, annulus_file, annulus):
    zeros = write(tmp_path, "z.prob",
                  f"zero {np.exp(0.35)} 0\nzero "
                  f"{np.exp(0.65) * np.cos(0.8)} "
                  f"{np.exp(0.65) * np.sin(0.8)}\nlam 0 1\n")
    out = str(tmp_path / "inner.txt")
    assert main(["inner", "--domain", annulus_file, "--problem", zeros,
                 "--out", out]) == 0
    f = load_inner(annulus, open(out + ".inner").read())
    f2 = load_inner(annulus, serialize_inner(f))
    z = np.array([1.3 + 0.9j, -1.7 + 0.4j, 2.1j])
    assert np.abs(f.value(z) - f2.value(z)).max() < 1e-12
    assert f.lam == 1j


def test_pick_command(tmp_path, disk_file):
    prob = write(tmp_path, "p.prob", "node 0 0 0.37 0\n")
    out = str(tmp_path / "pick.txt")
    assert main(["pick", "--domain", disk_file, "--problem", prob,
                 "--out", out]) == 0
    m = [ln for ln in open(out).read().splitlines()
         if ln.startswith("m_star")][0]
    assert float(m.split("=")[1]) == pytest.approx(0.37, abs=1e-9)


def test_emit_plotdata_grid_interior_only(tmp_path, disk):
    from mcinner.inner import assemble_inner
    f = assemble_inner(disk, [0.2 + 0.1j])
    base = str(tmp_path / "plot")
    emit_plotdata(f, disk.domain, base, grid=15)
    rows = open(base + "_grid.csv").read().splitlines()[1:]
    pts = np.array([complex(float(r.split(",")[0]), float(r.split(",")[1]))
                    for r in rows])
    assert len(pts) > 0
    assert np.all(np.abs(pts) < 1.0)
