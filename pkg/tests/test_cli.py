import csv
import io
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from xxzpin.cli import main

SVG = "{http://www.w3.org/2000/svg}"


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_spectrum_fig2_point(capsys):
    code, out, _ = run(
        ["spectrum", "--bc", "kink", "--sites", "13", "--spin", "0.5", "--delta", "2.25",
         "--field", "0.3,0,0", "--site", "7", "--k", "16"], capsys)
    assert code == 0
    r = rows(out)
    assert len(r) == 16
    vals = [float(x["eigenvalue"]) for x in r]
    assert vals[0] == pytest.approx(-0.15, abs=1e-10)
    assert min(abs(v - 0.15) for v in vals) < 1e-9


def test_spectrum_free_kink_zeros(capsys):
    code, out, _ = run(["spectrum", "--bc", "kink", "--sites", "8", "--field", "0,0,0", "--k", "9"], capsys)
    assert code == 0
    assert all(abs(float(x["eigenvalue"])) < 1e-9 for x in rows(out))


def test_spectrum_sector_resolved(capsys, tmp_path):
    svg = tmp_path / "s.svg"
    code, out, _ = run(
        ["spectrum", "--bc", "droplet", "--sites", "6", "--field", "0,0,0.2", "--site", "3",
         "--k", "5", "--sector-resolved", "--svg", str(svg)], capsys)
    assert code == 0
    r = rows(out)
    assert r[0]["sector_m"] == "3" and float(r[0]["eigenvalue"]) == pytest.approx(0.1)
    ET.parse(svg)


@pytest.mark.parametrize(
    "args",
    [
        ["spectrum", "--field", "1,2"],
        ["spectrum", "--field", "a,b,c"],
        ["spectrum", "--field", "nan,0,0"],
        ["spectrum", "--spin", "0.3"],
        ["spectrum", "--delta", "0.9"],
        ["spectrum", "--bc", "sideways"],
        ["spectrum", "--sites", "4", "--site", "9"],
        ["spectrum", "--sector-resolved", "--field", "0.5,0,0", "--sites", "4"],
        ["verify", "--suite", "nope"],
        ["figure", "fig99"],
        ["spectrum", "--config", "/nonexistent/file"],
        ["sweep", "--param", "b4", "--sites", "4"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_2(args, capsys):
    code, _, _ = run(args, capsys)
    assert code == 2


def test_gap_certify_pass(capsys):
    code, out, _ = run(
        ["gap-certify", "--bc", "droplet", "--sites", "10", "--delta", "2.25", "--field", "0,0,0.3",
         "--site", "5", "--check"], capsys)
    assert code == 0
    assert "check: bound ≤ exact: PASS" in out
    assert "gamma_provenance: closed-form g3^{+}" in out


def test_gap_certify_kink_record(capsys):
    code, out, _ = run(["gap-certify", "--bc", "kink", "--sites", "12", "--field", "1,0,0", "--site", "6"], capsys)
    assert code == 0
    rec = dict(line.split(": ", 1) for line in out.splitlines())
    assert rec["n_l"] == "1" and rec["n_r"] == "1" and rec["check"] == "not run"


def test_gap_certify_refused(capsys):
    code, _, err = run(["gap-certify", "--bc", "kink", "--sites", "6", "--field", "0,0,1", "--site", "3"], capsys)
    assert code == 3
    assert "gapless" in err


def test_verify_quick(capsys):
    code, out, _ = run(["verify", "--suite", "all", "--quick"], capsys)
    assert code == 0
    assert "checks passed" in out.splitlines()[-1]
    assert "FAIL" not in out


def test_verify_spin_identity_suite(capsys):
    code, out, _ = run(["verify", "--suite", "appendixA"], capsys)
    assert code == 0
    assert out.count("PASS") == 15


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nbc = droplet\nsites=5\nfield = 0,0,0.4\nsite=3\nk=3\nseed = 5\n")
    code, out, _ = run(["spectrum", "--config", str(cfg)], capsys)
    assert code == 0
    assert float(rows(out)[0]["eigenvalue"]) == pytest.approx(0.2)
    code, out, _ = run(["spectrum", "--config", str(cfg), "--field", "0,0,0.6"], capsys)
    assert float(rows(out)[0]["eigenvalue"]) == pytest.approx(0.3)


def test_bad_config_line(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("sites 5\n")
    code, _, _ = run(["spectrum", "--config", str(cfg)], capsys)
    assert code == 2


def test_sweep_deterministic(tmp_path, capsys):
    args = ["sweep", "--bc", "kink", "--sites", "7", "--param", "b1", "--start", "-0.5", "--stop", "0.5",
            "--steps", "5", "--k", "4", "--site", "4"]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert run(args + ["--out", str(a), "--svg", str(tmp_path / "a.svg"), "--threads", "2"], capsys)[0] == 0
    assert run(args + ["--out", str(b), "--threads", "1"], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    r = rows(a.read_text())
    assert len(r) == 20 and list(r[0]) == ["B1", "index", "eigenvalue", "status"]
    root = ET.parse(tmp_path / "a.svg").getroot()
    assert len(root.findall(f"{SVG}polyline")) == 4


def test_sector_sweep(capsys):
    code, out, _ = run(
        ["sweep", "--bc", "droplet", "--sites", "6", "--site", "3", "--param", "b3", "--start", "0",
         "--stop", "1", "--steps", "3", "--k", "3", "--sector-resolved"], capsys)
    assert code == 0
    r = rows(out)
    assert list(r[0]) == ["B3", "index", "eigenvalue", "sector_m", "n", "status"]
    assert len(r) == 9


def test_figure_fig1(tmp_path, capsys, oracle):
    out = tmp_path / "fig1.csv"
    assert run(["figure", "fig1", "--out", str(out)], capsys)[0] == 0
    r = rows(out.read_text())
    assert len(r) == 41
    up = np.array([float(x["all_up"]) for x in r])
    down = np.array([float(x["all_down"]) for x in r])
    i = np.argmin(np.abs(up - down))
    A = oracle["A"]
    # values carry 12 significant digits
    assert float(r[i]["B"]) == pytest.approx(A, abs=1e-11)
    assert up[i] == pytest.approx(A / 2, abs=1e-11)
    root = ET.parse(out.with_suffix(".svg")).getroot()
    assert root.tag == f"{SVG}svg"


def test_figure_fig7_ground_sector(tmp_path, capsys):
    out = tmp_path / "fig7.csv"
    assert run(["figure", "fig7", "--out", str(out)], capsys)[0] == 0
    r = rows(out.read_text())
    ground = [x for x in r if x["ground"] == "1"]
    assert len(ground) == 1 and ground[0]["n"] == "13"


@pytest.mark.slow
def test_figure_fig6_row_count(tmp_path, capsys):
    out = tmp_path / "fig6.csv"
    assert run(["figure", "fig6", "--out", str(out)], capsys)[0] == 0
    assert len(rows(out.read_text())) == 2**13


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "xxzpin.cli", "verify", "--suite", "spinflip"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "checks passed" in proc.stdout
