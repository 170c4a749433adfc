import math

import numpy as np
import pytest

from uscpair import cli
from uscpair.model import PulseSpec, SystemParams
from uscpair.protocol import FalsificationLeg, FalsificationReport

TOY_CONFIG = """
[system]
n_max = 6

[pulses]
configuration = lambda
T = 20.0
tau = 12.0
w_s_peak = 0.1
w_p_peak = 0.03

[losses]
kappa = 1e-3

[integrator]
rel_tol = 1e-8
abs_tol = 1e-10
n_samples = 100
"""


def _write_toy(tmp_path, extra=""):
    path = tmp_path / "toy.ini"
    path.write_text(TOY_CONFIG + extra, encoding="utf-8")
    return str(path)


def _split_csv(path):
    meta, header, rows = {}, None, []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            meta[key.strip()] = value.strip()
        elif header is None:
            header = line
        else:
            rows.append(line.split(","))
    return meta, header, rows


def test_usage_errors_exit_1(capsys):
    assert cli.main([]) == 1
    assert cli.main(["frobnicate"]) == 1
    assert cli.main(["run"]) == 1  # --out is required
    assert cli.main(["falsify", "--configuration", "ladder", "--out", "x.csv"]) == 1
    err = capsys.readouterr().err
    assert "uscpair:" in err


def test_missing_config_file_exits_1(tmp_path, capsys):
    out = str(tmp_path / "out.csv")
    assert cli.main(["run", "--config", str(tmp_path / "absent.ini"), "--out", out]) == 1
    assert "absent.ini" in capsys.readouterr().err


def test_bad_override_exits_1(tmp_path, capsys):
    out = str(tmp_path / "out.csv")
    assert cli.main(["run", "--preset", "fig1b", "--set", "n_max=2", "--out", out]) == 1
    assert "n_max" in capsys.readouterr().err


def test_run_writes_history_csv(tmp_path):
    out = tmp_path / "hist.csv"
    assert cli.main(["run", "--config", _write_toy(tmp_path), "--out", str(out)]) == 0
    meta, header, rows = _split_csv(out)
    assert header == (
        "time,p_0u,p_2u,p_phi0,p_fock_0,p_fock_1,p_fock_2,p_fock_3,p_fock_4,"
        "trace,purity,min_eig"
    )
    assert len(rows) == 100
    assert meta["configuration"] == "lambda"
    assert float(meta["kappa"]) == 1e-3
    assert float(meta["omega_p"]) > 0  # derived carrier is echoed resolved
    first = dict(zip(header.split(","), map(float, rows[0])))
    assert first["p_0u"] == pytest.approx(1.0, abs=1e-9)
    assert first["trace"] == pytest.approx(1.0, abs=1e-9)
    # every data cell is a finite number
    values = np.array([[float(x) for x in row] for row in rows])
    assert np.all(np.isfinite(values))


def test_run_output_is_deterministic(tmp_path):
    cfg = _write_toy(tmp_path)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["run", "--config", cfg, "--out", str(out1)]) == 0
    assert cli.main(["run", "--config", cfg, "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_run_without_coupling_shows_no_transfer(tmp_path):
    out = tmp_path / "hist.csv"
    assert (
        cli.main(
            ["run", "--config", _write_toy(tmp_path), "--set", "lam=0", "--out", str(out)]
        )
        == 0
    )
    _, header, rows = _split_csv(out)
    col = header.split(",").index("p_2u")
    assert max(float(row[col]) for row in rows) < 1e-3


def test_scan_writes_efficiency_csv(tmp_path):
    out = tmp_path / "scan.csv"
    code = cli.main(
        [
            "scan",
            "--config",
            _write_toy(tmp_path, "kappa_grid = 0,2e-2\n"),
            "--out",
            str(out),
        ]
    )
    assert code == 0
    meta, header, rows = _split_csv(out)
    assert header == "kappa_over_omega_c,efficiency,error"
    assert [float(row[0]) for row in rows] == [0.0, 2e-2]
    assert all(row[2] == "" for row in rows)
    # first column ascending, efficiencies populated
    effs = [float(row[1]) for row in rows]
    assert all(0.0 <= e <= 1.0 for e in effs)
    assert "kappa" not in meta  # scanned away, only the grid remains
    assert meta["kappa_grid"] == "0,0.02"


def test_scan_needs_a_grid(tmp_path, capsys):
    out = str(tmp_path / "scan.csv")
    assert cli.main(["scan", "--config", _write_toy(tmp_path), "--out", out]) == 1
    assert "kappa_grid" in capsys.readouterr().err


def test_scan_rejects_descending_grid(tmp_path, capsys):
    out = str(tmp_path / "scan.csv")
    code = cli.main(
        ["scan", "--config", _write_toy(tmp_path, "kappa_grid = 1e-3,1e-4\n"), "--out", out]
    )
    assert code == 1
    assert "ascending" in capsys.readouterr().err


def test_spectrum_dump(tmp_path):
    out = tmp_path / "spec.csv"
    args = ["spectrum", "--set", "n_max=8", "--set", "lam=0.5", "--out", str(out)]
    assert cli.main(args) == 0
    _, header, rows = _split_csv(out)
    assert header == "record,k,family,family_index,energy,parity,n,amplitude"
    eigen = [row for row in rows if row[0] == "eigenstate"]
    amps = [row for row in rows if row[0] == "virtual_amplitude"]
    assert len(eigen) == 24
    assert len(amps) == 8
    families = {row[2] for row in eigen}
    assert families == {"rabi", "ancilla"}
    # c_00 is the leading entry of the ground dressed state
    c00 = float(amps[0][7])
    assert 0.9 < c00 < 1.0

    out2 = tmp_path / "spec2.csv"
    assert cli.main(["spectrum", "--set", "n_max=8", "--set", "lam=0.5", "--out", str(out2)]) == 0
    assert out.read_bytes() == out2.read_bytes()


def test_falsify_rejects_unknown_overrides(tmp_path, capsys):
    out = str(tmp_path / "f.csv")
    code = cli.main(
        ["falsify", "--configuration", "lambda", "--set", "kappa=0", "--out", out]
    )
    assert code == 1
    assert "kappa" in capsys.readouterr().err


def test_falsify_report_formatting(tmp_path):
    pulses = PulseSpec(
        w_s_peak=0.1, w_p_peak=0.00972, T=100.0, tau=60.0, omega_p=3.8667, omega_s=1.8667
    )
    report = FalsificationReport(
        "lambda",
        legs=[
            FalsificationLeg("genuine", SystemParams(), pulses, 0.95),
            FalsificationLeg(
                "stray_only",
                SystemParams(lam=0.0, lam_prime=0.5),
                pulses.with_carriers(4.08, 2.24),
                0.64,
            ),
        ],
    )
    lines = cli._falsify_lines(report, {"configuration": "lambda"})
    assert lines[0] == "# configuration = lambda"
    assert lines[1] == "leg,lam,lam_prime,eg_coupling_form,omega_p,omega_s,efficiency"
    assert lines[2].startswith("genuine,0.5,0,full,3.8667,1.8667,0.95")
    assert lines[3].startswith("stray_only,0,0.5,full,4.08,2.24,0.64")


def test_scan_error_cells_are_csv_quoted():
    from uscpair.protocol import ScanPoint

    lines = cli._scan_lines(
        [ScanPoint(1e-4, None, 'boom, with "quotes"')], {"kappa": 1.0, "lam": 0.5}
    )
    assert lines[0] == "# lam = 0.5"
    assert lines[1] == "kappa_over_omega_c,efficiency,error"
    assert lines[2] == '0.0001,,"boom, with ""quotes"""'


def test_twelve_significant_digits():
    assert cli._fmt(math.pi) == "3.14159265359"
    assert cli._fmt(1e-4) == "0.0001"
    assert cli._fmt(0.0972 * 0.1) == "0.00972"
