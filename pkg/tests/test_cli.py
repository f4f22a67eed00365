"""Command-line interface: parsing, formats, determinism, exit codes."""

import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from selfkerr import ChainParams, GaussianPacket, packet_fidelity
from selfkerr.cli import main


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_csv(text):
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rows, f"no CSV rows in {text!r}"
    return rows


def test_kernel_eval_zero_at_zero_chi(capsys):
    code, out, err = run_cli(
        ["kernel-eval", "--sites", "1", "--chi", "0", "--freqs", "0,0,0,0"], capsys
    )
    assert code == 0
    row = read_csv(out)[0]
    assert float(row["value_re"]) == 0.0
    assert float(row["value_im"]) == 0.0
    assert err == ""


def test_kernel_eval_json_echoes_config(capsys):
    code, out, _ = run_cli(
        ["kernel-eval", "--sites", "2", "--chi", "inf",
         "--freqs", "0.1,-0.1,0.05,-0.05", "--format", "json"], capsys
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "kernel-eval"
    assert doc["config"]["chi"] == "inf"
    assert doc["config"]["sites"] == 2
    from selfkerr import kernel_infinite_chi

    want = kernel_infinite_chi(ChainParams(chi=float("inf"), n_sites=2), 0.1, -0.1, 0.05, -0.05)
    got = doc["results"][0]
    assert got["value_re"] == pytest.approx(want.real, rel=1e-10)
    assert got["value_im"] == pytest.approx(want.imag, rel=1e-10)


def test_kernel_eval_multiple_quadruples(capsys):
    code, out, _ = run_cli(
        ["kernel-eval", "--sites", "1", "--chi", "1",
         "--freqs", "0,0,0,0", "--freqs", "0.2,-0.2,0.1,-0.1"], capsys
    )
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 2
    want = -(32.0 / math.pi) / (1.0 + 1.0j)
    assert float(rows[0]["value_re"]) == pytest.approx(want.real, rel=1e-10)


def test_transport_row_counts(capsys):
    code, out, _ = run_cli(
        ["transport", "--sites", "1", "--chi", "1", "--sigma", "0.1",
         "--points", "16", "--what", "both"], capsys
    )
    assert code == 0
    rows = read_csv(out)
    singles = [r for r in rows if r["kind"] == "single"]
    twos = [r for r in rows if r["kind"] == "two"]
    assert len(singles) == 16
    assert len(twos) == 16 * 16
    assert len(rows) == 16 + 16 * 16


def test_fidelity_matches_library(capsys):
    code, out, _ = run_cli(
        ["fidelity", "--sites", "3", "--chi", "inf", "--sigma", "0.05"], capsys
    )
    assert code == 0
    row = read_csv(out)[0]
    f, ov = packet_fidelity(ChainParams(chi=float("inf"), n_sites=3), GaussianPacket(bandwidth=0.05))
    assert float(row["fidelity"]) == pytest.approx(f, rel=1e-10)
    assert float(row["overlap_re"]) == pytest.approx(ov.value.real, rel=1e-10)
    # gate-fidelity commands default to the hard interaction
    code2, out2, _ = run_cli(["fidelity", "--sites", "3", "--sigma", "0.05"], capsys)
    assert out2 == out


def test_optimize_exit_zero(capsys):
    code, out, _ = run_cli(
        ["optimize", "--sites", "2", "--points", "128", "--sigma-tol", "1e-3"], capsys
    )
    assert code == 0
    row = read_csv(out)[0]
    assert 0.05 < float(row["sigma_opt"]) < 0.2
    assert 0.9 < float(row["f_max"]) < 1.0


def test_sweep_deterministic_and_range_parsing(capsys):
    args = ["sweep", "--sites", "2..3", "--points", "128"]
    code1, out1, _ = run_cli(args, capsys)
    code2, out2, _ = run_cli(args, capsys)
    assert code1 == code2 == 0
    assert out1 == out2
    rows = read_csv(out1)
    assert [r["n_sites"] for r in rows] == ["2", "3"]


def test_sweep_threads_do_not_change_output(capsys):
    base = ["sweep", "--sites", "2,3", "--points", "128"]
    _, serial, _ = run_cli(base + ["--threads", "1"], capsys)
    _, parallel, _ = run_cli(base + ["--threads", "2"], capsys)
    assert serial == parallel


def test_fit_roundtrip_exact(tmp_path, capsys):
    # synthetic sweep table following an exact power law in cascade length
    table = tmp_path / "sweep.csv"
    with open(table, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n_sites", "sigma_opt", "f_max"])
        for n in range(4, 13):
            writer.writerow([n, 0.35 * (2 * n) ** -0.81, 1.0 - 0.5 * (2 * n) ** -1.6])
    code, out, _ = run_cli(
        ["fit", "--input", str(table), "--column", "one_minus_f"], capsys
    )
    assert code == 0
    row = read_csv(out)[0]
    assert float(row["prefactor"]) == pytest.approx(0.5, rel=1e-10)
    assert float(row["exponent"]) == pytest.approx(-1.6, abs=1e-10)
    code, out, _ = run_cli(
        ["fit", "--input", str(table), "--column", "sigma_opt"], capsys
    )
    row = read_csv(out)[0]
    assert float(row["prefactor"]) == pytest.approx(0.35, rel=1e-10)
    assert float(row["exponent"]) == pytest.approx(-0.81, abs=1e-10)
    # against raw site count the exponent is unchanged, the prefactor rescales
    code, out, _ = run_cli(
        ["fit", "--input", str(table), "--column", "sigma_opt", "--abscissa", "sites"],
        capsys,
    )
    row = read_csv(out)[0]
    assert float(row["exponent"]) == pytest.approx(-0.81, abs=1e-10)
    assert float(row["prefactor"]) == pytest.approx(0.35 * 2**-0.81, rel=1e-10)


def test_fit_missing_column_is_usage_error(tmp_path, capsys):
    table = tmp_path / "bad.csv"
    table.write_text("foo,bar\n1,2\n")
    code, out, err = run_cli(["fit", "--input", str(table)], capsys)
    assert code == 2
    assert out == ""
    assert "n_sites" in err or "column" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["kernel-eval", "--sites", "1", "--freqs", "1,2,3"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["kernel-eval", "--sites", "1", "--chi", "-2", "--freqs", "0,0,0,0"])
    assert exc.value.code == 2


def test_oracle_check_nonconvergence_exit_three(capsys):
    code, out, err = run_cli(
        ["oracle-check", "--sites", "1", "--chi", "1", "--sigma", "0.15",
         "--dt", "0.08", "--n-freq", "5", "--tolerance", "1e-9"], capsys
    )
    assert code == 3
    assert "1e-09" in err
    # the data row still goes to stdout, diagnostics stay on stderr
    row = read_csv(out)[0]
    assert row["converged"] == "false"


def test_oracle_check_success(capsys):
    code, out, err = run_cli(
        ["oracle-check", "--sites", "1", "--chi", "1", "--sigma", "0.15",
         "--dt", "0.05", "--n-freq", "5", "--tolerance", "0.05"], capsys
    )
    assert code == 0
    row = read_csv(out)[0]
    assert row["converged"] == "true"
    assert float(row["max_rel_error"]) < 0.05
    assert float(row["output_photon_number"]) == pytest.approx(2.0, abs=1e-5)


def test_continuum_check_runs(capsys):
    code, out, _ = run_cli(
        ["continuum-check", "--sites", "10,20", "--chi", "1",
         "--sigma", "0.01", "--points", "128"], capsys
    )
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 2
    # finite chi = gamma targets the continuum phase pi/2
    assert float(rows[0]["target_im"]) == pytest.approx(-1.0, abs=1e-12)
    assert float(rows[1]["abs_error"]) < float(rows[0]["abs_error"])


def test_output_file_matches_stdout(tmp_path, capsys):
    args = ["kernel-eval", "--sites", "2", "--chi", "1", "--freqs", "0.1,0.2,0.3,0"]
    _, stdout_text, _ = run_cli(args, capsys)
    path = tmp_path / "out.csv"
    code, out, _ = run_cli(args + ["--output", str(path)], capsys)
    assert code == 0
    assert out == ""
    assert path.read_text() == stdout_text


def test_gamma_rescales_presentation_only(capsys):
    base = ["kernel-eval", "--sites", "1", "--chi", "1", "--freqs", "0.5,0,0.25,0.25"]
    _, out1, _ = run_cli(base, capsys)
    _, out2, _ = run_cli(base + ["--gamma", "2"], capsys)
    r1 = read_csv(out1)[0]
    r2 = read_csv(out2)[0]
    # frequencies scale up with gamma, kernel values scale down
    assert float(r2["omega1"]) == pytest.approx(2 * float(r1["omega1"]))
    # printed values carry 12 significant digits
    assert float(r2["value_re"]) == pytest.approx(float(r1["value_re"]) / 2, rel=1e-10)
    assert float(r2["value_im"]) == pytest.approx(float(r1["value_im"]) / 2, rel=1e-10)


def test_console_entry_point():
    # the installed script must be importable and runnable end to end
    proc = subprocess.run(
        [sys.executable, "-m", "selfkerr.cli", "kernel-eval", "--sites", "1",
         "--chi", "0", "--freqs", "0,0,0,0"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1] == "0,0,0,0,0,0"
