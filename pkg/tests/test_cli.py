import io
import subprocess
import sys

import pytest

from huckel_vqd import cli


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out)
    return code, out.getvalue()


def test_record_roundtrip():
    line = cli.format_record("level", index=3, energy=-0.0, spurious=True, source="upper_half", err=1.5e-7)
    recs = cli.parse_records(line + "\n\n" + line)
    assert len(recs) == 2
    assert recs[0] == {"record": "level", "index": "3", "energy": "0", "spurious": "yes",
                       "source": "upper_half", "err": "1.5e-07"}
    with pytest.raises(ValueError):
        cli.format_record("x", name="two words")
    with pytest.raises(ValueError):
        cli.parse_records("index=1")
    with pytest.raises(ValueError):
        cli.parse_records("record=x junk")


def test_hamiltonian_text_and_records():
    code, text = run("hamiltonian", "C2H4")
    assert code == 0 and text.splitlines()[1] == "1.0 X"
    code, text = run("hamiltonian", "C6H6", "--format", "records")
    recs = cli.parse_records(text)
    assert recs[0]["terms"] == "16" and recs[0]["qubits"] == "3"
    assert recs[1] == {"record": "term", "index": "0", "coeff": "0.75", "string": "IIX"}


def test_hamiltonian_mlfit_guard():
    assert run("hamiltonian", "C16H10", "--decomposition", "mlfit")[0] == cli.EXIT_INVALID
    code, text = run("hamiltonian", "C4H6", "--decomposition", "mlfit", "--format", "records")
    assert code == 0 and cli.parse_records(text)[0]["terms"] == "3"


def test_spectrum_exact_records():
    code, text = run("spectrum", "C3H4", "--algo", "exact", "--format", "records")
    recs = cli.parse_records(text)
    assert code == 0
    assert recs[0]["spurious"] == "1"
    assert [float(r["energy"]) for r in recs[1:]] == pytest.approx([-2, 1, 1])


def test_spectrum_vqd_records():
    code, text = run("spectrum", "C4H6", "--restarts", "1", "--format", "records")
    recs = cli.parse_records(text)
    assert code == 0
    head = recs[0]
    assert head["algo"] == "vqd" and head["setting"] == "ideal" and head["depth"] == "10"
    levels = [r for r in recs if r["record"] == "level"]
    assert [float(r["energy"]) for r in levels] == pytest.approx([-1.618034, -0.618034, 0.618034, 1.618034], abs=1e-6)
    assert float(recs[-1]["mean_abs_error"]) < 1e-6


def test_spectrum_table_output():
    code, text = run("spectrum", "C2H4", "--algo", "symvqd", "--restarts", "1")
    assert code == 0 and "spurious states: 0" in text and "upper_half" in text


def test_orbitals_records():
    code, text = run("orbitals", "C4H4", "--restarts", "1", "--format", "records")
    recs = [r for r in cli.parse_records(text) if r["record"] == "orbital"]
    assert code == 0 and len(recs) == 4
    assert all(float(r["overlap"]) > 0.999999 for r in recs)
    assert recs[0]["coeffs"] == "0.500000,0.500000,0.500000,0.500000"
    assert [r["degeneracy"] for r in recs] == ["1", "2", "2", "1"]


def test_orbitals_rejects_noisy():
    assert run("orbitals", "C2H4", "--setting", "noisy")[0] == cli.EXIT_INVALID


def test_molecule_file(tmp_path):
    f = tmp_path / "allyl.mol"
    f.write_text("molecule allyl\natom 0\natom 1\natom 2\nbond 0 1\nbond 1 2\n")
    code, text = run("spectrum", str(f), "--algo", "exact", "--format", "records")
    recs = cli.parse_records(text)
    assert code == 0 and recs[0]["molecule"] == "allyl" and recs[0]["spurious"] == "1"
    bad = tmp_path / "bad.mol"
    bad.write_text("atom 0\nbond 0 0\n")
    assert run("hamiltonian", "--molecule-file", str(bad))[0] == cli.EXIT_INVALID


def test_validation_exit_codes():
    assert run("spectrum", "C9H9")[0] == cli.EXIT_INVALID
    assert run("spectrum")[0] == cli.EXIT_INVALID
    assert run("spectrum", "C2H4", "--restarts", "0")[0] == cli.EXIT_INVALID
    assert run("spectrum", "C2H4", "--p1", "1.5", "--setting", "noisy")[0] == cli.EXIT_INVALID
    with pytest.raises(SystemExit):
        run("spectrum", "C2H4", "--algo", "magic")


def test_solver_failure_exit_code(monkeypatch):
    from huckel_vqd import solver

    def boom(self, theta):
        return float("inf"), theta * 0

    monkeypatch.setattr(solver._IdealObjective, "value_and_grad", boom)
    assert run("spectrum", "C2H4", "--restarts", "1")[0] == cli.EXIT_SOLVER


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "huckel_vqd.cli", "hamiltonian", "C4H4"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.splitlines()[1:] == ["1.0 IX", "1.0 XX"]
