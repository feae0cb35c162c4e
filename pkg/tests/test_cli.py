import io
import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entmeter.channels import embed_point_to_point, point_to_point_choi, random_channel, random_cpptp
from entmeter.cli import main
from entmeter.fileio import (
    FileFormatError,
    dump_operator,
    load_channel,
    load_operator,
    save_channel,
    save_operator,
)
from entmeter.generators import random_state
from entmeter.operators import HermitianOperator, SystemLayout, maximally_entangled, tensor


@pytest.fixture
def files(tmp_path):
    bell = maximally_entangled(2)
    save_operator(bell, tmp_path / "bell.op")
    prod = tensor(random_state(SystemLayout.of(A=2), seed=1),
                  random_state(SystemLayout.of(B=2, b_side=["B"]), seed=2))
    save_operator(prod, tmp_path / "product.op")
    save_operator(HermitianOperator(np.eye(4) / 4, bell.layout), tmp_path / "mixed.op")
    ident = np.zeros((4, 4))
    ident[np.ix_([0, 3], [0, 3])] = 1
    rows = "\n".join(" ".join(f"{x} 0" for x in r) for r in ident)
    (tmp_path / "identity2.chan").write_text("in: A'=2 ; out: B=2\n" + rows + "\n")
    dep = embed_point_to_point(point_to_point_choi(lambda x: np.trace(x) * np.eye(2) / 2, 2, 2))
    save_channel(dep, tmp_path / "depolarizing.chan")
    save_channel(random_cpptp((2, 2), seed=3), tmp_path / "cpptp.chan")
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


# -- file format ---------------------------------------------------------------------------


@given(st.integers(0, 2**32 - 1))
def test_operator_round_trip_is_exact(seed):
    rho = random_state((2, 3), seed=seed)
    back = load_operator(io.StringIO(dump_operator(rho)))
    np.testing.assert_array_equal(back.matrix, rho.matrix)
    assert back.layout == rho.layout


def test_channel_round_trip(tmp_path):
    ch = random_channel((2, 2), seed=5)
    save_channel(ch, tmp_path / "c.chan")
    back = load_channel(tmp_path / "c.chan")
    np.testing.assert_array_equal(back.matrix, ch.matrix)
    assert back.in_dims == ch.in_dims and back.out_dims == ch.out_dims


def test_header_format():
    text = dump_operator(maximally_entangled(2))
    assert text.splitlines()[0] == "dims: A=2,B=2 ; bside: B"
    assert len(text.splitlines()) == 5


@pytest.mark.parametrize(
    "text",
    [
        "0.5 0 0 0\n0 0 0.5 0\n",  # no header
        "dims: A=2 ; bside: A\n1 0 0 0\n",  # too few rows
        "dims: A=2\n1 0 0\n0 0 1 0\n",  # short row
        "dims: A=x\n1 0\n",  # bad dimension
        "dims: A=2 ; bside: B\n1 0 0 0\n0 0 0 0\n",  # unknown bside label
        "dims: A=2\n1 0 1 0\n0 0 0 0\n",  # not Hermitian
        "dims: A=2\nnan 0 0 0\n0 0 0 0\n",  # non-finite
    ],
)
def test_malformed_operator_files(text):
    with pytest.raises(FileFormatError):
        load_operator(io.StringIO(text))


def test_channel_dims_mismatch():
    rows = "\n".join(" ".join("0 0" for _ in range(4)) for _ in range(4))
    with pytest.raises(FileFormatError):
        load_channel(io.StringIO("in: A'=2 ; out: B=2\ndims: S=2,B=3 ; bside: B\n" + rows))
    with pytest.raises(FileFormatError):
        load_channel(io.StringIO("dims: S=2,B=2 ; bside: B\n" + rows))


# -- measure --------------------------------------------------------------------------------


def test_measure_en_state(files, capsys):
    code, out, _ = run(capsys, "measure", "en-state", files / "bell.op")
    assert code == 0
    assert "value         1.000000" in out


def test_measure_kappa_channel(files, capsys):
    code, out, _ = run(capsys, "measure", "kappa-channel", files / "identity2.chan")
    assert code == 0
    assert "value         1.000000" in out


def test_measure_json_output(files, capsys):
    code, out, _ = run(capsys, "measure", "rmax-state", files / "bell.op", "--output", "json")
    assert code == 0
    d = json.loads(out)
    assert d["value"] == pytest.approx(1.0, abs=1e-6)
    assert d["raw"] == pytest.approx(2.0, abs=1e-6)
    assert d["status"] == "optimal"
    assert {"primal_value", "dual_value", "gap", "solver"} <= set(d)


@pytest.mark.parametrize(
    "measure,target,expected",
    [
        ("emin-state", "bell.op", 1.0),
        ("w0-state", "bell.op", 1.0),
        ("kappa-state", "product.op", 0.0),
        ("en-channel", "depolarizing.chan", 0.0),
        ("rmax-channel", "identity2.chan", 1.0),
        ("emin-channel-lb", "identity2.chan", 1.0),
    ],
)
def test_measure_values(files, capsys, measure, target, expected):
    code, out, _ = run(capsys, "measure", measure, files / target, "--output", "json", "--restarts", "1")
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(expected, abs=1e-6)


def test_measure_divergences(files, capsys):
    code, out, _ = run(capsys, "measure", "dmax", files / "bell.op", "--sigma", files / "mixed.op")
    assert code == 0 and "value         2.000000" in out
    code, out, _ = run(capsys, "measure", "renyi", files / "bell.op", "--sigma", files / "mixed.op",
                       "--alpha", "2")
    assert code == 0 and "value         2.000000" in out
    code, _, err = run(capsys, "measure", "renyi", files / "bell.op", "--sigma", files / "mixed.op")
    assert code == 1 and "alpha" in err


def test_missing_file_is_input_error(files, capsys):
    code, out, err = run(capsys, "measure", "en-state", files / "missing.op")
    assert code == 1
    assert out == ""
    assert "missing.op" in err


def test_wrong_file_kind_is_input_error(files, capsys):
    code, _, err = run(capsys, "measure", "en-channel", files / "bell.op")
    assert code == 1 and err


def test_solver_failure_exit_code(files, capsys):
    code, _, err = run(capsys, "measure", "kappa-state", files / "bell.op", "--max-iter", "1", "--solver", "native")
    assert code == 2
    assert "solver failure" in err


def test_unknown_measure(capsys):
    assert main(["measure", "nonsense", "x.op"]) == 1


# -- check ----------------------------------------------------------------------------------


def test_check_examples(files, capsys):
    assert run(capsys, "check", "cpptp", files / "depolarizing.chan")[0] == 0
    assert run(capsys, "check", "cpptp", files / "cpptp.chan")[0] == 0
    assert run(capsys, "check", "cpptp", files / "identity2.chan")[0] == 3
    assert run(capsys, "check", "ppt", files / "bell.op")[0] == 3
    assert run(capsys, "check", "ppt", files / "product.op")[0] == 0
    assert run(capsys, "check", "ppt-prime", files / "bell.op")[0] == 3
    assert run(capsys, "check", "ppt", files / "missing.op")[0] == 1


# -- verify ----------------------------------------------------------------------------------


def test_verify_writes_report(tmp_path, capsys):
    report = tmp_path / "suite.jsonl"
    code, out, _ = run(capsys, "verify", "ordering", "divergences", "--trials", "2", "--seed", "7",
                       "--report", report)
    assert code == 0
    assert "ordering" in out
    rows = [json.loads(x) for x in report.read_text().splitlines()]
    assert [r["property"] for r in rows] == ["ordering", "divergences"]


def test_verify_unknown_suite(capsys):
    code, _, err = run(capsys, "verify", "no-such-suite")
    assert code == 1 and "unknown suite" in err


def test_verify_zero_trials(capsys):
    assert run(capsys, "verify", "ordering", "--trials", "0")[0] == 1


def test_console_module_entry(files):
    proc = subprocess.run([sys.executable, "-m", "entmeter.cli", "check", "ppt", str(files / "bell.op")],
                          capture_output=True, text=True)
    assert proc.returncode == 3
    assert "not a member" in proc.stdout
