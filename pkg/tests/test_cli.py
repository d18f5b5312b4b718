import csv
import io
import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from derand.cli import body, report_emit, run
from derand.lincode import write_qmatrix

from conftest import PRINTED_MATRIX


def call(argv, capsys):
    code, rep = run(argv)
    out = capsys.readouterr().out
    return code, rep, out


@pytest.fixture
def printed_qm(tmp_path):
    path = tmp_path / "printed.qm"
    path.write_text(write_qmatrix(2, PRINTED_MATRIX))
    return str(path)


def test_no_args_usage(capsys):
    code, rep = run([])
    assert code == 1 and rep is None
    assert "usage" in capsys.readouterr().err


def test_bad_flag(capsys):
    code, _ = run(["gtest", "verify", "--bogus"])
    assert code == 1


def test_console_script():
    exe = shutil.which("derand")
    cmd = [exe] if exe else [sys.executable, "-m", "derand.cli"]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 1 and "usage" in proc.stderr


def test_ks_verify_exit_0(tmp_path, capsys):
    qm = str(tmp_path / "ks.qm")
    code, rep, _ = call(["gtest", "make", "--kind", "ks", "--q", "4", "--n", "4", "--k", "2", "--matrix-out", qm], capsys)
    assert code == 0 and rep["result"]["rows"] == 16
    code, rep, out = call(["gtest", "verify", "--matrix", qm, "--property", "disjunct:3,0"], capsys)
    assert code == 0 and rep["result"]["status"] == "verified"
    assert json.loads(out)["result"]["status"] == "verified"


def test_printed_matrix_refuted(printed_qm, capsys):
    code, rep, _ = call(["gtest", "verify", "--matrix", printed_qm, "--property", "disjunct:1,0",
                         "--all-witnesses"], capsys)
    assert code == 2 and rep["status"] == "refuted"
    assert rep["anchor"] == "disjunctness verification"
    pairs = [(w["C0"], w["others"]) for w in rep["result"]["witnesses_1based"]]
    assert (3, [6]) in pairs
    assert rep["result"]["witness_columns_1based"] == {"C0": 1, "others": [3]}


def test_record_updates_claims(printed_qm, capsys):
    call(["gtest", "verify", "--matrix", printed_qm, "--property", "disjunct:1,0", "--record"], capsys)
    side = json.loads(open(printed_qm + ".claims.json").read())
    assert side["claims"][0]["status"] == "refuted"


def test_decode_verb(printed_qm, capsys):
    code, rep, _ = call(["gtest", "decode", "--matrix", printed_qm, "--outcome", "11101"], capsys)
    assert rep["result"]["support_1based"] == [1, 2, 3, 4, 6]


def test_cap_exit_3(printed_qm, capsys, monkeypatch):
    monkeypatch.setenv("DERAND_CAPS", "verify=10")
    code, rep, _ = call(["gtest", "verify", "--matrix", printed_qm, "--property", "regular:3,0,1"], capsys)
    assert code == 3 and rep["status"] == "cap"
    assert rep["result"]["error"] == "TooLarge"


def test_report_fields(capsys):
    code, rep, _ = call(["--rng-seed", "5", "channel", "simulate", "--p", "0.1", "--n", "1000"], capsys)
    assert code == 0
    for key in ("tool_version", "config", "seed", "backend", "timings", "anchor"):
        assert key in rep
    assert rep["seed"] == 5 and rep["config"]["rng_seed"] == 5


def test_csv_rows(capsys):
    code, rep, out = call(["--format", "csv", "channel", "audit-bec", "--sets", "4"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == len(rep["result"]["records"]) == 4


def test_json_roundtrip(tmp_path, capsys):
    path = str(tmp_path / "r.json")
    code, rep, _ = call(["--out", path, "gv", "ensemble", "--count", "20"], capsys)
    back = json.load(open(path))
    assert body(back) == body(json.loads(json.dumps(back)))
    assert back["result"]["distances"] == rep["result"]["distances"]


@pytest.mark.parametrize("argv", [
    ["field", "check", "--q", "4,9"],
    ["field", "arith", "--q", "16", "--op", "mul", "2", "4"],
    ["code", "make", "--kind", "rs", "--q", "7", "--n", "7", "--k", "3", "--distance"],
    ["map", "audit", "--n", "8", "--m", "4", "--k", "6", "--sources", "20"],
    ["map", "symfix"],
    ["wiretap", "audit", "--kind", "mds", "--q", "5", "--n", "4", "--k", "2"],
    ["channel", "audit-bsc", "--r", "7"],
    ["channel", "justesen", "--s", "4,8", "--trials", "200"],
    ["--rng-seed", "3", "gv", "ensemble", "--count", "30"],
])
def test_replay_identical(argv, tmp_path, capsys):
    path = str(tmp_path / "rep.json")
    code, rep, _ = call(["--out", path] + argv, capsys)
    assert code == 0, rep
    code, res, _ = call(["replay", path], capsys)
    assert code == 0 and res["identical"]


def test_replay_detects_change(tmp_path, capsys):
    path = str(tmp_path / "rep.json")
    call(["--out", path, "gv", "ensemble", "--count", "10"], capsys)
    rep = json.load(open(path))
    rep["result"]["distances"][0] += 1
    json.dump(rep, open(path, "w"))
    code, res, _ = call(["replay", path], capsys)
    assert code == 2 and not res["identical"]


def test_gv_nw_source(tmp_path, capsys):
    from derand.prand import nw_design
    D = nw_design(20, 56, 8, 4)
    table = np.zeros(256, dtype=int)
    table[np.random.default_rng(2024).permutation(256)[:128]] = 1
    tf, df = tmp_path / "f.txt", tmp_path / "d.json"
    tf.write_text(" ".join(map(str, table)))
    df.write_text(json.dumps({"t": D.t, "s": D.s, "r": D.r, "sets": [list(S) for S in D.sets]}))
    code, rep, _ = call(["gv", "ensemble", "--count", "5", "--source", f"nw:{tf}:{df}"], capsys)
    assert code == 0 and rep["result"]["source"]["kind"] == "nw"
