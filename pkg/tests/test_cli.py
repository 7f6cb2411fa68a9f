import json

import pytest

from hccalab.cli import main
from hccalab.curve import kp_double_and_add, load_curve
from hccalab.io_traces import read_trace


def run(capsys, *argv):
    rc = main([str(a) for a in argv])
    out = capsys.readouterr()
    return rc, out.out, out.err


@pytest.fixture
def keys(tmp_path, capsys):
    key = tmp_path / "k"
    assert run(capsys, "keygen", "--curve", "B233", "--seed", 4, "--out", key)[0] == 0
    return key


def test_keygen_sign_verify(tmp_path, capsys, keys):
    rc, out, _ = run(capsys, "sign", "--key", keys, "--digest", "abc123", "--seed", 2,
                     "--out", tmp_path / "sig")
    assert rc == 0
    sig = out.strip()
    assert len(sig.split(":")) == 2
    pub = f"{keys}.pub"
    assert run(capsys, "verify", "--pub", pub, "--digest", "abc123", "--sig", sig)[:2] == (0, "VALID\n")
    assert run(capsys, "verify", "--pub", pub, "--digest", "abc123", "--sig", tmp_path / "sig")[0] == 0
    rc, out, _ = run(capsys, "verify", "--pub", pub, "--digest", "abc124", "--sig", sig)
    assert (rc, out) == (1, "INVALID\n")


def test_sign_disclose_nonce(tmp_path, capsys, keys):
    run(capsys, "sign", "--key", keys, "--digest", "1", "--out", tmp_path / "s", "--disclose-nonce")
    assert "k = " in (tmp_path / "s").read_text()
    run(capsys, "sign", "--key", keys, "--digest", "1", "--out", tmp_path / "s2")
    assert "k = " not in (tmp_path / "s2").read_text()


def test_kp_matches_oracle(capsys):
    C = load_curve("B283")
    rc, out, _ = run(capsys, "kp", "--curve", "B283", "--k", "1234abcd")
    assert rc == 0
    R = kp_double_and_add(0x1234ABCD, C.G, C)
    assert out == f"x = {R.x.hex()}\ny = {R.y.hex()}\n"
    assert run(capsys, "kp", "--curve", "B283", "--k", "1234abcd", "--oracle")[1] == out
    assert run(capsys, "kp", "--k", "0")[1] == "INFINITY\n"


def test_kp_degenerate_is_negative(capsys):
    C = load_curve("B233")
    rc, _, err = run(capsys, "kp", "--k", format(C.order - 1, "x"))
    assert rc == 1 and "degenerate" in err


def test_kp_transcript(tmp_path, capsys):
    run(capsys, "kp", "--k", "ff", "--transcript", tmp_path / "t.txt")
    lines = (tmp_path / "t.txt").read_text().splitlines()
    assert lines[0].startswith("# curve=B233")
    assert len(lines) == 1 + 7 * 6
    assert lines[3].endswith(" b") and lines[5].endswith(" x")


@pytest.mark.parametrize("argv", [
    ["kp", "--k", "zz"],
    ["kp", "--k", "1", "--point", "1,2"],
    ["kp", "--k", "1", "--curve", "P256"],
    ["simulate", "--out", "x", "--samples-per-cycle", "0"],
    ["nonsense"],
])
def test_usage_errors(capsys, argv, tmp_path):
    assert run(capsys, *argv)[0] == 2


def test_io_errors(tmp_path, capsys):
    assert run(capsys, "attack", tmp_path / "missing.hct", "--out", tmp_path / "r")[0] == 3
    bad = tmp_path / "bad.hct"
    bad.write_bytes(b"HCT1\x01")
    rc, _, err = run(capsys, "attack", bad, "--out", tmp_path / "r")
    assert rc == 3 and "truncated" in err


def test_simulate_and_attack_mult_kind(tmp_path, capsys):
    out = tmp_path / "m.hct"
    rc, _, _ = run(capsys, "simulate", "--kind", "mult", "--count", 12, "--samples-per-cycle", 4,
                   "--out", out, "--seed", 1)
    assert rc == 0
    t = read_trace(out)
    assert t.num_cycles == 108 and t.metadata["config"]["command"] == "simulate"
    rc, out_text, _ = run(capsys, "attack", out, "--out", tmp_path / "r", "--position", 2)
    assert rc == 0 and "skipped" in out_text
    assert run(capsys, "attack", out, "--out", tmp_path / "r", "--position", 7)[0] == 2


def test_attack_needs_whole_slots(tmp_path, capsys):
    out = tmp_path / "m.hct"
    run(capsys, "simulate", "--kind", "mult", "--count", 7, "--samples-per-cycle", 2, "--out", out)
    assert run(capsys, "attack", out, "--out", tmp_path / "r")[0] == 2
    assert run(capsys, "attack", out, "--out", tmp_path / "r", "--truncate")[0] == 0


def test_simulate_csv_then_attack(tmp_path, capsys):
    out = tmp_path / "kp.csv"
    rc, msg, _ = run(capsys, "simulate", "--samples-per-cycle", 2, "--out", out, "--seed", 5)
    assert rc == 0 and "232 slots" in msg
    assert (tmp_path / "kp.csv.json").exists()
    rc, msg, _ = run(capsys, "attack", out, "--out", tmp_path / "r", "--min-auc", 0)
    assert rc == 0 and "windows=1392" in msg and "AUC=" in msg
    csv_lines = (tmp_path / "r.csv").read_text().splitlines()
    assert csv_lines[0].startswith("# {")
    assert csv_lines[1] == "window_index,slot,position,coefficient,label"
    assert len(csv_lines) == 2 + 1392
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["stats"]["n_common"] == 232
    # an impossible threshold turns the same run into a negative outcome
    assert run(capsys, "attack", out, "--out", tmp_path / "r", "--min-auc", 1.01)[0] == 1


def test_mult_experiment_outputs(tmp_path, capsys):
    rc, msg, _ = run(capsys, "mult-experiment", "--repetitions", 3, "--samples-per-cycle", 4,
                     "--out", tmp_path / "e", "--seed", 2)
    assert rc == 0 and "233-bit" in msg and "283-bit" in msg
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0].startswith("# ")
    assert lines[1] == "repetition,K1,K2,K3,K4,bitlength"
    assert len(lines) == 2 + 6
    doc = json.loads((tmp_path / "e.json").read_text())
    assert [r["bit_length"] for r in doc["results"]] == [233, 283]


def _run_files(tmp_path, capsys, sub, argv):
    d = tmp_path / sub
    d.mkdir()
    assert run(capsys, *[a.format(d=d) for a in argv])[0] in (0, 1)
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


@pytest.mark.parametrize("argv", [
    ["keygen", "--seed", "9", "--out", "{d}/key"],
    ["simulate", "--seed", "9", "--sigma", "0.5", "--samples-per-cycle", "3", "--out", "{d}/t.hct"],
    ["simulate", "--seed", "9", "--kind", "mult", "--count", "6", "--sigma", "1",
     "--samples-per-cycle", "3", "--out", "{d}/t.csv"],
    ["mult-experiment", "--seed", "9", "--repetitions", "2", "--samples-per-cycle", "3",
     "--sigma", "0.1", "--out", "{d}/e"],
])
def test_reruns_are_byte_identical(tmp_path, capsys, argv):
    a = _run_files(tmp_path, capsys, "a", argv)
    b = _run_files(tmp_path, capsys, "b", argv)
    assert a and a == b
