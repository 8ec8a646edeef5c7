import io
import json
import subprocess
import sys

import numpy as np
import pytest

from btstrata import cli, dieudonne as dd


def call(*argv):
    buf = io.StringIO()
    code = cli.run(list(argv), buf)
    return code, buf.getvalue()


def envelope(*argv):
    code, out = call(*argv)
    return code, json.loads(out.splitlines()[0])


def test_nu():
    code, env = envelope("nu", "--r", "2", "--l", "3", "--p", "3")
    assert code == 0 and env["ok"]
    assert env["result"]["nu"] == 28 and env["provenance"]["nu"] == "both-agree"
    assert set(env) >= {"request", "result", "provenance", "precision", "ok"}


def test_neighbors_below():
    code, env = envelope("neighbors", "--below", "--n", "4", "--p", "3", "--d", "1", "--dprime", "0")
    assert code == 0
    assert env["result"]["count"] == 28 and env["provenance"]["count"] == "both-agree"
    assert env["precision"]["min_slack"] >= 1


def test_gap():
    code, env = envelope("gap", "--space", "M", "--sigma", "2", "--n", "5", "--p", "3")
    assert code == 0
    assert env["result"]["sigma"] == 2 and env["result"]["dim_sequence"] == [5, 4, 3, 3]


def test_byte_stable():
    argv = ("neighbors", "--above", "--n", "4", "--d", "0", "--dprime", "1")
    assert call(*argv) == call(*argv)


@pytest.mark.parametrize("argv,needle", [
    (("nu", "--r", "2", "--l", "3", "--p", "4"), "--p"),
    (("vertex-type", "--n", "3", "--i", "1"), "n*i"),
    (("neighbors", "--below", "--n", "4", "--d", "1", "--dprime", "1"), "d'"),
    (("eo-data", "--d", "2", "--sigma", "5"), "sigma"),
])
def test_usage_errors(argv, needle):
    code, out = call(*argv)
    assert code == 2
    err = json.loads(out)
    assert needle in err["message"] and err["request"]["command"] == argv[0]


def test_argparse_error_exit_code():
    assert cli.run(["nu", "--r", "x"], io.StringIO()) == 2


def test_csv_and_text():
    code, out = call("fermat", "--l", "3", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "l,p,formula,enumerated,agree" and lines[1] == "3,3,280,280,True"
    code, out = call("nu", "--r", "1", "--l", "2", "--format", "text")
    assert "nu: 4" in out and out.rstrip().splitlines()[-1].startswith("provenance:")


def test_json_lines_listing():
    code, out = call("enumerate-points", "--n", "4", "--d", "1", "--m", "1", "--list", "--verify")
    lines = [json.loads(x) for x in out.splitlines()]
    assert code == 0 and lines[0]["result"]["count"] == 28
    assert lines[0]["provenance"]["gap"] == "both-agree"
    assert len(lines) == 29 and [x["index"] for x in lines[1:]] == list(range(28))


def test_stratum_vertex():
    code, env = envelope("stratum-vertex", "--n", "4", "--d", "1", "--m", "1", "--index", "5")
    assert code == 0 and env["result"]["t"] == env["result"]["gap"] == 0


def test_classify_space_file(tmp_path):
    sp = dd.scramble(dd.standard_space("M", 3, sigma=1, n=4), 12)
    path = tmp_path / "space.json"
    path.write_text(json.dumps({"p": 3, "m": 1, "n": 4, "r": 1, "F_matrix": sp.Fm.tolist(),
                                "V_matrix": sp.Vm.tolist(), "pairing": sp.pairing.tolist()}))
    code, env = envelope("classify-space", "--file", str(path))
    assert code == 0 and env["result"]["class"] == "M(1,4)"
    assert all(v["ok"] for v in env["result"]["axioms"].values())


def test_classify_literal_S():
    code, env = envelope("classify-space", "--space", "S", "--literal-text")
    assert not env["result"]["axioms"]["signature"]["ok"]
    assert "class" not in env["result"]


def test_weyl_commands():
    code, env = envelope("dl-dim", "--d", "3", "--sigma", "2")
    assert env["result"]["dim"] == 2
    code, env = envelope("dl-irreducible", "--m", "5", "--I", "1,2,4")
    assert env["result"]["irreducible"] and env["provenance"]["irreducible"] == "both-agree"
    code, env = envelope("eo-data", "--d", "2", "--sigma", "1", "--printed")
    assert env["result"]["I_sigma"] == [4] and not env["result"]["flags"]["F_stable"]


def test_local_graph_and_witness():
    code, env = envelope("local-graph", "--n", "4", "--d", "1")
    assert env["result"]["type_counts"] == {"0": 28, "1": 1} and env["result"]["connected"]
    code, env = envelope("witness", "--n", "5", "--d", "2", "--dprime", "2", "--target", "0")
    assert code == 0


def test_verify_subset():
    code, env = envelope("verify", "--only", "1,2,11")
    assert code == 0 and env["result"]["all_pass"]
    assert [c["criterion"] for c in env["result"]["criteria"]] == [1, 2, 11]


def test_console_script_and_threads():
    env = {"BTSTRATA_THREADS": "2", "BTSTRATA_NO_JIT": "1", "PATH": "/usr/local/bin:/usr/bin:/bin"}
    out = subprocess.run([sys.executable, "-m", "btstrata.cli", "nu", "--r", "1", "--l", "2"],
                         capture_output=True, text=True, env=env, check=True).stdout
    doc = json.loads(out)
    assert doc["threads"] == 2 and doc["precision"]["backend"] == "numpy"
