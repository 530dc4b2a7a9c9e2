import csv
import json
import subprocess
import sys

from onlineramsey.bounds import BoundCertificate, certificate_holds
from onlineramsey.cli import main
from onlineramsey.game import Transcript


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_estimate_f_writes_rows_and_manifest(tmp_path, capsys):
    out = tmp_path / "f.csv"
    man = tmp_path / "f.json"
    rc = main(["estimate-f", "--target", "K3", "--p", "0.5,0.3,0.2,0.1", "--builder", "bnf",
               "--trials", "300", "--seed", "4", "--out", str(out), "--manifest", str(man)])
    assert rc == 0
    rows = read_csv(out)
    assert len(rows) == 4
    assert [float(r["p"]) for r in rows] == [0.5, 0.3, 0.2, 0.1]
    assert "slope" in capsys.readouterr().err
    first = out.read_bytes()

    rc = main(["replay", "--manifest", str(man)])
    assert rc == 0
    assert "identical" in capsys.readouterr().err
    assert out.read_bytes() == first


def test_replay_detects_tampering(tmp_path):
    out = tmp_path / "t.csv"
    man = tmp_path / "t.json"
    assert main(["tabulate-bounds", "--m", "3,4", "--n", "10,20", "--out", str(out), "--manifest", str(man)]) == 0
    data = json.loads(man.read_text())
    data["outputs"] = {k: "0" * 64 for k in data["outputs"]}
    man.write_text(json.dumps(data))
    assert main(["replay", "--manifest", str(man)]) == 4


def test_replay_detects_edited_output(tmp_path):
    out = tmp_path / "t.csv"
    man = tmp_path / "t.json"
    assert main(["tabulate-bounds", "--m", "3", "--n", "10", "--out", str(out), "--manifest", str(man)]) == 0
    out.write_text(out.read_text() + "junk\n")
    assert main(["replay", "--manifest", str(man)]) == 4


def test_certify_json_round_trips(tmp_path):
    out = tmp_path / "c.json"
    assert main(["certify", "--m", "3", "--n", "40", "--out", str(out)]) == 0
    (row,) = json.loads(out.read_text())
    cert = BoundCertificate.from_dict(row["certificate"])
    assert certificate_holds(cert)
    assert row["N"] == cert.N > 0


def test_simulate_prints_a_transcript(capsys):
    assert main(["simulate", "--builder", "branching", "--painter", "random", "--p", "0.5", "--seed", "2"]) == 0
    t = Transcript.loads(capsys.readouterr().out)
    assert t.outcome in ("red_clique", "blue_clique")


def test_simulate_query_game(capsys):
    assert main(["simulate", "--game", "query", "--builder", "triangle", "--target", "K3", "--p", "0.5"]) == 0
    assert Transcript.loads(capsys.readouterr().out).game == "query"


def test_solve_exact_query(capsys):
    assert main(["solve-exact", "--kind", "query", "--target", "K3", "--p", "1/2", "--vertex-budget", "7"]) == 0
    (row,) = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert row["f"] == "6"


def test_usage_errors_exit_2(capsys):
    assert main(["estimate-f", "--bogus"]) == 2
    assert main(["no-such-command"]) == 2
    assert main([]) == 2
    assert main(["replay"]) == 2


def test_cap_violations_exit_3(tmp_path):
    assert main(["solve-exact", "--kind", "ramsey", "--m", "5", "--n", "5"]) == 3
    assert main(["replay", "--manifest", str(tmp_path / "missing.json")]) == 3
    assert main(["simulate", "--painter", "nonsense"]) == 3


def test_failed_check_exit_4(monkeypatch):
    import onlineramsey.experiments as ex

    def fake(name, params, seed, trials, fmt):
        return [{"holds": False}], "holds\nFalse\n", ex.new_manifest(name, seed, params, trials, "csv")

    monkeypatch.setattr(ex, "run", fake)
    assert main(["tabulate-bounds"]) == 4


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "onlineramsey", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for name in ("simulate", "estimate-f", "certify", "audit-weights", "solve-exact", "tabulate-bounds", "replay"):
        assert name in res.stdout
