import csv
import io
import json

import pytest

from gqconc import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def load(path):
    with open(path) as fh:
        return json.load(fh)


def test_table1_json_report(tmp_path, capsys):
    path = tmp_path / "t.json"
    code, out, _ = run(capsys, "table1", "--out", str(path))
    assert code == 0
    assert "[PASS]" in out
    doc = load(path)
    assert doc["schema_version"] == cli.SCHEMA_VERSION
    assert set(doc) == {"schema_version", "metadata", "rows", "summary"}
    assert set(doc["metadata"]) == {"command", "seed", "config", "versions", "timestamp"}
    assert doc["metadata"]["command"] == "table1"
    assert len(doc["rows"]) == 30
    assert doc["summary"]["failed"] == 0
    row = next(r for r in doc["rows"] if r["k"] == 8 and r["q"] == 1.7)
    assert row["tau_qk"] == pytest.approx(0.03230, abs=5e-6)


def test_csv_to_stdout_uses_17_digits(capsys):
    code, out, err = run(capsys, "table1", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 30
    assert "[PASS]" in err and "[PASS]" not in out
    assert float(rows[0]["computed"]) == cli.w_table1_value(8, 3, 1.3)
    assert cli._fmt(0.1) == "0.10000000000000001"


def test_examples_and_lemmas_pass(capsys):
    assert run(capsys, "examples")[0] == 0
    assert run(capsys, "lemmas", "--grid-t-points", "15", "--grid-q-points", "4")[0] == 0


def test_sweep_is_deterministic(tmp_path, capsys):
    docs = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        code, _, _ = run(capsys, "sweep", "--samples", "3", "--seed", "7", "--q-grid", "1.5,2.0",
                         "--out", str(path))
        assert code == 0
        docs.append(load(path))
    for d in docs:
        d["metadata"].pop("timestamp")
        d["metadata"]["config"].pop("out")
    assert docs[0] == docs[1]
    assert {r["k"] for r in docs[0]["rows"]} == {3}
    other = tmp_path / "c.json"
    run(capsys, "sweep", "--samples", "3", "--seed", "8", "--q-grid", "1.5,2.0", "--out", str(other))
    assert load(other)["rows"] != docs[0]["rows"]


def test_sweep_k_restriction(tmp_path, capsys):
    path = tmp_path / "s.json"
    code, _, _ = run(capsys, "sweep", "--samples", "2", "--n-qubits", "4", "--k", "4", "--q-grid", "1.5",
                     "--out", str(path))
    assert code == 0
    assert {r["k"] for r in load(path)["rows"]} == {4}


def test_roof_verify_small(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, _, _ = run(capsys, "roof-verify", "--dims", "2x2", "--samples", "3", "--ranks", "2",
                     "--q-grid", "1.5", "--out", str(path))
    assert code == 0
    rows = load(path)["rows"]
    assert len(rows) == 3 and all(r["rank"] == 2 for r in rows)


def test_figures_writes_tables(tmp_path, capsys):
    out_dir = tmp_path / "fig"
    code, _, _ = run(capsys, "figures", "--out", str(out_dir), "--grid-t-points", "9", "--grid-q-points", "3")
    assert code == 0
    names = {p.name for p in out_dir.iterdir()}
    assert {"l_q_curve.csv", "mq_surface.csv", "report.json"} <= names


@pytest.mark.parametrize("argv", [
    ["sweep", "--q-grid", "0.5"],
    ["sweep", "--k", "7"],
    ["sweep", "--n-qubits", "2"],
    ["sweep", "--samples", "0"],
    ["roof-verify", "--dims", "3x3"],
    ["roof-verify", "--roof-restarts", "0"],
    ["lemmas", "--grid-t-points", "2"],
])
def test_bad_values_exit_2(argv, capsys):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["no-such-command"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["sweep", "--q-grid", "a,b"])
    assert exc.value.code == 2


def test_config_precedence(tmp_path):
    conf = tmp_path / "run.cfg"
    conf.write_text("# comment\nseed = 5\nsamples = 4\nq-grid = 1.2,1.4\n")
    parser = cli.build_parser()
    cfg = cli.resolve_config(parser.parse_args(["sweep", "--config", str(conf), "--seed", "9"]))
    assert cfg["seed"] == 9
    assert cfg["samples"] == 4
    assert cfg["q_grid"] == [1.2, 1.4]
    assert cfg["n_qubits"] == cli.DEFAULTS["n_qubits"]


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert run(capsys, "table1", "--config", str(bad))[0] == 2
    bad.write_text("seed\n")
    assert run(capsys, "table1", "--config", str(bad))[0] == 2
    assert run(capsys, "table1", "--config", str(tmp_path / "missing.cfg"))[0] == 2


def test_mismatch_exits_1(monkeypatch, capsys):
    shifted = {k: tuple(v + 0.01 for v in vals) for k, vals in cli.TABLE1_VALUES.items()}
    monkeypatch.setattr(cli, "TABLE1_VALUES", shifted)
    code, _, err = run(capsys, "table1")
    assert code == 1
    assert "[FAIL]" in err


def test_json_to_stdout(capsys):
    code, out, err = run(capsys, "table1")
    assert code == 0
    assert json.loads(out)["summary"]["failed"] == 0
    assert "[PASS]" in err
