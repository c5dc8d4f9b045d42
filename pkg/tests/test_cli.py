import json

import pytest

from marketrank.cli import main
from marketrank.report import AnalysisReport, read_csv_cells


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_ex1(capsys, markets_dir):
    code, out, _ = run(capsys, "analyze", "--market", markets_dir / "ex1.mkt")
    assert code == 0
    report = json.loads(out)
    assert report["schema"] == "marketrank-report/1"
    assert report["scalars"]["rank"] == 2
    assert report["scalars"]["delta_c"] == pytest.approx(0.75, abs=1e-12)
    F = report["payload"]["sets"]["F"]
    sizes = report["payload"]["partition_sizes"]
    assert sizes == {"0": 0, "1": len(report["cells"]) - len(F), "2": len(F)}
    assert report["config"]["tol"] == 1e-9 and report["config"]["angle_tol"] == 1e-8
    assert report["tool"]["version"] and "seed" in report["config"]


def test_hedge_orthogonal_claim(capsys, markets_dir):
    code, out, _ = run(capsys, "hedge", "--market", markets_dir / "w1only.mkt", "--claim", "W[2]")
    assert code == 0
    scalars = json.loads(out)["scalars"]
    assert scalars["price"] == pytest.approx(0.0, abs=1e-12)
    assert scalars["residual_norm"] > 0.5
    assert scalars["reconstruction_error"] <= 1e-10


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--cases", 200, "--seed", 7)
    assert code == 0
    report = json.loads(out)
    assert report["scalars"]["failed"] == 0
    assert all(s["status"] == "pass" and s["cases"] == 200 for s in report["suites"])


def test_json_is_deterministic_and_round_trips(capsys, markets_dir, tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for path in (first, second):
        assert run(capsys, "analyze", "--market", markets_dir / "ex2.mkt", "--seed", 3, "--out", path)[0] == 0
    assert first.read_bytes() == second.read_bytes()
    text = first.read_text()
    assert AnalysisReport.from_json(text).to_json() == text


def test_csv_matches_json(capsys, markets_dir):
    for command in ("analyze", "measures", "arrange", "orthogonalize"):
        _, js, _ = run(capsys, command, "--market", markets_dir / "ex2.mkt")
        _, cs, _ = run(capsys, command, "--market", markets_dir / "ex2.mkt", "--format", "csv")
        assert cs.splitlines()[0] == "cell_id,time,rank,dd,freedom"
        assert read_csv_cells(cs) == json.loads(js)["cells"]


@pytest.mark.parametrize(
    "argv",
    [
        ["complement", "--market-a", "full.mkt", "--market-b", "w1only.mkt"],
        ["metrics", "--market-a", "ex1.mkt", "--market-b", "w1only.mkt"],
        ["corr", "--market-a", "ex1.mkt"],
        ["corr", "--market-a", "ex1.mkt", "--market-b", "full.mkt"],
        ["measures", "--market", "ex2.mkt"],
        ["arrange", "--market", "ex1.mkt"],
        ["orthogonalize", "--market", "ex2.mkt"],
    ],
)
def test_other_commands(capsys, markets_dir, argv):
    argv = [str(markets_dir / a) if a.endswith(".mkt") else a for a in argv]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert json.loads(out)["command"] == argv[0]


def test_complement_and_metric_values(capsys, markets_dir):
    _, out, _ = run(capsys, "complement", "--market-a", markets_dir / "full.mkt", "--market-b", markets_dir / "w1only.mkt")
    report = json.loads(out)
    assert all(c["dd"] == 1 for c in report["cells"])
    for cell in report["payload"]["complement"]:
        assert abs(cell[0][0]) < 1e-12 and abs(cell[0][1]) > 0
    _, out, _ = run(capsys, "corr", "--market-a", markets_dir / "ex1.mkt")
    assert json.loads(out)["scalars"]["correlation"] == pytest.approx(0.75, abs=1e-12)


def test_usage_errors(capsys, markets_dir):
    code, _, err = run(capsys, "analyze")
    assert code == 2 and json.loads(err)["error"] == "usage"
    code, _, err = run(capsys, "analyze", "--market", markets_dir / "missing.mkt")
    assert code == 2
    code, _, err = run(capsys, "frobnicate", "--format", "csv")
    assert code == 2 and "marketrank: usage" in err
    assert run(capsys)[0] == 2


def test_spec_errors(capsys, markets_dir, tmp_path):
    bad = tmp_path / "bad.mkt"
    bad.write_text("m = 2\nT = 1\nasset X = [W[3], 0]\n")
    code, _, err = run(capsys, "analyze", "--market", bad)
    body = json.loads(err)
    assert code == 3 and body["error"] == "UnknownIdentifier" and body["line"] == 3 and body["column"] == 12
    code, _, err = run(capsys, "hedge", "--market", markets_dir / "ex1.mkt", "--claim", "W[3]", "--format", "csv")
    assert code == 3 and "UnknownIdentifier" in err
    code, _, err = run(capsys, "complement", "--market-a", markets_dir / "w1only.mkt", "--market-b", markets_dir / "full.mkt")
    assert code == 3 and json.loads(err)["error"] == "NotContained"


def test_verify_failure_exit_code(capsys, monkeypatch):
    from marketrank import cli
    from marketrank.verify import SuiteResult

    monkeypatch.setattr(cli, "run_suites", lambda *a, **k: [SuiteResult("broken", 1, 1, "case 0: boom")])
    code, out, err = run(capsys, "verify", "--cases", 1, "--format", "csv")
    assert code == 1
    assert out.splitlines() == ["name,cases,failures,status", "broken,1,1,fail"]
    assert "verification" in err
