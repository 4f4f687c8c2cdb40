import csv
import io
import subprocess
import sys

import pytest

from arqsched.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_capacity(capsys):
    code, out, _ = run(capsys, "capacity", "--n", "3", "--p", "0.8", "--r", "0.2", "--delay", "1")
    assert code == 0
    got = {r["quantity"]: float(r["value"]) for r in rows(out)}
    assert got["sum_capacity_two_user"] == pytest.approx(0.65)
    assert got["sum_capacity_upper"] == pytest.approx(0.725)


def test_genie_and_optimal(capsys):
    code, out, _ = run(capsys, "genie", "--n", "1", "--m", "4", "--p", "0.8", "--r", "0.2", "--delay", "0.5,0.5")
    assert code == 0
    r = rows(out)[0]
    assert float(r["value"]) == pytest.approx(2.0)
    assert r["runtime_ms"] == "" and r["policy"] == "genie"
    code, out, _ = run(capsys, "optimal", "--n", "2", "--m", "1", "--pi", "0.3,0.6")
    assert float(rows(out)[0]["value"]) == pytest.approx(0.6)


def test_value_exact_and_mc(capsys):
    code, out, _ = run(capsys, "value", "--n", "2", "--m", "2", "--pi", "0.5,0.5")
    assert float(rows(out)[0]["value"]) == pytest.approx(1.15)
    assert rows(out)[0]["stderr"] == ""
    code, out, _ = run(capsys, "value", "--n", "8", "--m", "10", "--episodes", "500", "--seed", "3")
    r = rows(out)[0]
    assert code == 0 and r["episodes"] == "500" and r["seed"] == "3" and float(r["stderr"]) > 0


def test_errors_exit_nonzero(capsys):
    code, _, err = run(capsys, "simulate", "--episodes", "0", "--seed", "1")
    assert code == 2 and "episodes" in err
    code, _, err = run(capsys, "simulate", "--episodes", "10")
    assert code == 2 and "seed" in err
    code, _, _ = run(capsys, "value", "--n", "8", "--m", "10")
    assert code == 2
    code, _, _ = run(capsys, "value", "--p", "1.0", "--r", "0.0")
    assert code == 2
    code, _, _ = run(capsys, "value", "--delay", "0.5,0.4")
    assert code == 2


def test_simulate_log(tmp_path, capsys):
    log = tmp_path / "log.csv"
    code, out, _ = run(capsys, "simulate", "--n", "3", "--m", "5", "--episodes", "50", "--seed", "1",
                       "--policy", "greedy-queue", "--log", str(log), "--log-episodes", "2")
    assert code == 0
    entries = rows(log.read_text())
    assert len(entries) == 10
    assert {e["user"] for e in entries} <= {"1", "2", "3"}
    assert [int(e["slot"]) for e in entries[:5]] == [5, 4, 3, 2, 1]
    assert b"\r\n" not in log.read_bytes()


def test_same_seed_same_bytes(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.csv"
        subprocess.run(
            [sys.executable, "-m", "arqsched", "simulate", "--n", "4", "--m", "8", "--delay", "1/3,1/3,1/3",
             "--episodes", "3000", "--seed", "11", "--out", str(path)],
            check=True,
        )
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].endswith(b"\n") and b"\r" not in outs[0]


def test_config_file(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# sample\nn = 2\nm = 2\npi = 0.5,0.5\np = 0.8\nr = 0.2\n")
    code, out, _ = run(capsys, "value", "--config", str(conf))
    assert float(rows(out)[0]["value"]) == pytest.approx(1.15)
    # flags override the file
    code, out, _ = run(capsys, "value", "--config", str(conf), "--m", "1")
    assert float(rows(out)[0]["value"]) == pytest.approx(0.5)


def test_region(tmp_path, capsys):
    poly = tmp_path / "region.dat"
    code, out, _ = run(capsys, "region", "--n", "2", "--delay", "0,1", "--polygon", str(poly))
    assert code == 0
    kinds = [r["kind"] for r in rows(out)]
    assert kinds.count("inner_vertex") == 4 and kinds.count("outer_constraint") == 3 and kinds.count("genie_vertex") == 5
    assert "# genie" in poly.read_text()
    code, out, _ = run(capsys, "region", "--n", "3")
    assert [r["kind"] for r in rows(out)].count("inner_vertex") == 7


def test_counterexample(capsys):
    code, out, _ = run(capsys, "counterexample", "--kind", "N3-delay1-m4")
    got = rows(out)
    assert [round(float(r["gap"]), 4) for r in got] == [0.0227, 0.0701]
    assert all(r["verdict"] == "greedy suboptimal" for r in got)
    code, out, _ = run(capsys, "counterexample", "--kind", "nonidentical-N2")
    assert [round(float(r["gap"]), 4) for r in rows(out)] == [-0.0119, -0.0452]
    code, out, _ = run(capsys, "counterexample", "--kind", "general-m", "--m", "5")
    r = rows(out)[0]
    assert float(r["oracle_delta"]) <= 1e-9
    code, _, _ = run(capsys, "counterexample", "--kind", "nonidentical-N2", "--p", "0.6", "--r", "0.3")
    assert code == 2


def test_table_rows(capsys):
    code, out, _ = run(capsys, "table", "1", "--rows", "1")
    r = rows(out)
    assert len(r) == 1 and r[0]["benchmark"] == "optimal" and r[0]["ref_benchmark"] == "6.0707"
    code, out, _ = run(capsys, "table", "2", "--rows", "1", "--episodes", "2000", "--seed", "1")
    r = rows(out)[0]
    assert r["benchmark"] == "genie" and r["episodes"] == "2000"


def test_figure1(capsys):
    code, out, _ = run(capsys, "figure1", "--max-m", "3")
    r = rows(out)
    assert [x["m"] for x in r] == ["1", "2", "3"]
    assert all(float(x["arq_optimal_rate"]) <= float(x["genie_rate"]) + 1e-12 for x in r)
