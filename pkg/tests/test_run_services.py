import json

import numpy as np
import pytest

from granger_gls.common.config import THREADS_ENV
from granger_gls.common.dataset import Dataset, export_csv
from granger_gls.models.schemas import BenchRecord, GraphRecord, TestRecord
from granger_gls.services.run_services import main
from tests.conftest import make_causal_pair


@pytest.fixture
def pair_csv(tmp_path):
    x, y = make_causal_pair(7, n=200)
    return str(export_csv(Dataset.from_series([x, y]), tmp_path / "pair.csv"))


def test_test_command_prints_verdict(pair_csv, capsys):
    assert main(["test", "x", "y", "--data", pair_csv, "--method", "f", "--lag", "2"]) == 0
    out = capsys.readouterr().out
    assert "x -> y (method=f, lag=2)" in out
    assert "verdict: x causes y" in out


def test_test_command_json_output(pair_csv, capsys):
    assert main(["test", "x", "y", "--data", pair_csv, "--json"]) == 0
    record = TestRecord.model_validate_json(capsys.readouterr().out)
    assert record.method == "gls"
    assert record.tau == 39
    assert record.reject
    assert record.verdict == "x causes y"


def test_dump_cov_writes_matrix(pair_csv, tmp_path):
    out = tmp_path / "omega.csv"
    assert main(["test", "x", "y", "--data", pair_csv, "--dump-cov", str(out)]) == 0
    assert np.loadtxt(out, delimiter=",").shape == (199, 199)
    assert main(["test", "x", "y", "--data", pair_csv, "--method", "f", "--dump-cov", str(out)]) == 2


def test_known_mean_and_band_reach_the_covariance(pair_csv, tmp_path):
    centred, uncentred, diagonal = (tmp_path / name for name in ("c.csv", "u.csv", "d.csv"))
    base = ["test", "x", "y", "--data", pair_csv, "--dump-cov"]
    assert main([*base, str(centred)]) == 0
    assert main([*base, str(uncentred), "--known-mean", "0"]) == 0
    assert main([*base, str(diagonal), "--band", "0"]) == 0
    c = np.loadtxt(centred, delimiter=",")
    u = np.loadtxt(uncentred, delimiter=",")
    d = np.loadtxt(diagonal, delimiter=",")
    assert np.all(np.diag(u) >= np.diag(c) - 1e-12)
    assert not np.allclose(u, c)
    np.testing.assert_array_equal(d, np.diag(np.diag(c)))
    assert main([*base, str(diagonal), "--band", "-1"]) == 2


def test_unknown_label_exits_with_usage_code(pair_csv, caplog):
    assert main(["test", "x", "z", "--data", pair_csv]) == 2
    assert "available labels: x, y" in caplog.text


def test_missing_file_exits_with_io_code(tmp_path):
    assert main(["test", "x", "y", "--data", str(tmp_path / "nope.csv")]) == 4


def test_degenerate_series_exits_with_numerical_code(write_csv):
    rows = "\n".join(f"{np.sin(i):.6f},1.0" for i in range(50))
    path = write_csv("x,y\n" + rows + "\n")
    assert main(["test", "x", "y", "--data", str(path), "--method", "f"]) == 3


def test_parse_error_exits_with_usage_code(write_csv):
    path = write_csv("x,y\n1,2\n3,oops\n")
    assert main(["test", "x", "y", "--data", str(path)]) == 2


def test_argparse_errors_exit_with_code_two(pair_csv):
    with pytest.raises(SystemExit) as excinfo:
        main(["simulate", "--scenario", "m9", "--out", "x.csv"])
    assert excinfo.value.code == 2
    with pytest.raises(SystemExit) as excinfo:
        main(["graph", "--data", pair_csv, "--lag", "1", "--auto-lag", "3"])
    assert excinfo.value.code == 2


def test_graph_needs_two_columns(write_csv):
    path = write_csv("only\n1\n2\n3\n4\n5\n")
    assert main(["graph", "--data", str(path)]) == 2


def test_graph_prints_dot_and_writes_json(pair_csv, tmp_path, capsys):
    assert main(["graph", "--data", pair_csv, "--method", "f", "--alpha", "0.01"]) == 0
    dot = capsys.readouterr().out
    assert dot.startswith("digraph causal {")
    assert '"x" -> "y"' in dot

    out_json = tmp_path / "graphs" / "g.json"
    out_dot = tmp_path / "graphs" / "g.dot"
    args = ["graph", "--data", pair_csv, "--method", "f", "--alpha", "0.01", "--out-json", str(out_json), "--out-dot", str(out_dot)]
    assert main(args) == 0
    record = GraphRecord.model_validate_json(out_json.read_text(encoding="utf-8"))
    assert record.nodes == ["x", "y"]
    assert out_dot.read_text(encoding="utf-8") == dot


def test_simulate_is_byte_identical_for_same_seed(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--scenario", "m2", "--seed", "3", "--out", str(first)]) == 0
    assert main(["simulate", "--scenario", "m2", "--seed", "3", "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert first.read_text(encoding="utf-8").splitlines()[0] == "x,y"
    meta = json.loads((tmp_path / "a.csv.meta.json").read_text(encoding="utf-8"))
    assert meta["scenario"] == "m2"
    assert len(meta["beta"]) == 15
    assert meta["parameters"]["break_index"] == 300


def test_bench_json_is_identical_across_thread_counts(capsys):
    args = ["bench", "--pairs", "2", "--n", "150", "--lag", "2", "--scenarios", "m3,ar1", "--json"]
    assert main(["--threads", "1", *args]) == 0
    single = capsys.readouterr().out
    assert main(["--threads", "3", *args]) == 0
    assert capsys.readouterr().out == single
    record = BenchRecord.model_validate_json(single)
    assert [row.scenario for row in record.rows] == ["m3", "ar1"]
    assert record.config.lag_sim == record.config.lag_test == 2


def test_bench_json_is_identical_across_thread_env_values(monkeypatch, capsys):
    args = ["bench", "--pairs", "3", "--n", "150", "--lag", "2", "--scenarios", "m1,ar1", "--json"]
    outputs = []
    for threads in ("1", "4"):
        monkeypatch.setenv(THREADS_ENV, threads)
        assert main(args) == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
    assert BenchRecord.model_validate_json(outputs[0]).config.pairs == 3


def test_bench_rejects_unknown_scenario():
    assert main(["bench", "--pairs", "1", "--scenarios", "m7"]) == 2


def test_cov_command_for_ar1(tmp_path, capsys):
    out, theory = tmp_path / "omega.csv", tmp_path / "theory.csv"
    args = ["cov", "--ar1-phi", "0.9", "--n", "120", "--tau", "30", "--out", str(out), "--theoretical", str(theory)]
    assert main(args) == 0
    text = capsys.readouterr().out
    assert "relative Frobenius error" in text
    assert "sign agreement" in text
    assert np.loadtxt(out, delimiter=",").shape == (120, 120)
    assert np.loadtxt(theory, delimiter=",").shape == (120, 120)


def test_cov_command_for_dataset_column(pair_csv, tmp_path):
    out = tmp_path / "omega.csv"
    assert main(["cov", "--data", pair_csv, "--column", "y", "--no-reflect", "--tau", "20", "--out", str(out)]) == 0
    assert np.loadtxt(out, delimiter=",").shape == (180, 180)
    tapered = tmp_path / "tapered.csv"
    args = ["cov", "--data", pair_csv, "--column", "y", "--tau", "20", "--known-mean", "0", "--band", "0"]
    assert main([*args, "--out", str(tapered)]) == 0
    omega = np.loadtxt(tapered, delimiter=",")
    np.testing.assert_array_equal(omega, np.diag(np.diag(omega)))
    assert main(["cov", "--out", str(out)]) == 2
