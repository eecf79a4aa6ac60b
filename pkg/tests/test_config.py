import json
import logging
from pathlib import Path

import numpy as np
import pytest

from granger_gls.common.config import THREADS_ENV, GrangerConfig, resolve_thread_count
from granger_gls.common.counters import counter
from granger_gls.common.storage import LocalStorage, dumps_json


def test_granger_config_update():
    cfg = GrangerConfig().update(alpha=0.01, tau_fraction=None)
    assert cfg.alpha == 0.01
    assert cfg.tau_fraction == 0.2
    assert cfg == GrangerConfig(alpha=0.01)
    assert cfg.known_mean is None
    assert cfg.band == 2
    assert GrangerConfig().update(known_mean=0.0, band=0) == GrangerConfig(known_mean=0.0, band=0)
    with pytest.raises(ValueError):
        GrangerConfig().update(window=3)


def test_resolve_thread_count_prefers_argument(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "7")
    assert resolve_thread_count(2) == 2
    assert resolve_thread_count(0) == 1
    assert resolve_thread_count() == 7


@pytest.mark.parametrize("raw", ["many", "0", "-3"])
def test_resolve_thread_count_falls_back_on_bad_env(monkeypatch, caplog, raw):
    monkeypatch.setenv(THREADS_ENV, raw)
    with caplog.at_level(logging.WARNING):
        assert resolve_thread_count() == 1
    assert THREADS_ENV in caplog.text


def test_resolve_thread_count_defaults_to_cpu_count(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "")
    monkeypatch.setattr("os.cpu_count", lambda: 6)
    assert resolve_thread_count() == 6


def test_counter_tracks_methods(caplog):
    counter.increment_test("f")
    counter.increment_test("gls")
    counter.increment_test("gls")
    counter.increment_failure("gls")
    assert counter.tests_total == 3
    assert counter.tests_by_method == {"f": 1, "gls": 2}
    assert counter.failures_by_method == {"gls": 1}
    with caplog.at_level(logging.INFO):
        counter.report()
    assert "総検定回数: 3" in caplog.text
    counter.reset()
    assert counter.tests_total == 0
    assert not counter.failures_by_method


def test_local_storage_saves_under_base_dir(tmp_path):
    storage = LocalStorage(tmp_path)
    path = storage.save_text("hello\n", "nested/dir/out.txt")
    assert path == tmp_path / "nested" / "dir" / "out.txt"
    assert path.read_text(encoding="utf-8") == "hello\n"
    assert storage.resolve("/tmp/absolute.txt") == Path("/tmp/absolute.txt")


def test_local_storage_json_and_matrix(tmp_path):
    storage = LocalStorage(tmp_path)
    path = storage.save_json({"b": 1, "a": [1.5]}, "r.json")
    text = path.read_text(encoding="utf-8")
    assert text == dumps_json({"a": [1.5], "b": 1}) + "\n"
    assert list(json.loads(text)) == ["a", "b"]

    matrix = np.array([[1.0, 1.0 / 3.0], [1.0 / 3.0, 2.0]])
    loaded = np.loadtxt(storage.save_matrix_csv(matrix, "m.csv"), delimiter=",")
    np.testing.assert_array_equal(loaded, matrix)
