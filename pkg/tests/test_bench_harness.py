import pytest

from granger_gls.common.errors import InvalidArgumentError
from granger_gls.models.schemas import BenchRecord
from granger_gls.services.bench_harness.bench_harness import (
    BenchConfig,
    BenchReport,
    ScenarioRow,
    accuracy,
    format_report,
    load_reference,
    run_benchmark,
)
from granger_gls.services.simulation.simulation import Scenario


def _small_config(**kwargs) -> BenchConfig:
    params = dict(pairs=4, n=200, lag_sim=2, lag_test=2, scenarios=("ar1", "m1"))
    params.update(kwargs)
    return BenchConfig(**params)


def test_accuracy():
    assert accuracy([True, True, False, True], True) == 75.0
    assert accuracy([True, True, False, True], False) == 25.0
    with pytest.raises(InvalidArgumentError):
        accuracy([], True)


def test_bench_config_normalises_scenarios():
    cfg = _small_config()
    assert cfg.scenarios == (Scenario.M1, Scenario.AR1)
    assert cfg.as_record()["scenarios"] == ["m1", "ar1"]


@pytest.mark.parametrize(
    "kwargs", [{"pairs": 0}, {"tau_fraction": 1.0}, {"alpha": 0.0}, {"scenarios": ()}]
)
def test_bench_config_validation(kwargs):
    with pytest.raises(InvalidArgumentError):
        _small_config(**kwargs)


def test_bench_config_rejects_unknown_scenario():
    with pytest.raises(ValueError):
        _small_config(scenarios=("m9",))


def test_bench_config_from_toml():
    cfg = BenchConfig.from_toml()
    assert cfg.pairs == 150
    assert cfg.n == 600
    assert cfg.lag_sim == cfg.lag_test == 15
    assert cfg.scenarios == (Scenario.M1, Scenario.M2, Scenario.M3, Scenario.AR1)
    overridden = BenchConfig.from_toml(pairs=3, alpha=None, scenarios=["ar1"])
    assert overridden.pairs == 3
    assert overridden.alpha == 0.05
    assert overridden.scenarios == (Scenario.AR1,)
    with pytest.raises(ValueError):
        BenchConfig.from_toml(window=5)


def test_small_benchmark_is_deterministic_across_threads():
    cfg = _small_config()
    one = run_benchmark(cfg, threads=1)
    many = run_benchmark(cfg, threads=3)
    assert one.to_record() == many.to_record()
    record = BenchRecord.model_validate(one.to_record())
    assert [row.scenario for row in record.rows] == ["m1", "ar1"]
    assert all(row.pair_count == 4 for row in record.rows)
    assert "wall_time" not in one.to_record()


def test_benchmark_repeats_with_same_seed():
    cfg = _small_config(pairs=2, scenarios=("m1",))
    a = run_benchmark(cfg, threads=1)
    b = run_benchmark(cfg, threads=1)
    assert a.to_record() == b.to_record()
    assert a.config.master_seed == 20240601


def test_format_report_lists_reference_values():
    report = BenchReport(
        rows=[
            ScenarioRow(Scenario.M1, 70.0, 95.0, 150),
            ScenarioRow(Scenario.AR1, 93.0, 94.0, 150),
        ],
        config=BenchConfig(),
        wall_time=12.34,
    )
    text = format_report(report)
    assert "96.6%" in text
    assert "94.7%" in text
    assert "95.0%" in text
    assert "wall time: 12.3 s" in text
    assert text.splitlines()[0].startswith("scenario")


def test_load_reference():
    reference = load_reference()
    assert reference["m3"] == [32.6, 42.6]
    assert set(reference) == {"m1", "m2", "m3", "ar1"}


@pytest.mark.slow
def test_default_benchmark_acceptance():
    report = run_benchmark(BenchConfig.from_toml())
    rows = {row.scenario: row for row in report.rows}
    m1, m3, ar1 = rows[Scenario.M1], rows[Scenario.M3], rows[Scenario.AR1]
    assert m1.gls_correct_pct >= m1.classical_correct_pct
    assert m1.gls_correct_pct >= 85.0
    assert m3.gls_correct_pct >= m3.classical_correct_pct
    assert ar1.classical_correct_pct >= 88.0
    assert ar1.gls_correct_pct >= 88.0
