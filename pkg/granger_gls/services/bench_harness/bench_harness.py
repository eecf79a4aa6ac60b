"""
古典的 Granger F 検定と GLS Granger 検定の正解率を比較するベンチマーク。

各シナリオで同じ生成データに両方の検定を適用し（対応のある比較）、
因果あり (m1, m2, m3) では棄却、因果なし (ar1) では非棄却を正解とします。
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from tqdm import tqdm

from granger_gls.common.config import load_toml, resolve_thread_count
from granger_gls.common.counters import counter
from granger_gls.common.errors import GrangerError, InvalidArgumentError
from granger_gls.common.numerics import DEFAULT_EPS_REL
from granger_gls.estimation.autocovariance import DEFAULT_TAPER_BAND
from granger_gls.services.granger_tests.granger_tests import Method, run_test
from granger_gls.services.simulation.simulation import (
    Scenario,
    derive_seeds,
    generate_scenario_pair,
    load_scenario_defaults,
)

logger = logging.getLogger(__name__)

BENCH_DEFAULTS_PATH = Path(__file__).parent / "bench.toml"
SCENARIO_ORDER = (Scenario.M1, Scenario.M2, Scenario.M3, Scenario.AR1)


@dataclass
class BenchConfig:
    """
    ベンチマークの設定。

    Parameters
    ----------
    pairs : int
        シナリオごとのペア数。
    n : int
        系列長。
    lag_sim : int
        生成に使うラグ L。
    lag_test : int
        検定に使うラグ p。
    tau_fraction : float
        窓長 τ の n_eff に対する割合（0 < tau_fraction < 1）。
    alpha : float
        有意水準。
    master_seed : int
        親シード。
    scenarios : Tuple[Scenario, ...]
        実行するシナリオ。
    """

    pairs: int = 150
    n: int = 600
    lag_sim: int = 15
    lag_test: int = 15
    tau_fraction: float = 0.2
    alpha: float = 0.05
    master_seed: int = 20240601
    scenarios: Tuple[Scenario, ...] = SCENARIO_ORDER

    def __post_init__(self):
        self.scenarios = tuple(
            s for s in SCENARIO_ORDER if s in {Scenario(v) for v in self.scenarios}
        )
        if self.pairs < 1:
            raise InvalidArgumentError(f"pairs must be positive, got {self.pairs}")
        if not 0 < self.tau_fraction < 1:
            raise InvalidArgumentError(
                f"tau_fraction must lie in (0, 1), got {self.tau_fraction}"
            )
        if not 0 < self.alpha < 1:
            raise InvalidArgumentError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.scenarios:
            raise InvalidArgumentError("At least one scenario is required")

    @classmethod
    def from_toml(cls, path: Path = BENCH_DEFAULTS_PATH, **overrides) -> "BenchConfig":
        """bench.toml を読み込み、None でない引数で上書きします。"""
        data = load_toml(path)
        data.pop("reference", None)
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in data:
                raise ValueError(f"Invalid configuration key: {key}")
            data[key] = value
        return cls(**data)

    def as_record(self) -> Dict[str, Any]:
        return {
            "pairs": self.pairs,
            "n": self.n,
            "lag_sim": self.lag_sim,
            "lag_test": self.lag_test,
            "tau_fraction": self.tau_fraction,
            "alpha": self.alpha,
            "master_seed": self.master_seed,
            "scenarios": [s.value for s in self.scenarios],
        }


@dataclass
class ScenarioRow:
    scenario: Scenario
    classical_correct_pct: float
    gls_correct_pct: float
    pair_count: int
    classical_failures: int = 0
    gls_failures: int = 0


@dataclass
class BenchReport:
    """
    シナリオごとの正解率の表。

    Parameters
    ----------
    rows : List[ScenarioRow]
        シナリオごとの行。
    config : BenchConfig
        実行時の設定。
    wall_time : float
        実行時間 [秒]。JSON レコードには含めません。
    """

    rows: List[ScenarioRow]
    config: BenchConfig
    wall_time: float = field(default=0.0)

    def to_record(self) -> Dict[str, Any]:
        return {
            "config": self.config.as_record(),
            "rows": [
                {
                    "scenario": row.scenario.value,
                    "classical_correct_pct": row.classical_correct_pct,
                    "gls_correct_pct": row.gls_correct_pct,
                    "pair_count": row.pair_count,
                    "failures": {
                        "classical": row.classical_failures,
                        "gls": row.gls_failures,
                    },
                }
                for row in self.rows
            ],
        }


def accuracy(verdicts: Sequence[bool], truth: bool) -> float:
    """
    判定が truth と一致した割合 [%] を返します。

    Raises
    ------
    InvalidArgumentError
        verdicts が空の場合。
    """
    if len(verdicts) == 0:
        raise InvalidArgumentError("accuracy needs at least one verdict")
    correct = sum(1 for v in verdicts if bool(v) == truth)
    return 100.0 * correct / len(verdicts)


def _verdict(
    method: Method,
    x,
    y,
    cfg: BenchConfig,
    gls_options: Dict[str, Any],
    label: str,
) -> Optional[bool]:
    """検定の判定を返します。数値エラーの場合は None。"""
    try:
        return run_test(method, x, y, cfg.lag_test, cfg.tau_fraction, cfg.alpha, **gls_options).causes
    except GrangerError as e:
        counter.increment_failure(method.value)
        logger.warning(f"{method.value} test failed on {label}: {e}")
        return None


def run_benchmark(
    cfg: BenchConfig,
    threads: Optional[int] = None,
    eps_rel: float = DEFAULT_EPS_REL,
    known_mean: Optional[float] = None,
    band: int = DEFAULT_TAPER_BAND,
    progress: bool = False,
) -> BenchReport:
    """
    ベンチマークを実行します。

    ペア i のシードは (master_seed, シナリオ番号, i) から導出するので、
    結果はスレッド数や実行順序に依存しません。数値エラーはその手法の不正解として数えます。

    Parameters
    ----------
    cfg : BenchConfig
        設定。
    threads : int, optional
        スレッド数。省略時は GRANGER_THREADS または CPU 数。
    eps_rel : float, default=1e-8
        Ω̂ の固有値の相対下限。
    known_mean : float, optional
        残差の既知の期待値。
    band : int, default=2
        Ω̂ に掛ける Bartlett 重みの帯幅。
    progress : bool, default=False
        tqdm で進捗を表示するかどうか。

    Returns
    -------
    BenchReport
        シナリオごとの正解率。
    """
    started = time.perf_counter()
    defaults = load_scenario_defaults()
    gls_options = {"eps_rel": eps_rel, "known_mean": known_mean, "band": band}
    workers = resolve_thread_count(threads)
    rows = []

    for scenario in cfg.scenarios:
        scenario_index = SCENARIO_ORDER.index(scenario)
        truth = scenario.is_causal

        def evaluate(i: int) -> Tuple[Optional[bool], Optional[bool]]:
            seed = _pair_seed(cfg.master_seed, scenario_index, i)
            x, y, _ = generate_scenario_pair(scenario, cfg.n, cfg.lag_sim, seed, defaults)
            label = f"{scenario.value} pair {i}"
            return (
                _verdict(Method.CLASSICAL_F, x, y, cfg, gls_options, label),
                _verdict(Method.GLS_WALD, x, y, cfg, gls_options, label),
            )

        with ThreadPoolExecutor(max_workers=workers) as executor:
            outcomes = list(
                tqdm(
                    executor.map(evaluate, range(cfg.pairs)),
                    total=cfg.pairs,
                    desc=f"{scenario.value} を処理中",
                    disable=not progress,
                )
            )

        # 失敗は不正解として数える
        classical = [v if v is not None else not truth for v, _ in outcomes]
        gls = [v if v is not None else not truth for _, v in outcomes]
        rows.append(
            ScenarioRow(
                scenario=scenario,
                classical_correct_pct=accuracy(classical, truth),
                gls_correct_pct=accuracy(gls, truth),
                pair_count=cfg.pairs,
                classical_failures=sum(1 for v, _ in outcomes if v is None),
                gls_failures=sum(1 for _, v in outcomes if v is None),
            )
        )
        logger.info(
            f"{scenario.value}: classical {rows[-1].classical_correct_pct:.1f}%, "
            f"GLS {rows[-1].gls_correct_pct:.1f}%"
        )

    return BenchReport(rows=rows, config=cfg, wall_time=time.perf_counter() - started)


def _pair_seed(master_seed: int, scenario_index: int, pair_index: int) -> int:
    return derive_seeds(master_seed, 1, scenario_index, pair_index)[0]


def load_reference(path: Path = BENCH_DEFAULTS_PATH) -> Dict[str, List[float]]:
    """bench.toml から公表値を読み込みます。"""
    return dict(load_toml(path).get("reference", {}))


def format_report(report: BenchReport, reference: Optional[Dict[str, List[float]]] = None) -> str:
    """公表値と並べた整列済みの表を返します。"""
    reference = reference if reference is not None else load_reference()
    header = f"{'scenario':<10}{'pairs':>7}{'classical F':>14}{'GLS Granger':>14}{'ref F':>9}{'ref GLS':>9}"
    lines = [header, "-" * len(header)]
    for row in report.rows:
        ref = reference.get(row.scenario.value, [float("nan"), float("nan")])
        lines.append(
            f"{row.scenario.value:<10}{row.pair_count:>7}"
            f"{row.classical_correct_pct:>13.1f}%{row.gls_correct_pct:>13.1f}%"
            f"{ref[0]:>8.1f}%{ref[1]:>8.1f}%"
        )
    lines.append(f"wall time: {report.wall_time:.1f} s")
    return "\n".join(lines)
