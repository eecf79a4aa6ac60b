"""複数系列の全ペアに因果性検定を行い、因果グラフを構築するサービス。"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from granger_gls.common.config import load_toml, resolve_thread_count
from granger_gls.common.counters import counter
from granger_gls.common.errors import GrangerError, InvalidArgumentError
from granger_gls.common.numerics import DEFAULT_EPS_REL
from granger_gls.common.series import TimeSeries
from granger_gls.estimation.autocovariance import DEFAULT_TAPER_BAND
from granger_gls.estimation.inference import DEFAULT_ALPHA, benjamini_hochberg
from granger_gls.services.granger_tests.granger_tests import (
    CausalityResult,
    Method,
    aic_scores,
    run_test,
    select_lag_aic,
)

logger = logging.getLogger(__name__)

GRAPH_DEFAULTS_PATH = Path(__file__).parent / "graph.toml"

Pair = Tuple[str, str]


@dataclass(frozen=True)
class AutoLag:
    """
    AIC によるラグ選択の指定。

    Parameters
    ----------
    p_max : int
        候補とする最大ラグ。
    per_pair : bool, default=True
        True ならペアごとに選び、False なら全ペアの AIC 合計が最小の共通ラグを使います。
    """

    p_max: int
    per_pair: bool = True


LagChoice = Union[int, AutoLag]


@dataclass(frozen=True)
class CausalEdge:
    cause: str
    effect: str
    p_value: float
    lag: int


@dataclass
class CausalGraph:
    """
    因果グラフ。x が y の原因と判定されたとき辺 x → y を持ちます。

    Parameters
    ----------
    nodes : List[str]
        系列ラベル（ソート済み）。
    edges : List[CausalEdge]
        因果関係の辺。
    lag_per_pair : Dict[Tuple[str, str], int]
        ペアごとに使ったラグ。
    results : List[CausalityResult]
        成功したすべての検定結果。
    diagnostics : List[str]
        失敗したペアの診断メッセージ。
    """

    nodes: List[str]
    edges: List[CausalEdge] = field(default_factory=list)
    lag_per_pair: Dict[Pair, int] = field(default_factory=dict)
    results: List[CausalityResult] = field(default_factory=list)
    diagnostics: List[str] = field(default_factory=list)

    @property
    def tests_run(self) -> int:
        return len(self.results) + len(self.diagnostics)

    def edge_set(self) -> set:
        return {(e.cause, e.effect) for e in self.edges}

    def to_dot(self) -> str:
        """DOT 形式の有向グラフを返します。孤立ノードも宣言します。"""
        lines = ["digraph causal {"]
        for node in self.nodes:
            lines.append(f"  {_quote(node)};")
        for edge in self.edges:
            lines.append(
                f"  {_quote(edge.cause)} -> {_quote(edge.effect)} "
                f"[pvalue={edge.p_value:.6g}, lag={edge.lag}];"
            )
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_record(self) -> Dict[str, Any]:
        """構造化レコード {nodes, edges, diagnostics} を返します。"""
        return {
            "nodes": list(self.nodes),
            "edges": [
                {"from": e.cause, "to": e.effect, "p_value": e.p_value, "lag": e.lag}
                for e in self.edges
            ],
            "diagnostics": list(self.diagnostics),
        }


def _quote(label: str) -> str:
    escaped = label.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def _validate_dataset(dataset: Sequence[TimeSeries]) -> Dict[str, TimeSeries]:
    if len(dataset) < 2:
        raise InvalidArgumentError(f"A causal graph needs at least 2 series, got {len(dataset)}")
    labels = [s.name for s in dataset]
    if any(label is None for label in labels):
        raise InvalidArgumentError("Every series in a causal graph needs a label")
    if len(set(labels)) != len(labels):
        raise InvalidArgumentError(f"Series labels must be distinct: {labels}")
    lengths = {len(s) for s in dataset}
    if len(lengths) != 1:
        raise InvalidArgumentError(f"Series lengths differ: {sorted(lengths)}")
    return {s.name: s for s in dataset}


def _global_lag(series: Dict[str, TimeSeries], pairs: List[Pair], p_max: int) -> int:
    totals = np.zeros(p_max)
    for cause, effect in pairs:
        scores = aic_scores(series[cause], series[effect], p_max)
        totals += np.array([scores[p] for p in range(1, p_max + 1)])
    return int(np.argmin(totals)) + 1


def build_causal_graph(
    dataset: Sequence[TimeSeries],
    method: Method = Method.GLS_WALD,
    lag: LagChoice = 1,
    tau_fraction: float = 0.2,
    alpha: float = DEFAULT_ALPHA,
    fdr: bool = False,
    eps_rel: float = DEFAULT_EPS_REL,
    reflect: bool = True,
    known_mean: Optional[float] = None,
    band: int = DEFAULT_TAPER_BAND,
    threads: Optional[int] = None,
) -> CausalGraph:
    """
    すべての順序付きペア (a, b), a ≠ b について a が b の原因かを検定します。

    ペアはラベル順に列挙し、並列実行しても結果の順序は変わりません。
    個々のペアの数値エラーは辺にせず diagnostics に記録します。

    Parameters
    ----------
    dataset : Sequence[TimeSeries]
        ラベル付きで同じ長さの系列（2本以上）。
    method : Method, default=Method.GLS_WALD
        検定方法。
    lag : int or AutoLag, default=1
        固定ラグ、または AIC による選択。
    tau_fraction : float, default=0.2
        GLS の窓長 τ = ⌊tau_fraction·n_eff⌋。
    alpha : float, default=0.05
        有意水準。
    fdr : bool, default=False
        True なら Benjamini-Hochberg 法で判定します。
    eps_rel : float, default=1e-8
        Ω̂ の固有値の相対下限。
    reflect : bool, default=True
        反射による先頭補完を行うかどうか。
    known_mean : float, optional
        残差の既知の期待値（GLS のみ）。
    band : int, default=2
        Ω̂ に掛ける Bartlett 重みの帯幅（GLS のみ）。
    threads : int, optional
        スレッド数。省略時は GRANGER_THREADS または CPU 数。

    Returns
    -------
    CausalGraph
        因果グラフ。
    """
    series = _validate_dataset(dataset)
    nodes = sorted(series)
    pairs = [(a, b) for a in nodes for b in nodes if a != b]

    global_lag = None
    if isinstance(lag, AutoLag) and not lag.per_pair:
        global_lag = _global_lag(series, pairs, lag.p_max)
        logger.info(f"Global AIC lag: {global_lag}")

    def evaluate(pair: Pair) -> Tuple[Pair, Optional[CausalityResult], Optional[str]]:
        cause, effect = pair
        x, y = series[cause], series[effect]
        try:
            if isinstance(lag, AutoLag):
                p = global_lag if global_lag is not None else select_lag_aic(x, y, lag.p_max)
            else:
                p = lag
            result = run_test(
                method,
                x,
                y,
                p,
                tau_fraction,
                alpha,
                eps_rel=eps_rel,
                reflect=reflect,
                known_mean=known_mean,
                band=band,
            )
            return pair, result, None
        except GrangerError as e:
            counter.increment_failure(method.value)
            logger.warning(f"Test {cause} -> {effect} failed: {e}")
            return pair, None, f"{cause} -> {effect}: {e}"

    workers = resolve_thread_count(threads)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        outcomes = list(executor.map(evaluate, pairs))

    graph = CausalGraph(nodes=nodes)
    for (cause, effect), result, diagnostic in outcomes:
        if result is None:
            graph.diagnostics.append(diagnostic)
            continue
        graph.results.append(result)
        graph.lag_per_pair[(cause, effect)] = result.lag

    decisions = (
        benjamini_hochberg([r.test.p_value for r in graph.results], alpha)
        if fdr
        else [r.test.reject for r in graph.results]
    )
    for result, reject in zip(graph.results, decisions):
        if reject:
            graph.edges.append(
                CausalEdge(result.cause, result.effect, result.test.p_value, result.lag)
            )
    logger.info(
        f"Causal graph: {len(nodes)} nodes, {len(graph.edges)} edges, "
        f"{len(graph.diagnostics)} failed pairs"
    )
    return graph


class CausalGraphBuilder:
    """
    graph.toml の既定値で因果グラフを構築するクラス。

    Parameters
    ----------
    config_path : Path, optional
        既定値の TOML ファイル。
    """

    def __init__(self, config_path: Path = GRAPH_DEFAULTS_PATH, **overrides):
        self.config = load_toml(config_path)
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in self.config:
                raise ValueError(f"Invalid configuration key: {key}")
            self.config[key] = value

    def lag_choice(self) -> LagChoice:
        if int(self.config["auto_lag_max"]) > 0:
            return AutoLag(int(self.config["auto_lag_max"]), bool(self.config["per_pair_lag"]))
        return int(self.config["lag"])

    def run(
        self,
        dataset: Sequence[TimeSeries],
        eps_rel: float = DEFAULT_EPS_REL,
        reflect: bool = True,
        known_mean: Optional[float] = None,
        band: int = DEFAULT_TAPER_BAND,
        threads: Optional[int] = None,
    ) -> CausalGraph:
        """設定に従って因果グラフを構築します。"""
        return build_causal_graph(
            dataset,
            method=Method(self.config["method"]),
            lag=self.lag_choice(),
            tau_fraction=float(self.config["tau_fraction"]),
            alpha=float(self.config["alpha"]),
            fdr=bool(self.config["fdr"]),
            eps_rel=eps_rel,
            reflect=reflect,
            known_mean=known_mean,
            band=band,
            threads=threads,
        )
