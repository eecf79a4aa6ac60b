"""
出力レコードのスキーマ。
test / graph / bench コマンドが --json で出力するデータモデルを定義します。
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from granger_gls.common.storage import dumps_json


class TestRecord(BaseModel):
    """
    一方向の因果性検定の結果。

    Parameters
    ----------
    cause : str
        原因候補の系列名。
    effect : str
        結果候補の系列名。
    method : str
        検定方法（f または gls）。
    lag : int
        ラグ次数 p。
    tau : int, optional
        窓長（GLS のみ）。
    statistic : float
        F 統計量。
    df1 : int
        分子の自由度。
    df2 : int
        分母の自由度。
    p_value : float
        p 値。
    alpha : float
        有意水準。
    reject : bool
        帰無仮説（因果なし）を棄却したかどうか。
    verdict : str
        判定文（"x causes y" など）。
    """

    __test__ = False

    cause: str = Field(..., description="原因候補の系列名")
    effect: str = Field(..., description="結果候補の系列名")
    method: str = Field(..., description="検定方法（f または gls）")
    lag: int = Field(..., ge=1, description="ラグ次数")
    tau: Optional[int] = Field(None, description="窓長（GLS のみ）")
    statistic: float = Field(..., ge=0, description="F 統計量")
    df1: int = Field(..., ge=1, description="分子の自由度")
    df2: int = Field(..., ge=1, description="分母の自由度")
    p_value: float = Field(..., ge=0, le=1, description="p 値")
    alpha: float = Field(..., gt=0, lt=1, description="有意水準")
    reject: bool = Field(..., description="帰無仮説を棄却したかどうか")
    verdict: str = Field(..., description="判定文")

    @classmethod
    def from_result(cls, result) -> "TestRecord":
        """CausalityResult からレコードを作ります。"""
        return cls(
            cause=result.cause,
            effect=result.effect,
            method=result.method.value,
            lag=result.lag,
            tau=result.tau,
            statistic=result.test.statistic,
            df1=result.test.df1,
            df2=result.test.df2,
            p_value=result.test.p_value,
            alpha=result.test.alpha,
            reject=result.test.reject,
            verdict=result.verdict(),
        )


class EdgeRecord(BaseModel):
    """因果グラフの辺。JSON では from / to をキーにします。"""

    model_config = ConfigDict(populate_by_name=True)

    source: str = Field(..., alias="from", description="原因の系列名")
    target: str = Field(..., alias="to", description="結果の系列名")
    p_value: float = Field(..., ge=0, le=1, description="p 値")
    lag: int = Field(..., ge=1, description="使用したラグ")


class GraphRecord(BaseModel):
    """
    因果グラフ。

    Parameters
    ----------
    nodes : List[str]
        系列名（ソート済み）。
    edges : List[EdgeRecord]
        因果関係の辺。
    diagnostics : List[str]
        失敗したペアの診断メッセージ。
    """

    nodes: List[str] = Field(..., min_length=2, description="系列名")
    edges: List[EdgeRecord] = Field(default_factory=list, description="因果関係の辺")
    diagnostics: List[str] = Field(default_factory=list, description="失敗したペアの診断")


class FailureCounts(BaseModel):
    classical: int = Field(0, ge=0)
    gls: int = Field(0, ge=0)


class ScenarioRecord(BaseModel):
    scenario: str = Field(..., description="シナリオ名（m1, m2, m3, ar1）")
    classical_correct_pct: float = Field(..., ge=0, le=100, description="古典的 F 検定の正解率 [%]")
    gls_correct_pct: float = Field(..., ge=0, le=100, description="GLS Granger 検定の正解率 [%]")
    pair_count: int = Field(..., ge=1, description="ペア数")
    failures: FailureCounts = Field(default_factory=FailureCounts, description="数値エラーの回数")


class BenchConfigRecord(BaseModel):
    pairs: int = Field(..., ge=1)
    n: int = Field(..., ge=1)
    lag_sim: int = Field(..., ge=1)
    lag_test: int = Field(..., ge=1)
    tau_fraction: float = Field(..., gt=0, lt=1)
    alpha: float = Field(..., gt=0, lt=1)
    master_seed: int
    scenarios: List[str] = Field(..., min_length=1)


class BenchRecord(BaseModel):
    """ベンチマーク結果。実行時間は含めません。"""

    config: BenchConfigRecord
    rows: List[ScenarioRecord]


def render(record: BaseModel) -> str:
    """レコードをキーをソートした JSON 文字列にします。"""
    data: Dict[str, Any] = record.model_dump(mode="python", by_alias=True)
    return dumps_json(data)
