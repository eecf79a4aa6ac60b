"""時系列コンテナ、差分、ラグ付き計画行列の構築。"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from granger_gls.common.errors import InvalidArgumentError


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """
    実数値の観測列。

    Parameters
    ----------
    values : array_like
        観測値。長さ1以上、すべて有限値。
    name : str, optional
        系列ラベル。
    """

    values: np.ndarray
    name: Optional[str] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if values.size < 1:
            raise InvalidArgumentError("TimeSeries requires at least one observation")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError(
                f"TimeSeries {self.name or ''} contains NaN or infinite values".strip()
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)

    def renamed(self, name: str) -> "TimeSeries":
        """ラベルだけを差し替えた系列を返します。"""
        return TimeSeries(self.values, name=name)


@dataclass(frozen=True, eq=False)
class LaggedDesign:
    """
    後退シフトした系列から構成した回帰の計画行列。

    列の並びは [切片, y のラグ 1..p, (x のラグ 1..p)] です。

    Parameters
    ----------
    matrix : np.ndarray
        n_eff × m の計画行列 X。
    response : np.ndarray
        長さ n_eff の応答ベクトル。
    lag_order : int
        ラグ次数 p。
    has_exog : bool
        x のラグ列を含むかどうか。
    column_layout : Tuple[str, ...]
        列の説明（"const", "y.L1", ..., "x.L1", ...）。
    """

    matrix: np.ndarray
    response: np.ndarray
    lag_order: int
    has_exog: bool
    column_layout: Tuple[str, ...] = field(default=())

    @property
    def n_eff(self) -> int:
        return int(self.response.size)

    @property
    def n_columns(self) -> int:
        return int(self.matrix.shape[1])

    def restricted(self) -> "LaggedDesign":
        """x のラグ列を削除した制約付きモデルの計画行列を返します。"""
        if not self.has_exog:
            return self
        keep = 1 + self.lag_order
        return LaggedDesign(
            matrix=self.matrix[:, :keep].copy(),
            response=self.response.copy(),
            lag_order=self.lag_order,
            has_exog=False,
            column_layout=self.column_layout[:keep],
        )

    def tail(self, rows: int) -> "LaggedDesign":
        """先頭 rows 行を捨てた計画行列を返します。"""
        if rows < 0 or rows >= self.n_eff:
            raise InvalidArgumentError(
                f"Cannot drop {rows} rows from a design with {self.n_eff} rows"
            )
        return LaggedDesign(
            matrix=self.matrix[rows:].copy(),
            response=self.response[rows:].copy(),
            lag_order=self.lag_order,
            has_exog=self.has_exog,
            column_layout=self.column_layout,
        )


def difference(s: TimeSeries, order: int = 1) -> TimeSeries:
    """
    order 階の差分系列を返します。

    Parameters
    ----------
    s : TimeSeries
        入力系列。
    order : int, default=1
        差分の階数（1以上、len(s) 未満）。

    Returns
    -------
    TimeSeries
        長さ len(s) - order の差分系列。
    """
    if order < 1:
        raise InvalidArgumentError(f"Difference order must be positive, got {order}")
    if order >= len(s):
        raise InvalidArgumentError(
            f"Difference order {order} must be smaller than the series length {len(s)}"
        )
    return TimeSeries(np.diff(s.values, n=order), name=s.name)


def build_lagged_design(
    y: TimeSeries,
    x: Optional[TimeSeries],
    p: int,
) -> LaggedDesign:
    """
    Granger回帰の計画行列を構築します。

    t = p..N-1 の各行は応答 y_t と説明変数 [1, y_{t-1}..y_{t-p}, x_{t-1}..x_{t-p}]
    を持ちます。t < p の観測は捨てられ、パディングは行いません。

    Parameters
    ----------
    y : TimeSeries
        被説明系列。
    x : TimeSeries, optional
        原因候補の系列。None の場合は制約付きモデル。
    p : int
        ラグ次数。

    Returns
    -------
    LaggedDesign
        計画行列と応答ベクトル。
    """
    if p < 1:
        raise InvalidArgumentError(f"Lag order must be positive, got {p}")
    n = len(y)
    if x is not None and len(x) != n:
        raise InvalidArgumentError(
            f"Series lengths differ: len(y)={n}, len(x)={len(x)}"
        )
    if n - p < 1:
        raise InvalidArgumentError(
            f"Lag order {p} leaves no rows for a series of length {n}"
        )

    n_eff = n - p
    blocks = [np.ones((n_eff, 1))]
    layout = ["const"]
    series = [("y", y)] + ([("x", x)] if x is not None else [])
    for label, s in series:
        # k 列目は s_{t-k}
        lags = np.column_stack([s.values[p - k : n - k] for k in range(1, p + 1)])
        blocks.append(lags)
        layout.extend(f"{label}.L{k}" for k in range(1, p + 1))

    return LaggedDesign(
        matrix=np.hstack(blocks),
        response=y.values[p:].copy(),
        lag_order=p,
        has_exog=x is not None,
        column_layout=tuple(layout),
    )
