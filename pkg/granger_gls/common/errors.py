"""パッケージ全体で使用する例外クラス。"""

from typing import List, Optional


class GrangerError(Exception):
    """granger_gls が送出する例外の基底クラス。"""


class InvalidArgumentError(GrangerError, ValueError):
    """入力値・形状・設定が不正な場合の例外。"""


class DatasetParseError(InvalidArgumentError):
    """
    CSVの解析に失敗した場合の例外。

    Parameters
    ----------
    message : str
        エラーメッセージ。
    row : int, optional
        ファイル上の行番号（1始まり）。
    column : str, optional
        列名。
    """

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column {column!r}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.row = row
        self.column = column


class UnknownLabelError(InvalidArgumentError):
    """データセットに存在しない系列名が指定された場合の例外。"""

    def __init__(self, label: str, available: List[str]):
        super().__init__(
            f"Unknown series label {label!r}; available labels: {', '.join(available)}"
        )
        self.label = label
        self.available = list(available)


class NumericalError(GrangerError, ArithmeticError):
    """数値計算の失敗を表す例外。"""


class NotPositiveDefiniteError(NumericalError):
    """
    Cholesky分解でピボットが正にならなかった場合の例外。

    Parameters
    ----------
    pivot : int
        失敗したピボットのインデックス（0始まり）。
    """

    def __init__(self, pivot: int, message: Optional[str] = None):
        super().__init__(message or f"Matrix is not positive definite (pivot {pivot})")
        self.pivot = pivot


class CollinearDesignError(NumericalError):
    """計画行列が列フルランクでない場合の例外。"""


class NumericalInconsistencyError(NumericalError):
    """制約付きモデルのSSRが制約なしモデルより小さい場合の例外。"""
