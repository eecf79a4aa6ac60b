"""CSV データセットの読み込みと書き出し。"""

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from granger_gls.common.errors import DatasetParseError, InvalidArgumentError, UnknownLabelError
from granger_gls.common.series import TimeSeries, difference

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

GENERATED_SOURCE = "generated"


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    同じ長さのラベル付き系列の集まり。

    Parameters
    ----------
    columns : Mapping[str, TimeSeries]
        系列名から系列への順序付きの対応。
    source : str, default="generated"
        読み込んだファイルのパス、または "generated"。
    index_labels : Tuple[str, ...], optional
        日付列の値。計算には使わず、書き出し時のラベルとしてだけ使います。
    index_name : str, optional
        日付列の名前。
    """

    columns: Mapping[str, TimeSeries]
    source: str = GENERATED_SOURCE
    index_labels: Optional[Tuple[str, ...]] = None
    index_name: Optional[str] = field(default=None)

    def __post_init__(self):
        if len(self.columns) < 1:
            raise InvalidArgumentError("A dataset needs at least one column")
        lengths = {len(s) for s in self.columns.values()}
        if len(lengths) != 1:
            raise InvalidArgumentError(f"Column lengths differ: {sorted(lengths)}")
        if self.index_labels is not None and len(self.index_labels) != lengths.pop():
            raise InvalidArgumentError("index_labels must match the column length")
        named = {label: s.renamed(label) for label, s in self.columns.items()}
        object.__setattr__(self, "columns", named)

    @classmethod
    def from_series(cls, series: Sequence[TimeSeries], source: str = GENERATED_SOURCE) -> "Dataset":
        labels = [s.name for s in series]
        if any(label is None for label in labels):
            raise InvalidArgumentError("Every series in a dataset needs a label")
        if len(set(labels)) != len(labels):
            raise InvalidArgumentError(f"Series labels must be distinct: {labels}")
        return cls(columns={s.name: s for s in series}, source=source)

    @property
    def labels(self) -> List[str]:
        return list(self.columns)

    @property
    def length(self) -> int:
        return len(next(iter(self.columns.values())))

    def series(self) -> List[TimeSeries]:
        return list(self.columns.values())

    def get(self, label: str) -> TimeSeries:
        """
        系列を名前で取得します。

        Raises
        ------
        UnknownLabelError
            存在しない系列名の場合。
        """
        if label not in self.columns:
            raise UnknownLabelError(label, self.labels)
        return self.columns[label]

    def differenced(self, order: int) -> "Dataset":
        """すべての列を order 階差分したデータセットを返します。"""
        if order == 0:
            return self
        return Dataset(
            columns={label: difference(s, order) for label, s in self.columns.items()},
            source=self.source,
            index_labels=self.index_labels[order:] if self.index_labels is not None else None,
            index_name=self.index_name,
        )


_LINE_PATTERN = re.compile(r"line (\d+)")


def ingest_csv(
    path: PathLike,
    has_header: bool = True,
    date_column: Optional[str] = None,
    delimiter: str = ",",
) -> Dataset:
    """
    CSV ファイルを読み込みます。

    ヘッダなしの場合、列名は col1, col2, ... になります。
    date_column で指定した列は数値として解釈せず、ラベルとして保持します。

    Parameters
    ----------
    path : str or Path
        CSV ファイルのパス。
    has_header : bool, default=True
        先頭行がヘッダかどうか。
    date_column : str, optional
        日付列の名前。
    delimiter : str, default=","
        区切り文字。

    Returns
    -------
    Dataset
        読み込んだデータセット。

    Raises
    ------
    DatasetParseError
        行の列数が揃わない、数値でないセルがある、ヘッダが重複している場合。
    OSError
        ファイルを読めない場合。
    """
    try:
        raw = pd.read_csv(
            path,
            sep=delimiter,
            header=None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError as e:
        raise DatasetParseError(f"{path} is empty") from e
    except pd.errors.ParserError as e:
        match = _LINE_PATTERN.search(str(e))
        row = int(match.group(1)) if match else None
        raise DatasetParseError(f"Ragged row in {path}: {e}", row=row) from e

    # 空行は捨てる（行番号は元のファイルのまま）
    raw = raw[~raw.isna().all(axis=1)]
    first_data = 0
    if has_header:
        if raw.empty:
            raise DatasetParseError(f"{path} has no header row")
        header = [str(h).strip() for h in raw.iloc[0]]
        seen = set()
        for h in header:
            if h in seen:
                raise DatasetParseError(f"Duplicate header in {path}", row=1, column=h)
            seen.add(h)
        first_data = 1
    else:
        header = [f"col{i + 1}" for i in range(raw.shape[1])]

    body = raw.iloc[first_data:].copy()
    if body.empty:
        raise DatasetParseError(f"{path} has no data rows")
    body.columns = header

    ragged = body.isna().any(axis=1)
    if ragged.any():
        row = int(body.index[ragged.argmax()]) + 1
        raise DatasetParseError(f"Ragged row in {path}: too few fields", row=row)

    index_labels = None
    if date_column is not None:
        if date_column not in header:
            raise UnknownLabelError(date_column, header)
        index_labels = tuple(body[date_column].astype(str))
        body = body.drop(columns=[date_column])
    if body.shape[1] == 0:
        raise DatasetParseError(f"{path} has no numeric columns")

    columns: Dict[str, TimeSeries] = {}
    for label in body.columns:
        cells = body[label].str.strip()
        values = pd.to_numeric(cells, errors="coerce").to_numpy(dtype=np.float64)
        bad = ~np.isfinite(values)
        if bad.any():
            position = int(np.argmax(bad))
            row = int(body.index[position]) + 1
            raise DatasetParseError(
                f"Non-numeric cell {cells.iloc[position]!r} in {path}", row=row, column=label
            )
        columns[label] = TimeSeries(values, name=label)

    dataset = Dataset(
        columns=columns,
        source=str(path),
        index_labels=index_labels,
        index_name=date_column,
    )
    logger.info(f"Loaded {len(columns)} series of length {dataset.length} from {path}")
    return dataset


def export_csv(dataset: Dataset, path: PathLike) -> Path:
    """
    データセットをヘッダ付き CSV に書き出します。値は 17 桁で書くので読み戻しても変わりません。
    """
    frame = pd.DataFrame({label: s.values for label, s in dataset.columns.items()})
    if dataset.index_labels is not None:
        frame.insert(0, dataset.index_name or "date", list(dataset.index_labels))
    file_path = Path(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(file_path, index=False, float_format="%.17g", lineterminator="\n")
    return file_path
