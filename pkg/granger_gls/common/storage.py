"""ローカルファイルシステムへの成果物の保存ユーティリティ。"""

import json
from pathlib import Path
from typing import Any, Union

import numpy as np
import pandas as pd

PathLike = Union[str, Path]


class LocalStorage:
    """
    ローカルファイルシステムでの成果物の保存を担当するクラス。

    相対パスは base_dir からの相対位置として解決し、絶対パスはそのまま使います。

    Parameters
    ----------
    base_dir : str, default="."
        ベースディレクトリのパス。
    """

    def __init__(self, base_dir: PathLike = "."):
        self.base_dir = Path(base_dir)

    def resolve(self, name: PathLike) -> Path:
        """保存先のパスを解決し、親ディレクトリを作成します。"""
        file_path = self.base_dir / Path(name)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        return file_path

    def save_text(self, content: str, name: PathLike) -> Path:
        """
        テキストを保存します。

        Parameters
        ----------
        content : str
            保存する内容。
        name : str or Path
            ファイル名。

        Returns
        -------
        Path
            保存されたファイルのパス。
        """
        file_path = self.resolve(name)
        with open(file_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(content)
        return file_path

    def save_json(self, record: Any, name: PathLike) -> Path:
        """キーをソートした JSON として保存します。"""
        return self.save_text(dumps_json(record) + "\n", name)

    def save_matrix_csv(self, matrix: np.ndarray, name: PathLike) -> Path:
        """行列をヘッダなしの CSV として保存します。"""
        file_path = self.resolve(name)
        pd.DataFrame(np.asarray(matrix)).to_csv(
            file_path, header=False, index=False, float_format="%.17g"
        )
        return file_path


def dumps_json(record: Any) -> str:
    """キーをソートし、インデント付きで JSON 文字列にします。"""
    return json.dumps(record, sort_keys=True, indent=2, ensure_ascii=False)
