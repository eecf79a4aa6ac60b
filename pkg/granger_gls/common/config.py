"""検定の既定値と実行環境の設定。"""

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

import tomli
from dotenv import load_dotenv

from granger_gls.common.numerics import DEFAULT_EPS_REL
from granger_gls.estimation.autocovariance import DEFAULT_TAPER_BAND
from granger_gls.estimation.inference import DEFAULT_ALPHA

logger = logging.getLogger(__name__)

THREADS_ENV = "GRANGER_THREADS"


@dataclass
class GrangerConfig:
    """
    Granger 検定の設定。

    Parameters
    ----------
    alpha : float, default=0.05
        有意水準。
    tau_fraction : float, default=0.2
        窓長 τ を n_eff に対する割合で指定します。
    eps_rel : float, default=1e-8
        Ω̂ の固有値の相対下限。
    reflect : bool, default=True
        先頭を反射で補完するかどうか。
    known_mean : float, optional
        残差の既知の期待値。指定すると窓平均の代わりに使います。
    band : int, default=2
        Ω̂ に掛ける Bartlett 重みの帯幅。
    """

    alpha: float = DEFAULT_ALPHA
    tau_fraction: float = 0.2
    eps_rel: float = DEFAULT_EPS_REL
    reflect: bool = True
    known_mean: Optional[float] = None
    band: int = DEFAULT_TAPER_BAND

    def update(self, **kwargs) -> "GrangerConfig":
        """Update the configuration with the given keyword arguments."""
        for key, value in kwargs.items():
            if value is None:
                continue
            if hasattr(self, key):
                setattr(self, key, value)
            else:
                raise ValueError(f"Invalid configuration key: {key}")
        return self


def load_toml(path: Path) -> Dict[str, Any]:
    """TOML ファイルを読み込みます。"""
    with open(path, "rb") as f:
        return tomli.load(f)


def resolve_thread_count(requested: Optional[int] = None) -> int:
    """
    並列実行に使うスレッド数を決定します。

    引数で指定がなければ環境変数 GRANGER_THREADS（.env も可）を参照し、
    どちらもなければ CPU 数を使います。

    Parameters
    ----------
    requested : int, optional
        明示的に指定されたスレッド数。

    Returns
    -------
    int
        1 以上のスレッド数。
    """
    if requested is not None:
        return max(1, int(requested))
    load_dotenv()
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return max(1, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"{THREADS_ENV}={raw!r} is not an integer; using 1 thread")
        return 1
    if value < 1:
        logger.warning(f"{THREADS_ENV}={value} is not positive; using 1 thread")
        return 1
    return value
