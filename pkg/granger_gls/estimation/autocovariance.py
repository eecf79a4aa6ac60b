"""
窓付き標本自己共分散とスライディング自己共分散行列。

時刻 t の窓は x_{t-τ}..x_t の τ+1 点で、共分散の和は τ で割ります
（推定量は偏りを持ちますが、定義どおりに実装しています）。
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import linalg

from granger_gls.common.errors import InvalidArgumentError
from granger_gls.common.numerics import SymmetricMatrix
from granger_gls.common.series import TimeSeries

logger = logging.getLogger(__name__)

DEFAULT_TAPER_BAND = 2


@dataclass(frozen=True)
class WindowSpec:
    """
    スライディング窓の設定。

    Parameters
    ----------
    tau : int
        窓長 τ。2以上、対象系列の長さ未満。
    """

    tau: int

    def validate(self, n: int) -> None:
        """長さ n の系列に対して窓長が有効か検証します。"""
        if self.tau < 2:
            raise InvalidArgumentError(f"Window length tau must be at least 2, got {self.tau}")
        if self.tau >= n:
            raise InvalidArgumentError(
                f"Window length tau={self.tau} must be smaller than the series length {n}"
            )

    @classmethod
    def from_fraction(cls, fraction: float, n: int) -> "WindowSpec":
        """τ = ⌊fraction·n⌋ の窓を作ります。"""
        if not 0 < fraction < 1:
            raise InvalidArgumentError(f"tau fraction must lie in (0, 1), got {fraction}")
        spec = cls(int(np.floor(fraction * n)))
        spec.validate(n)
        return spec


def reflect_pad(s: TimeSeries, tau: int) -> TimeSeries:
    """
    x_{-t} = x_t で先頭に tau 点を補った系列を返します。

    返り値のインデックス i は元の系列のインデックス i - tau に対応します。
    """
    if tau < 1:
        raise InvalidArgumentError(f"Padding length must be positive, got {tau}")
    if tau >= len(s):
        raise InvalidArgumentError(
            f"Padding length {tau} must be smaller than the series length {len(s)}"
        )
    values = s.values
    return TimeSeries(np.concatenate([values[tau:0:-1], values]), name=s.name)


def windowed_autocov(
    s: TimeSeries,
    t: int,
    t_prime: int,
    tau: int,
    known_mean: Optional[float] = None,
) -> float:
    """
    長さ τ の窓付き標本自己共分散 γ̂_τ(t, t')。

    Parameters
    ----------
    s : TimeSeries
        系列（境界の補完が必要なら reflect_pad 済みのもの）。
    t, t_prime : int
        s 上のインデックス。t - τ と t' - τ が範囲内である必要があります。
    tau : int
        窓長。
    known_mean : float, optional
        期待値が既知の場合、窓平均の代わりに使う値。

    Returns
    -------
    float
        (1/τ) Σ_{k=0..τ} (x_{t-k} - w̄¹)(x_{t'-k} - w̄²)。
    """
    n = len(s)
    for index in (t, t_prime):
        if index - tau < 0 or index >= n:
            raise InvalidArgumentError(
                f"Window [{index - tau}, {index}] is outside the series range [0, {n - 1}]"
            )
    if tau < 1:
        raise InvalidArgumentError(f"Window length must be positive, got {tau}")
    w1 = s.values[t - tau : t + 1]
    w2 = s.values[t_prime - tau : t_prime + 1]
    m1 = w1.mean() if known_mean is None else known_mean
    m2 = w2.mean() if known_mean is None else known_mean
    return float(np.dot(w1 - m1, w2 - m2) / tau)


def sliding_autocov_matrix(
    s: TimeSeries,
    tau: int,
    reflect: bool = True,
    known_mean: Optional[float] = None,
) -> SymmetricMatrix:
    """
    スライディング自己共分散行列 Ω_τ を構築します。

    Parameters
    ----------
    s : TimeSeries
        長さ N の系列。
    tau : int
        窓長（WindowSpec の条件を満たすこと）。
    reflect : bool, default=True
        True の場合は reflect_pad で先頭を補い N×N 行列を返します。
        False の場合はインデックス τ..N-1 のみを使い (N-τ)×(N-τ) 行列を返します。
    known_mean : float, optional
        既知の期待値。指定すると窓平均の代わりに使います。

    Returns
    -------
    SymmetricMatrix
        (t, t') 成分が γ̂_τ(t, t') の対称行列。
    """
    WindowSpec(tau).validate(len(s))
    values = reflect_pad(s, tau).values if reflect else s.values

    # 各行が1つの窓（τ+1 点）
    windows = sliding_window_view(values, tau + 1)
    if known_mean is None:
        centred = windows - windows.mean(axis=1, keepdims=True)
    else:
        centred = windows - known_mean
    omega = centred @ centred.T / tau
    logger.debug(f"Sliding autocovariance matrix of size {omega.shape[0]} (tau={tau})")
    return SymmetricMatrix(0.5 * (omega + omega.T))


def ar1_theoretical_autocov(phi: float, sigma: float, n: int) -> SymmetricMatrix:
    """
    定常AR(1)過程の理論自己共分散行列 φ^{|t-t'|}·σ²/(1-φ²)。
    """
    if not -1 < phi < 1:
        raise InvalidArgumentError(f"AR(1) coefficient must satisfy |phi| < 1, got {phi}")
    if sigma <= 0:
        raise InvalidArgumentError(f"Innovation sd must be positive, got {sigma}")
    if n < 1:
        raise InvalidArgumentError(f"Matrix size must be positive, got {n}")
    variance = sigma**2 / (1.0 - phi**2)
    return SymmetricMatrix(variance * linalg.toeplitz(phi ** np.arange(n)))


def relative_frobenius_error(
    estimate: SymmetricMatrix,
    reference: SymmetricMatrix,
    band: Optional[int] = None,
) -> float:
    """
    ‖estimate - reference‖_F / ‖reference‖_F。

    band を指定すると |t - t'| <= band の成分だけで計算します。
    """
    if estimate.dim != reference.dim:
        raise InvalidArgumentError(
            f"Dimension mismatch: {estimate.dim} vs {reference.dim}"
        )
    mask = _band_mask(estimate.dim, band) if band is not None else np.ones_like(estimate.entries, dtype=bool)
    return float(
        np.linalg.norm(estimate.entries[mask] - reference.entries[mask])
        / np.linalg.norm(reference.entries[mask])
    )


def _band_mask(n: int, band: int) -> np.ndarray:
    if band < 0:
        raise InvalidArgumentError(f"band must be nonnegative, got {band}")
    idx = np.arange(n)
    return np.abs(idx[:, None] - idx[None, :]) <= band


def band_sign_agreement(
    estimate: SymmetricMatrix,
    reference: SymmetricMatrix,
    band: int,
) -> float:
    """|t - t'| <= band の成分で符号が一致する割合。"""
    if estimate.dim != reference.dim:
        raise InvalidArgumentError(
            f"Dimension mismatch: {estimate.dim} vs {reference.dim}"
        )
    mask = _band_mask(estimate.dim, band)
    agree = np.sign(estimate.entries[mask]) == np.sign(reference.entries[mask])
    return float(np.mean(agree))


def bartlett_taper(omega: SymmetricMatrix, band: int) -> SymmetricMatrix:
    """
    Ω の成分に Bartlett 重み max(0, 1 - |t - t'|/(band + 1)) を掛けます。

    重みの行列は正定値なので、対角成分が正の半正定値行列に掛けた結果は
    正定値になります（Schur 積）。band = 0 では対角成分だけが残ります。

    Parameters
    ----------
    omega : SymmetricMatrix
        スライディング自己共分散行列などの半正定値行列。
    band : int
        重みが正になる最大の |t - t'|。

    Returns
    -------
    SymmetricMatrix
        帯状に重み付けした行列。
    """
    if band < 0:
        raise InvalidArgumentError(f"Taper band must be nonnegative, got {band}")
    lags = np.arange(omega.dim)
    weights = linalg.toeplitz(np.clip(1.0 - lags / (band + 1.0), 0.0, None))
    return SymmetricMatrix(omega.entries * weights)
