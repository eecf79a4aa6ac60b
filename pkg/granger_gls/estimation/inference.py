"""
制約行列、Wald 統計量、Granger F 統計量と p 値の計算。

Wald 統計量は Q で割って F(Q, n_eff - m) と比較します。V は有限標本の係数共分散
なので 1/n の係数は掛けません。この形で OLS の Wald 検定と Granger F 検定が一致します。
"""

import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence

import numpy as np
from scipy import stats

from granger_gls.common.errors import (
    InvalidArgumentError,
    NotPositiveDefiniteError,
    NumericalInconsistencyError,
)
from granger_gls.common.numerics import SymmetricMatrix, cholesky_solve, f_sf
from granger_gls.estimation.regression import FitResult

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.05
_SSR_SLACK = 1e-10


@dataclass(frozen=True, eq=False)
class Restriction:
    """
    線形制約 H0: Rβ = r。

    Parameters
    ----------
    r_matrix : np.ndarray
        Q × m の行列 R（行は一次独立）。
    r_vector : np.ndarray
        長さ Q のベクトル r。
    """

    r_matrix: np.ndarray
    r_vector: np.ndarray

    def __post_init__(self):
        r_matrix = np.atleast_2d(np.asarray(self.r_matrix, dtype=np.float64))
        r_vector = np.asarray(self.r_vector, dtype=np.float64).reshape(-1)
        q, m = r_matrix.shape
        if r_vector.size != q:
            raise InvalidArgumentError(
                f"Restriction vector has length {r_vector.size}, expected {q}"
            )
        if q > m:
            raise InvalidArgumentError(f"More restrictions ({q}) than parameters ({m})")
        if np.linalg.matrix_rank(r_matrix) < q:
            raise InvalidArgumentError("Restriction rows are linearly dependent")
        object.__setattr__(self, "r_matrix", r_matrix)
        object.__setattr__(self, "r_vector", r_vector)

    @property
    def q(self) -> int:
        return int(self.r_matrix.shape[0])


@dataclass(frozen=True)
class TestResult:
    """
    F 分布で評価した検定結果。

    Parameters
    ----------
    statistic : float
        F 統計量。
    df1, df2 : float
        自由度。
    p_value : float
        p 値 1 - F_cdf(statistic; df1, df2)。
    reject : bool
        p_value < alpha なら True。
    alpha : float
        有意水準。
    """

    __test__ = False

    statistic: float
    df1: float
    df2: float
    p_value: float
    reject: bool
    alpha: float

    @classmethod
    def from_statistic(cls, statistic: float, df1: float, df2: float, alpha: float) -> "TestResult":
        """統計量と自由度から p 値と判定を計算します。"""
        if not 0 < alpha < 1:
            raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
        p_value = min(max(f_sf(statistic, df1, df2), 0.0), 1.0)
        return cls(
            statistic=float(statistic),
            df1=float(df1),
            df2=float(df2),
            p_value=p_value,
            reject=p_value < alpha,
            alpha=float(alpha),
        )


class FStatistic(NamedTuple):
    statistic: float
    df1: int
    df2: int


def granger_restriction(p: int) -> Restriction:
    """
    x のラグ係数 β'_1..β'_p がすべて 0 という制約を返します。

    R は p × (1+2p) で、切片と y ラグの列は 0、x ラグの列は単位行列です。
    """
    if p < 1:
        raise InvalidArgumentError(f"Lag order must be positive, got {p}")
    r_matrix = np.hstack([np.zeros((p, 1 + p)), np.eye(p)])
    return Restriction(r_matrix=r_matrix, r_vector=np.zeros(p))


def wald_statistic(f: FitResult, h: Restriction) -> float:
    """
    Wald 統計量 (Rβ̂ - r)ᵀ (R V Rᵀ)⁻¹ (Rβ̂ - r)。

    Raises
    ------
    NotPositiveDefiniteError
        R V Rᵀ が正定値でない場合。
    """
    if h.r_matrix.shape[1] != f.coefficients.size:
        raise InvalidArgumentError(
            f"Restriction has {h.r_matrix.shape[1]} columns, "
            f"fit has {f.coefficients.size} coefficients"
        )
    v = f.covariance_matrix().entries
    deviation = h.r_matrix @ f.coefficients - h.r_vector
    middle = SymmetricMatrix(h.r_matrix @ v @ h.r_matrix.T)
    try:
        solved = cholesky_solve(middle, deviation)
    except NotPositiveDefiniteError:
        logger.warning("R V R^T is singular; Wald statistic undefined")
        raise
    return max(float(deviation @ solved), 0.0)


def wald_test(f: FitResult, h: Restriction, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """
    Wald 検定。統計量を Q で割り F(Q, n_eff - m) で評価します。
    """
    if f.df_resid < 1:
        raise InvalidArgumentError(
            f"Wald test needs positive residual degrees of freedom, got {f.df_resid}"
        )
    statistic = wald_statistic(f, h) / h.q
    return TestResult.from_statistic(statistic, h.q, f.df_resid, alpha)


def granger_f_statistic(ssr_rm: float, ssr_um: float, p: int, n_eff: int) -> FStatistic:
    """
    古典的 Granger F 統計量 ((SSR_RM - SSR_UM)/p) / (SSR_UM/(n_eff - 2p - 1))。

    Parameters
    ----------
    ssr_rm : float
        制約付きモデル（y のラグのみ）の残差平方和。
    ssr_um : float
        制約なしモデルの残差平方和。
    p : int
        ラグ次数。
    n_eff : int
        回帰に使った観測数。

    Returns
    -------
    FStatistic
        統計量と自由度 (p, n_eff - 2p - 1)。SSR_UM = 0 かつ SSR_RM > 0 の場合は統計量が inf。

    Raises
    ------
    NumericalInconsistencyError
        SSR_RM が SSR_UM を許容誤差以上下回る場合。
    """
    if p < 1:
        raise InvalidArgumentError(f"Lag order must be positive, got {p}")
    if ssr_rm < 0 or ssr_um < 0:
        raise InvalidArgumentError("Sums of squared residuals must be nonnegative")
    df2 = n_eff - (2 * p + 1)
    if df2 < 1:
        raise InvalidArgumentError(
            f"Not enough observations: n_eff={n_eff} with lag {p} leaves df2={df2}"
        )
    gain = ssr_rm - ssr_um
    if gain < -_SSR_SLACK * max(1.0, ssr_um):
        raise NumericalInconsistencyError(
            f"Restricted SSR {ssr_rm:.6g} is below unrestricted SSR {ssr_um:.6g}"
        )
    gain = max(gain, 0.0)
    if ssr_um == 0:
        statistic = np.inf if gain > 0 else 0.0
    else:
        statistic = (gain / p) / (ssr_um / df2)
    return FStatistic(float(statistic), p, df2)


def granger_f_test(
    ssr_rm: float,
    ssr_um: float,
    p: int,
    n_eff: int,
    alpha: float = DEFAULT_ALPHA,
) -> TestResult:
    """granger_f_statistic を F(p, n_eff - 2p - 1) で評価します。"""
    statistic, df1, df2 = granger_f_statistic(ssr_rm, ssr_um, p, n_eff)
    return TestResult.from_statistic(statistic, df1, df2, alpha)


def benjamini_hochberg(p_values: Sequence[float], alpha: float = DEFAULT_ALPHA) -> List[bool]:
    """Benjamini-Hochberg 法で偽発見率を alpha に制御した棄却判定を返します。"""
    if len(p_values) == 0:
        return []
    adjusted = stats.false_discovery_control(np.asarray(p_values, dtype=np.float64), method="bh")
    return [bool(a <= alpha) for a in adjusted]
