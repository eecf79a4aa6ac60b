"""ラグ付き計画行列に対する OLS / GLS 推定。"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from granger_gls.common.errors import (
    CollinearDesignError,
    InvalidArgumentError,
    NotPositiveDefiniteError,
)
from granger_gls.common.numerics import (
    SymmetricMatrix,
    cholesky_factor,
    cholesky_solve,
)
from granger_gls.common.series import LaggedDesign, TimeSeries

logger = logging.getLogger(__name__)


class FitMethod(str, Enum):
    OLS = "ols"
    GLS = "gls"


@dataclass(frozen=True, eq=False)
class FitResult:
    """
    回帰の推定結果。

    Parameters
    ----------
    coefficients : np.ndarray
        推定係数 β̂（列の並びは LaggedDesign と同じ）。
    residuals : np.ndarray
        元のスケールでの残差 y - Xβ̂。
    ssr : float
        残差平方和。
    coef_covariance : np.ndarray
        係数の共分散行列 V。自由度が 0 の OLS では NaN で埋められます。
    method : FitMethod
        推定方法。
    df_resid : int
        残差自由度 n_eff - m。
    column_layout : Tuple[str, ...]
        列の説明。
    whitened_ssr : float, optional
        GLS の白色化後の残差平方和 ‖L⁻¹(y - Xβ̂)‖²。OLS では None。
    """

    coefficients: np.ndarray
    residuals: np.ndarray
    ssr: float
    coef_covariance: np.ndarray
    method: FitMethod
    df_resid: int
    column_layout: Tuple[str, ...] = field(default=())
    whitened_ssr: Optional[float] = None

    @property
    def has_covariance(self) -> bool:
        return bool(np.all(np.isfinite(self.coef_covariance)))

    def covariance_matrix(self) -> SymmetricMatrix:
        """V を SymmetricMatrix として返します。"""
        if not self.has_covariance:
            raise InvalidArgumentError(
                "Coefficient covariance is undefined (no residual degrees of freedom)"
            )
        return SymmetricMatrix(self.coef_covariance)

    def with_residual_scale(self) -> "FitResult":
        """
        V に s̃² = ‖L⁻¹(y - Xβ̂)‖² / (n_eff - m) を掛けた GLS の結果を返します。

        返り値の whitened_ssr は None になるため、二重には適用できません。
        """
        if self.whitened_ssr is None:
            raise InvalidArgumentError("Residual scale is only available for an unscaled GLS fit")
        if self.df_resid < 1:
            raise InvalidArgumentError(
                f"Residual scale needs positive degrees of freedom, got {self.df_resid}"
            )
        scale = self.whitened_ssr / self.df_resid
        return replace(self, coef_covariance=scale * self.coef_covariance, whitened_ssr=None)


def _solve_normal_equations(x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, SymmetricMatrix]:
    """正規方程式 XᵀXβ = Xᵀy を解き、β と XᵀX を返します。"""
    n, m = x.shape
    if n < m:
        raise CollinearDesignError(f"Design has {n} rows but {m} columns")
    if np.linalg.matrix_rank(x) < m:
        raise CollinearDesignError("Design matrix does not have full column rank")
    gram = SymmetricMatrix(x.T @ x)
    try:
        beta = cholesky_solve(gram, x.T @ y)
    except NotPositiveDefiniteError as e:
        raise CollinearDesignError(
            f"Normal equations are singular (pivot {e.pivot})"
        ) from e
    return beta, gram


def ols_fit(d: LaggedDesign) -> FitResult:
    """
    最小二乗法 β̂ = (XᵀX)⁻¹Xᵀy で推定します。

    係数共分散は s²(XᵀX)⁻¹、s² = SSR / (n_eff - m) です。

    Parameters
    ----------
    d : LaggedDesign
        計画行列。

    Returns
    -------
    FitResult
        推定結果。

    Raises
    ------
    CollinearDesignError
        計画行列がランク落ちしている場合。
    """
    x, y = d.matrix, d.response
    beta, gram = _solve_normal_equations(x, y)
    residuals = y - x @ beta
    ssr = float(residuals @ residuals)
    df_resid = d.n_eff - d.n_columns
    if df_resid > 0:
        s2 = ssr / df_resid
        inverse = cholesky_solve(gram, np.eye(d.n_columns))
        covariance = s2 * 0.5 * (inverse + inverse.T)
    else:
        logger.debug("OLS fit has no residual degrees of freedom; covariance undefined")
        covariance = np.full((d.n_columns, d.n_columns), np.nan)
    return FitResult(
        coefficients=beta,
        residuals=residuals,
        ssr=ssr,
        coef_covariance=covariance,
        method=FitMethod.OLS,
        df_resid=df_resid,
        column_layout=d.column_layout,
    )


def gls_fit(d: LaggedDesign, omega: SymmetricMatrix) -> FitResult:
    """
    一般化最小二乗法 β̂ = (XᵀΩ⁻¹X)⁻¹XᵀΩ⁻¹y で推定します。

    Ω = LLᵀ と分解し、L·X̃ = X, L·ỹ = y を解いて白色化したうえで OLS を行います。
    係数共分散は V = (X̃ᵀX̃)⁻¹、残差と SSR は白色化前のスケールで返します。
    Ω̂ の大きさが未知の場合は with_residual_scale で V を補正します。

    Parameters
    ----------
    d : LaggedDesign
        計画行列。
    omega : SymmetricMatrix
        残差の共分散行列（n_eff 次の対称正定値行列）。

    Returns
    -------
    FitResult
        推定結果。

    Raises
    ------
    NotPositiveDefiniteError
        omega が正定値でない場合。
    CollinearDesignError
        白色化後の計画行列がランク落ちしている場合。
    """
    if omega.dim != d.n_eff:
        raise InvalidArgumentError(
            f"Covariance dimension {omega.dim} does not match {d.n_eff} design rows"
        )
    lower = cholesky_factor(omega)
    x_white = linalg.solve_triangular(lower, d.matrix, lower=True)
    y_white = linalg.solve_triangular(lower, d.response, lower=True)
    beta, gram = _solve_normal_equations(x_white, y_white)

    residuals = d.response - d.matrix @ beta
    covariance = cholesky_solve(gram, np.eye(d.n_columns))
    white_residuals = y_white - x_white @ beta
    return FitResult(
        coefficients=beta,
        residuals=residuals,
        ssr=float(residuals @ residuals),
        coef_covariance=0.5 * (covariance + covariance.T),
        method=FitMethod.GLS,
        df_resid=d.n_eff - d.n_columns,
        column_layout=d.column_layout,
        whitened_ssr=float(white_residuals @ white_residuals),
    )


def residual_series(f: FitResult) -> TimeSeries:
    """残差を時間順の TimeSeries として返します。"""
    return TimeSeries(f.residuals, name="residuals")
