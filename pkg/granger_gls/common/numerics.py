"""
対称行列の線形代数と F 分布の累積分布関数。

逆行列は明示的に作らず、Cholesky分解と前進・後退代入で解きます。
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg, special
from scipy.linalg import lapack

from granger_gls.common.errors import InvalidArgumentError, NotPositiveDefiniteError

logger = logging.getLogger(__name__)

DEFAULT_EPS_REL = 1e-8
_SYMMETRY_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class SymmetricMatrix:
    """
    密な実対称行列。

    構築時に entries[i][j] == entries[j][i] を厳密に成立させます。
    相対 1e-8 以内の非対称性は (A + Aᵀ)/2 で吸収し、それを超える場合は例外を送出します。

    Parameters
    ----------
    entries : np.ndarray
        n × n の実数行列。
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.float64, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InvalidArgumentError(f"Expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidArgumentError("Matrix contains NaN or infinite entries")
        scale = max(float(np.max(np.abs(a))), 1.0)
        if np.max(np.abs(a - a.T)) > _SYMMETRY_RTOL * scale:
            raise InvalidArgumentError("Matrix is not symmetric")
        a = 0.5 * (a + a.T)
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @classmethod
    def identity(cls, n: int, scale: float = 1.0) -> "SymmetricMatrix":
        """scale 倍の単位行列を返します。"""
        return cls(scale * np.eye(n))


def cholesky_factor(a: SymmetricMatrix) -> np.ndarray:
    """
    A = L Lᵀ となる下三角行列 L を返します。

    Raises
    ------
    NotPositiveDefiniteError
        ピボットが正にならない場合。失敗したピボット位置を保持します。
    """
    factor, info = lapack.dpotrf(a.entries, lower=1, clean=1)
    if info > 0:
        raise NotPositiveDefiniteError(pivot=info - 1)
    if info < 0:
        raise InvalidArgumentError(f"Invalid argument {-info} passed to dpotrf")
    return factor


def cholesky_solve(a: SymmetricMatrix, b: np.ndarray) -> np.ndarray:
    """
    対称正定値行列 A について A·Z = B を解きます。

    Parameters
    ----------
    a : SymmetricMatrix
        対称正定値行列。
    b : np.ndarray
        右辺（ベクトルまたは行列）。

    Returns
    -------
    np.ndarray
        B と同じ形状の解 Z。
    """
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != a.dim:
        raise InvalidArgumentError(
            f"Right-hand side has {b.shape[0]} rows, matrix has dimension {a.dim}"
        )
    factor = cholesky_factor(a)
    return linalg.cho_solve((factor, True), b)


def spd_floor(a: SymmetricMatrix, eps_rel: float = DEFAULT_EPS_REL) -> SymmetricMatrix:
    """
    固有値を eps_rel·λ_max で下から抑えて対称正定値行列にします。

    最大固有値が 0 以下の場合は、対角成分の平均（eps_rel で下限）を
    分散とするスカラー行列を返します。すでに条件を満たす行列はそのまま返します。

    Parameters
    ----------
    a : SymmetricMatrix
        対称行列。
    eps_rel : float, default=1e-8
        最大固有値に対する相対下限。

    Returns
    -------
    SymmetricMatrix
        対称正定値行列。
    """
    if eps_rel <= 0:
        raise InvalidArgumentError(f"eps_rel must be positive, got {eps_rel}")
    eigvals, eigvecs = linalg.eigh(a.entries)
    lam_max = float(eigvals[-1])
    if lam_max <= 0:
        sigma2 = max(float(np.mean(np.diag(a.entries))), eps_rel)
        logger.debug(f"Non-positive spectrum (lambda_max={lam_max:.3e}); using scalar matrix")
        return SymmetricMatrix.identity(a.dim, sigma2)

    floor = eps_rel * lam_max
    if eigvals[0] >= floor:
        return a
    clipped = np.maximum(eigvals, floor)
    logger.debug(
        f"Floored {int(np.sum(eigvals < floor))} of {a.dim} eigenvalues at {floor:.3e}"
    )
    return SymmetricMatrix((eigvecs * clipped) @ eigvecs.T)


def _check_f_args(x: float, d1: float, d2: float) -> None:
    if np.isnan(x) or x < 0:
        raise InvalidArgumentError(f"F distribution argument must be nonnegative, got {x}")
    if not (d1 > 0 and d2 > 0):
        raise InvalidArgumentError(
            f"Degrees of freedom must be positive, got d1={d1}, d2={d2}"
        )


def f_cdf(x: float, d1: float, d2: float) -> float:
    """
    F(d1, d2) 分布の累積分布関数。

    正則化不完全ベータ関数 I_{d1·x/(d1·x+d2)}(d1/2, d2/2) で評価します。
    """
    _check_f_args(x, d1, d2)
    if np.isinf(x):
        return 1.0
    z = d1 * x / (d1 * x + d2)
    return float(special.betainc(d1 / 2.0, d2 / 2.0, z))


def f_sf(x: float, d1: float, d2: float) -> float:
    """F(d1, d2) 分布の上側確率 1 - F_cdf(x)。上側の裾でも桁落ちしません。"""
    _check_f_args(x, d1, d2)
    if np.isinf(x):
        return 0.0
    z = d2 / (d2 + d1 * x)
    return float(special.betainc(d2 / 2.0, d1 / 2.0, z))
