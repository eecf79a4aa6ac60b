"""
合成データの生成: AR(1) 系列、因果系列 (M1/M2/M3)、非因果ペア (AR1)。

すべての生成関数は設定とシードだけで決まる純粋関数です。
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import signal

from granger_gls.common.config import load_toml
from granger_gls.common.errors import InvalidArgumentError
from granger_gls.common.series import TimeSeries

logger = logging.getLogger(__name__)

SCENARIOS_PATH = Path(__file__).parent / "scenarios.toml"


class ResidualKind(str, Enum):
    M1_STATIONARY = "m1"
    M2_STRUCTURAL_BREAK = "m2"
    M3_HETEROSKEDASTIC = "m3"


class Scenario(str, Enum):
    M1 = "m1"
    M2 = "m2"
    M3 = "m3"
    AR1 = "ar1"

    @property
    def is_causal(self) -> bool:
        return self != Scenario.AR1

    @property
    def residual_kind(self) -> ResidualKind:
        if not self.is_causal:
            raise InvalidArgumentError("The AR1 scenario has no caused series")
        return ResidualKind(self.value)


@dataclass(frozen=True)
class Ar1Config:
    """
    AR(1) 過程 x_t = φ·x_{t-1} + ε_t の設定。

    Parameters
    ----------
    phi : float
        係数 φ（|φ| < 1）。
    n : int
        返す系列の長さ。
    seed : int
        乱数シード。
    sigma : float, default=1.0
        イノベーションの標準偏差。
    burn_in : int, default=200
        捨てる初期ステップ数。
    """

    phi: float
    n: int
    seed: int
    sigma: float = 1.0
    burn_in: int = 200

    def __post_init__(self):
        if not -1 < self.phi < 1:
            raise InvalidArgumentError(f"AR(1) coefficient must satisfy |phi| < 1, got {self.phi}")
        if self.sigma <= 0:
            raise InvalidArgumentError(f"sigma must be positive, got {self.sigma}")
        if self.n < 1:
            raise InvalidArgumentError(f"n must be positive, got {self.n}")
        if self.burn_in < 0:
            raise InvalidArgumentError(f"burn_in must be nonnegative, got {self.burn_in}")


@dataclass(frozen=True)
class CausedSeriesConfig:
    """
    因果系列 y_t = Σ_{k=1..L} β_k x_{t-k} + ε_t の設定。

    Parameters
    ----------
    lag : int
        因果のラグ L。
    residual_kind : ResidualKind
        残差 ε の種類。
    seed : int
        乱数シード。
    sigma : float, default=1.0
        残差の標準偏差 σ。
    break_index : int, optional
        (M2) 変化点 t_b。t > t_b で平均が break_shift だけずれます。
    break_shift : float, optional
        (M2) 平均のシフト量 μ。
    final_sd : float, optional
        (M3) 終端での残差の標準偏差。省略時は 5σ。
    """

    lag: int
    residual_kind: ResidualKind
    seed: int
    sigma: float = 1.0
    break_index: Optional[int] = None
    break_shift: Optional[float] = None
    final_sd: Optional[float] = None

    def __post_init__(self):
        if self.lag < 1:
            raise InvalidArgumentError(f"lag must be positive, got {self.lag}")
        if self.sigma <= 0:
            raise InvalidArgumentError(f"sigma must be positive, got {self.sigma}")
        is_break = self.residual_kind == ResidualKind.M2_STRUCTURAL_BREAK
        has_break = self.break_index is not None and self.break_shift is not None
        if is_break != has_break:
            raise InvalidArgumentError(
                "break_index and break_shift must be given exactly for M2 residuals"
            )
        if self.final_sd is not None and self.final_sd <= 0:
            raise InvalidArgumentError(f"final_sd must be positive, got {self.final_sd}")


@dataclass
class SimulationMetadata:
    """
    生成したデータセットの再現に必要な情報。

    Parameters
    ----------
    scenario : str
        シナリオ名（m1, m2, m3, ar1）。
    n : int
        系列長。
    lag : int
        因果のラグ L。
    seed : int
        親シード。
    beta : List[float]
        因果係数 β（AR1 では空）。
    parameters : Dict[str, Any]
        シナリオのパラメータ。
    """

    scenario: str
    n: int
    lag: int
    seed: int
    beta: List[float] = field(default_factory=list)
    parameters: Dict[str, Any] = field(default_factory=dict)

    def save(self, file_path: Path) -> None:
        """メタデータを JSON で保存します。"""
        file_path.parent.mkdir(parents=True, exist_ok=True)
        with open(file_path, "w", encoding="utf-8") as f:
            json.dump(asdict(self), f, sort_keys=True, indent=2)
            f.write("\n")

    @staticmethod
    def load(file_path: Path) -> "SimulationMetadata":
        """保存したメタデータを読み込みます。"""
        with open(file_path, "r", encoding="utf-8") as f:
            data = json.load(f)
        return SimulationMetadata(
            scenario=data["scenario"],
            n=int(data["n"]),
            lag=int(data["lag"]),
            seed=int(data["seed"]),
            beta=[float(b) for b in data.get("beta", [])],
            parameters=dict(data.get("parameters", {})),
        )


def gen_ar1(c: Ar1Config) -> TimeSeries:
    """
    x_0 = 0 から burn_in + n ステップ AR(1) を回し、最後の n 点を返します。
    """
    rng = np.random.default_rng(c.seed)
    innovations = rng.normal(0.0, c.sigma, c.burn_in + c.n)
    path = signal.lfilter([1.0], [1.0, -c.phi], innovations)
    return TimeSeries(path[c.burn_in :])


def gen_caused(x: TimeSeries, c: CausedSeriesConfig) -> Tuple[TimeSeries, np.ndarray]:
    """
    x から因果系列 y を生成します。

    β_k は一様分布 U(-1, 1) から引き、Σ|β_k| = 1 に正規化します。
    t >= L では y_t = Σ β_k x_{t-k} + ε_t、t < L では y_t = ε_t です。

    残差 ε の種類:

    - M1: N(0, σ²)
    - M2: N(0, σ²) に t > t_b でシフト μ を加える
    - M3: 標準偏差が σ_final·(t+1)/N で線形に増加する正規ノイズ

    Parameters
    ----------
    x : TimeSeries
        原因系列。
    c : CausedSeriesConfig
        生成設定。

    Returns
    -------
    Tuple[TimeSeries, np.ndarray]
        因果系列 y と係数 β（長さ L）。
    """
    n = len(x)
    if c.lag >= n:
        raise InvalidArgumentError(f"lag {c.lag} must be smaller than the series length {n}")

    rng = np.random.default_rng(c.seed)
    beta = rng.uniform(-1.0, 1.0, c.lag)
    beta = beta / np.sum(np.abs(beta))

    noise = rng.normal(0.0, 1.0, n)
    if c.residual_kind == ResidualKind.M3_HETEROSKEDASTIC:
        final_sd = c.final_sd if c.final_sd is not None else 5.0 * c.sigma
        noise = noise * final_sd * np.arange(1, n + 1) / n
    else:
        noise = noise * c.sigma
    if c.residual_kind == ResidualKind.M2_STRUCTURAL_BREAK:
        if not 0 < c.break_index < n:
            raise InvalidArgumentError(
                f"break_index must lie in (0, {n}), got {c.break_index}"
            )
        noise[c.break_index + 1 :] += c.break_shift

    # signal[t] = Σ_k β_k x_{t-k}
    kernel = np.concatenate([[0.0], beta])
    driven = np.convolve(x.values, kernel)[:n]
    y = noise.copy()
    y[c.lag :] += driven[c.lag :]
    return TimeSeries(y, name="y"), beta


def gen_noncausal_pair(cx: Ar1Config, cy: Ar1Config) -> Tuple[TimeSeries, TimeSeries]:
    """
    独立な2本の AR(1) 系列を返します。

    Raises
    ------
    InvalidArgumentError
        系列長が異なる場合、またはシードが同じ場合。
    """
    if cx.n != cy.n:
        raise InvalidArgumentError(f"Series lengths differ: {cx.n} vs {cy.n}")
    if cx.seed == cy.seed:
        raise InvalidArgumentError("Non-causal pairs need distinct seeds")
    return gen_ar1(cx).renamed("x"), gen_ar1(cy).renamed("y")


def load_scenario_defaults(path: Path = SCENARIOS_PATH) -> Dict[str, Any]:
    """scenarios.toml を読み込みます。"""
    return load_toml(path)


def derive_seeds(seed: int, count: int, *path: int) -> List[int]:
    """親シードとパスから count 個の独立なシードを導出します。"""
    sequence = np.random.SeedSequence([seed, *path])
    return [int(s) for s in sequence.generate_state(count, dtype=np.uint64)]


def generate_scenario_pair(
    scenario: Scenario,
    n: int,
    lag: int,
    seed: int,
    defaults: Optional[Dict[str, Any]] = None,
) -> Tuple[TimeSeries, TimeSeries, SimulationMetadata]:
    """
    シナリオに従って (x, y) のペアを1組生成します。

    Parameters
    ----------
    scenario : Scenario
        m1, m2, m3（因果あり）または ar1（因果なし）。
    n : int
        系列長。
    lag : int
        因果のラグ L。
    seed : int
        親シード。
    defaults : dict, optional
        scenarios.toml の内容。省略時はファイルから読み込みます。

    Returns
    -------
    Tuple[TimeSeries, TimeSeries, SimulationMetadata]
        原因系列 x、系列 y、再現用メタデータ。
    """
    defaults = defaults if defaults is not None else load_scenario_defaults()
    sigma = float(defaults["sigma"])
    burn_in = int(defaults["burn_in"])
    seed_x, seed_y = derive_seeds(seed, 2)

    if scenario == Scenario.AR1:
        phi_x = float(defaults["noncausal"]["phi_x"])
        phi_y = float(defaults["noncausal"]["phi_y"])
        x, y = gen_noncausal_pair(
            Ar1Config(phi=phi_x, n=n, seed=seed_x, sigma=sigma, burn_in=burn_in),
            Ar1Config(phi=phi_y, n=n, seed=seed_y, sigma=sigma, burn_in=burn_in),
        )
        metadata = SimulationMetadata(
            scenario=scenario.value,
            n=n,
            lag=lag,
            seed=seed,
            parameters={"phi_x": phi_x, "phi_y": phi_y, "sigma": sigma, "burn_in": burn_in},
        )
        return x, y, metadata

    driver_phi = float(defaults["driver_phi"])
    x = gen_ar1(Ar1Config(phi=driver_phi, n=n, seed=seed_x, sigma=sigma, burn_in=burn_in))
    parameters: Dict[str, Any] = {"driver_phi": driver_phi, "sigma": sigma, "burn_in": burn_in}
    kind = scenario.residual_kind
    break_index = break_shift = final_sd = None
    if kind == ResidualKind.M2_STRUCTURAL_BREAK:
        break_index = int(n * float(defaults["break_fraction"]))
        break_shift = sigma * float(defaults["break_shift_multiple"])
        parameters.update(break_index=break_index, break_shift=break_shift)
    elif kind == ResidualKind.M3_HETEROSKEDASTIC:
        final_sd = sigma * float(defaults["final_sd_multiple"])
        parameters.update(final_sd=final_sd)

    y, beta = gen_caused(
        x,
        CausedSeriesConfig(
            lag=lag,
            residual_kind=kind,
            seed=seed_y,
            sigma=sigma,
            break_index=break_index,
            break_shift=break_shift,
            final_sd=final_sd,
        ),
    )
    metadata = SimulationMetadata(
        scenario=scenario.value,
        n=n,
        lag=lag,
        seed=seed,
        beta=[float(b) for b in beta],
        parameters=parameters,
    )
    return x.renamed("x"), y, metadata
