import numpy as np
import pytest

from granger_gls.common.counters import counter
from granger_gls.common.series import TimeSeries


@pytest.fixture(autouse=True)
def reset_counter():
    counter.reset()
    yield
    counter.reset()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_causal_pair(seed: int, n: int = 300, coef: float = 0.8, noise: float = 0.1):
    """y_t = coef·x_{t-1} + noise·e_t, x は白色雑音。"""
    g = np.random.default_rng(seed)
    x = g.normal(size=n)
    y = np.empty(n)
    y[0] = g.normal() * noise
    y[1:] = coef * x[:-1] + noise * g.normal(size=n - 1)
    return TimeSeries(x, name="x"), TimeSeries(y, name="y")


def make_independent_pair(seed: int, n: int = 300):
    g = np.random.default_rng(seed)
    return (
        TimeSeries(g.normal(size=n), name="x"),
        TimeSeries(g.normal(size=n), name="y"),
    )


@pytest.fixture
def causal_pair():
    return make_causal_pair(7)


@pytest.fixture
def independent_pair():
    return make_independent_pair(11)


@pytest.fixture
def write_csv(tmp_path):
    def _write(text: str, name: str = "data.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write
