import numpy as np
import pytest

from granger_gls.common.errors import InvalidArgumentError
from granger_gls.common.series import TimeSeries, build_lagged_design, difference


def test_time_series_copies_and_freezes_values():
    raw = np.array([1.0, 2.0, 3.0])
    s = TimeSeries(raw, name="a")
    raw[0] = 99.0
    assert s.values[0] == 1.0
    with pytest.raises(ValueError):
        s.values[0] = 5.0
    assert len(s) == 3


@pytest.mark.parametrize("values", [[], [1.0, np.nan], [np.inf, 1.0]])
def test_time_series_rejects_empty_or_non_finite(values):
    with pytest.raises(InvalidArgumentError):
        TimeSeries(values)


def test_renamed_keeps_values():
    s = TimeSeries([1, 2, 3], name="a").renamed("b")
    assert s.name == "b"
    np.testing.assert_array_equal(s.values, [1.0, 2.0, 3.0])


def test_difference_first_and_second_order():
    s = TimeSeries([1, 4, 9, 16], name="sq")
    np.testing.assert_array_equal(difference(s).values, [3, 5, 7])
    np.testing.assert_array_equal(difference(s, 2).values, [2, 2])
    assert difference(s).name == "sq"


@pytest.mark.parametrize("order", [0, 4, 5])
def test_difference_rejects_bad_order(order):
    with pytest.raises(InvalidArgumentError):
        difference(TimeSeries([1, 4, 9, 16]), order)


def test_design_layout_and_rows():
    y = TimeSeries([1, 2, 3, 4, 5])
    x = TimeSeries([10, 20, 30, 40, 50])
    d = build_lagged_design(y, x, 2)

    assert d.n_eff == 3
    assert d.n_columns == 5
    assert d.column_layout == ("const", "y.L1", "y.L2", "x.L1", "x.L2")
    np.testing.assert_array_equal(d.response, [3, 4, 5])
    np.testing.assert_array_equal(d.matrix[0], [1, 2, 1, 20, 10])
    np.testing.assert_array_equal(d.matrix[-1], [1, 4, 3, 40, 30])


def test_design_without_exog():
    d = build_lagged_design(TimeSeries([1, 2, 3]), None, 1)
    assert d.n_eff == 2
    assert not d.has_exog
    np.testing.assert_array_equal(d.matrix, [[1, 1], [1, 2]])
    np.testing.assert_array_equal(d.response, [2, 3])


def test_restricted_drops_exog_columns():
    y = TimeSeries(np.arange(10.0))
    x = TimeSeries(np.arange(10.0) ** 2)
    full = build_lagged_design(y, x, 3)
    restricted = full.restricted()

    assert restricted.n_columns == 4
    assert restricted.column_layout == ("const", "y.L1", "y.L2", "y.L3")
    np.testing.assert_array_equal(restricted.matrix, full.matrix[:, :4])
    np.testing.assert_array_equal(restricted.response, full.response)
    assert restricted.restricted() is restricted


def test_tail_drops_leading_rows():
    d = build_lagged_design(TimeSeries(np.arange(10.0)), TimeSeries(np.ones(10)), 2)
    tail = d.tail(3)
    assert tail.n_eff == d.n_eff - 3
    np.testing.assert_array_equal(tail.matrix, d.matrix[3:])
    with pytest.raises(InvalidArgumentError):
        d.tail(d.n_eff)


def test_design_rejects_lag_too_large_or_mismatched_lengths():
    with pytest.raises(InvalidArgumentError):
        build_lagged_design(TimeSeries([1, 2, 3]), None, 3)
    with pytest.raises(InvalidArgumentError):
        build_lagged_design(TimeSeries([1, 2, 3]), TimeSeries([1, 2]), 1)
    with pytest.raises(InvalidArgumentError):
        build_lagged_design(TimeSeries([1, 2, 3]), None, 0)
