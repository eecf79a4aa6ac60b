import numpy as np
import pytest

from granger_gls.common.dataset import Dataset, export_csv, ingest_csv
from granger_gls.common.errors import DatasetParseError, InvalidArgumentError, UnknownLabelError
from granger_gls.common.series import TimeSeries


def test_ingest_three_columns(write_csv):
    path = write_csv("a,b,c\n1,2,3\n4, 5 ,6\n7,8,9.5\n")
    dataset = ingest_csv(path)
    assert dataset.labels == ["a", "b", "c"]
    assert dataset.length == 3
    np.testing.assert_array_equal(dataset.get("b").values, [2, 5, 8])
    assert dataset.get("c").name == "c"
    assert dataset.source == str(path)


def test_non_numeric_cell_reports_row_and_column(write_csv):
    path = write_csv("a,b,c\n1,2,3\n4,abc,6\n")
    with pytest.raises(DatasetParseError) as excinfo:
        ingest_csv(path)
    assert excinfo.value.row == 3
    assert excinfo.value.column == "b"
    assert "row 3" in str(excinfo.value)
    assert "'abc'" in str(excinfo.value)


@pytest.mark.parametrize("cell", ["", "nan", "inf"])
def test_missing_or_infinite_cells_are_rejected(write_csv, cell):
    with pytest.raises(DatasetParseError) as excinfo:
        ingest_csv(write_csv(f"a,b\n1,2\n{cell},3\n"))
    assert (excinfo.value.row, excinfo.value.column) == (3, "a")


def test_duplicate_header_is_rejected(write_csv):
    with pytest.raises(DatasetParseError) as excinfo:
        ingest_csv(write_csv("a,b,a\n1,2,3\n"))
    assert excinfo.value.row == 1
    assert excinfo.value.column == "a"


def test_ragged_rows_are_rejected(write_csv):
    with pytest.raises(DatasetParseError) as excinfo:
        ingest_csv(write_csv("a,b,c\n1,2,3\n4,5\n"))
    assert excinfo.value.row == 3
    with pytest.raises(DatasetParseError) as excinfo:
        ingest_csv(write_csv("a,b\n1,2\n3,4,5\n", "wide.csv"))
    assert excinfo.value.row == 3


def test_empty_inputs_are_rejected(write_csv):
    with pytest.raises(DatasetParseError):
        ingest_csv(write_csv(""))
    with pytest.raises(DatasetParseError):
        ingest_csv(write_csv("a,b\n", "header_only.csv"))


def test_missing_file_raises_os_error(tmp_path):
    with pytest.raises(OSError):
        ingest_csv(tmp_path / "missing.csv")


def test_date_column_is_kept_as_labels(write_csv):
    path = write_csv("date,x,y\n2024-01-01,1,2\n2024-01-02,3,4\n2024-01-03,5,7\n")
    dataset = ingest_csv(path, date_column="date")
    assert dataset.labels == ["x", "y"]
    assert dataset.index_labels == ("2024-01-01", "2024-01-02", "2024-01-03")
    diffed = dataset.differenced(1)
    np.testing.assert_array_equal(diffed.get("y").values, [2, 3])
    assert diffed.index_labels == ("2024-01-02", "2024-01-03")
    with pytest.raises(UnknownLabelError):
        ingest_csv(path, date_column="when")


def test_no_header_and_custom_delimiter(write_csv):
    dataset = ingest_csv(write_csv("1;2\n3;4\n5;6\n"), has_header=False, delimiter=";")
    assert dataset.labels == ["col1", "col2"]
    np.testing.assert_array_equal(dataset.get("col2").values, [2, 4, 6])


def test_unknown_label_lists_available_labels(write_csv):
    dataset = ingest_csv(write_csv("a,b\n1,2\n3,4\n"))
    with pytest.raises(UnknownLabelError) as excinfo:
        dataset.get("z")
    assert excinfo.value.available == ["a", "b"]
    assert "a, b" in str(excinfo.value)


def test_export_then_ingest_preserves_values(tmp_path, rng):
    series = [TimeSeries(rng.normal(size=50) * 1e3, "p"), TimeSeries(rng.normal(size=50) / 7, "q")]
    dataset = Dataset.from_series(series)
    path = export_csv(dataset, tmp_path / "out" / "data.csv")
    loaded = ingest_csv(path)
    assert loaded.labels == ["p", "q"]
    for label in ("p", "q"):
        np.testing.assert_allclose(loaded.get(label).values, dataset.get(label).values, rtol=1e-12)


def test_export_writes_date_column_first(tmp_path):
    dataset = Dataset(
        columns={"v": TimeSeries([1.5, 2.5])},
        index_labels=("d1", "d2"),
        index_name="day",
    )
    path = export_csv(dataset, tmp_path / "dated.csv")
    assert path.read_text(encoding="utf-8") == "day,v\nd1,1.5\nd2,2.5\n"


def test_dataset_validation():
    with pytest.raises(InvalidArgumentError):
        Dataset(columns={})
    with pytest.raises(InvalidArgumentError):
        Dataset(columns={"a": TimeSeries([1.0, 2.0]), "b": TimeSeries([1.0])})
    with pytest.raises(InvalidArgumentError):
        Dataset.from_series([TimeSeries([1.0], "a"), TimeSeries([2.0], "a")])
    with pytest.raises(InvalidArgumentError):
        Dataset(columns={"a": TimeSeries([1.0, 2.0])}, index_labels=("only one",))


def test_differenced_zero_is_identity():
    dataset = Dataset(columns={"a": TimeSeries([1.0, 4.0, 9.0])})
    assert dataset.differenced(0) is dataset
    np.testing.assert_array_equal(dataset.differenced(2).get("a").values, [2.0])
