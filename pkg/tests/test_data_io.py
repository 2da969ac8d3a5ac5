import numpy as np
import pytest
from hypothesis import given, strategies as st

from fairpost.data_io import (AffineTransform, DatasetSchema, GroupedSamples, load_csv,
                              split_train_test)
from fairpost.errors import DataError


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_toy_csv(tmp_path):
    path = write(tmp_path, "group,score,label\nA,0.1,0.2\nB,0.5,0.4\nA,0.9,0.8\n")
    s = load_csv(path, DatasetSchema())
    assert s.groups == ("A", "B")
    assert s.n == 3
    assert np.allclose(s.scores, [0.1, 0.5, 0.9])
    assert np.allclose(s.labels, [0.2, 0.4, 0.8])
    assert list(s.group_idx) == [0, 1, 0]


def test_groups_collected_in_first_appearance_order(tmp_path):
    path = write(tmp_path, "group,score\nz,0.1\na,0.2\nz,0.3\nm,0.4\n")
    s = load_csv(path, DatasetSchema(label_col=None))
    assert s.groups == ("z", "a", "m")


def test_label_as_score(tmp_path):
    path = write(tmp_path, "group,label\nA,0.25\nB,0.75\n")
    s = load_csv(path, DatasetSchema(score_col=None))
    assert np.allclose(s.scores, [0.25, 0.75])
    assert np.allclose(s.labels, s.scores)


def test_missing_column(tmp_path):
    path = write(tmp_path, "group,points\nA,0.1\n")
    with pytest.raises(DataError, match="missing column"):
        load_csv(path, DatasetSchema(label_col=None))


def test_unparseable_cell_reports_location(tmp_path):
    path = write(tmp_path, "group,score\nA,0.1\nB,oops\n")
    with pytest.raises(DataError, match="row 3"):
        load_csv(path, DatasetSchema(label_col=None))


def test_empty_file(tmp_path):
    path = write(tmp_path, "")
    with pytest.raises(DataError):
        load_csv(path, DatasetSchema())


def test_header_only_file(tmp_path):
    path = write(tmp_path, "group,score,label\n")
    with pytest.raises(DataError, match="no usable data rows"):
        load_csv(path, DatasetSchema())


def test_rows_with_empty_cells_rejected(tmp_path):
    path = write(tmp_path, "group,score\nA,0.1\nB,\n,0.5\nA,0.9\n")
    s = load_csv(path, DatasetSchema(label_col=None))
    assert s.n == 2


def test_missing_file():
    with pytest.raises(DataError):
        load_csv("/nonexistent/nowhere.csv", DatasetSchema())


def test_normalization_affine_to_unit(tmp_path):
    path = write(tmp_path, "group,score,label\nA,1.0,1.0\nB,4.0,2.5\n")
    schema = DatasetSchema(interval=(1.0, 4.0), normalization="affine-to-unit")
    s = load_csv(path, schema)
    assert np.allclose(s.scores, [0.0, 1.0])
    assert np.allclose(s.labels, [0.0, 0.5])
    assert np.allclose(s.transform.to_raw(s.scores), [1.0, 4.0])


@given(st.floats(-100, 100), st.floats(0.5, 50), st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=20))
def test_transform_round_trip(offset, scale, ys):
    tr = AffineTransform(offset=offset, scale=scale)
    ys = np.array(ys)
    back = tr.to_raw(tr.to_internal(ys))
    assert np.abs(back - ys).max() <= 1e-12 * max(1.0, np.abs(ys).max())


def test_schema_rejects_duplicate_columns():
    with pytest.raises(ValueError):
        DatasetSchema(group_col="x", score_col="x")


def test_schema_rejects_bad_interval():
    with pytest.raises(ValueError):
        DatasetSchema(interval=(2.0, 2.0))


def samples_of_size(n, seed=0):
    rng = np.random.default_rng(seed)
    rows = [(f"g{int(rng.integers(0, 3))}", float(rng.random()), float(rng.random()))
            for _ in range(n)]
    return GroupedSamples.from_rows(rows)


def test_split_sizes():
    train, test = split_train_test(samples_of_size(10), 0.7, seed=1)
    assert train.n == 7 and test.n == 3


def test_split_deterministic():
    s = samples_of_size(40)
    a_train, a_test = split_train_test(s, 0.7, seed=5)
    b_train, b_test = split_train_test(s, 0.7, seed=5)
    assert np.array_equal(a_train.scores, b_train.scores)
    assert np.array_equal(a_test.scores, b_test.scores)


def test_split_is_a_partition():
    s = samples_of_size(31)
    train, test = split_train_test(s, 0.7, seed=9)
    assert train.n + test.n == s.n
    merged = np.sort(np.concatenate([train.scores, test.scores]))
    assert np.array_equal(merged, np.sort(s.scores))


def test_split_preserves_group_universe():
    s = samples_of_size(8, seed=3)
    train, test = split_train_test(s, 0.7, seed=0)
    assert train.groups == s.groups == test.groups


@given(st.integers(1, 200), st.floats(0.05, 0.95), st.integers(0, 1000))
def test_split_ceiling_rule(n, ratio, seed):
    import math
    s = samples_of_size(n, seed=seed % 7)
    train, test = split_train_test(s, ratio, seed=seed)
    assert train.n == math.ceil(ratio * n - 1e-9)
    assert train.n + test.n == n


def test_split_rejects_bad_ratio():
    with pytest.raises(ValueError):
        split_train_test(samples_of_size(5), 0.0, seed=0)
    with pytest.raises(ValueError):
        split_train_test(samples_of_size(5), 1.0, seed=0)
