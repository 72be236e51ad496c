import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cfadvisor.dataset import (
    ColumnSchema,
    DatasetError,
    load_dataset,
    mad,
    preprocess,
    repair_covariance,
    schema_from_json,
    train_test_split,
)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


NUM_SCHEMA = [
    ColumnSchema("a"),
    ColumnSchema("b"),
    ColumnSchema("y", role="target"),
]


# frozen by hand: median 3, |dev| = [2, 1, 0, 1, 97], median 1
def test_mad_known_values():
    assert mad([1, 2, 3, 4, 100]) == 1.0
    assert mad([0, 10]) == 5.0
    assert mad([7, 7, 7]) == 0.0


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50),
       st.floats(-1e6, 1e6))
def test_mad_translation_invariant(values, shift):
    v = np.array(values)
    assert mad(v + shift) == pytest.approx(mad(v), abs=1e-6)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=50),
       st.floats(-100, 100))
def test_mad_scales_absolutely(values, c):
    v = np.array(values)
    assert mad(c * v) == pytest.approx(abs(c) * mad(v), rel=1e-9, abs=1e-9)


def test_load_csv_roundtrip(tmp_path):
    p = write(tmp_path, "d.csv", "a,b,y\n1,2,10\n3,4,20\n")
    ds = load_dataset(p, NUM_SCHEMA)
    assert ds.n == 2
    assert ds.column("a").tolist() == [1.0, 3.0]
    assert ds.column("y").tolist() == [10.0, 20.0]
    assert len(ds.content_hash) == 64


def test_load_jsonl(tmp_path):
    lines = "\n".join(json.dumps({"a": i, "b": 2 * i, "y": i * i}) for i in range(5))
    ds = load_dataset(write(tmp_path, "d.jsonl", lines), NUM_SCHEMA)
    assert ds.n == 5
    assert ds.column("b").tolist() == [0.0, 2.0, 4.0, 6.0, 8.0]


def test_load_missing_file(tmp_path):
    with pytest.raises(DatasetError, match="not found"):
        load_dataset(tmp_path / "nope.csv", NUM_SCHEMA)


def test_load_missing_column(tmp_path):
    p = write(tmp_path, "d.csv", "a,y\n1,2\n")
    with pytest.raises(DatasetError, match="'b'"):
        load_dataset(p, NUM_SCHEMA)


def test_load_bad_cell_names_row_and_column(tmp_path):
    p = write(tmp_path, "d.csv", "a,b,y\n1,2,3\n1,oops,3\n")
    with pytest.raises(DatasetError, match=r"row 1, column 'b'"):
        load_dataset(p, NUM_SCHEMA)


def test_load_drops_dropped_role_columns(tmp_path):
    schema = NUM_SCHEMA + [ColumnSchema("junk", role="dropped")]
    p = write(tmp_path, "d.csv", "a,b,y,junk\n1,2,3,x\n4,5,6,z\n")
    ds = load_dataset(p, schema)
    assert "junk" not in ds.values
    assert [c.name for c in ds.schema] == ["a", "b", "y"]


def test_categorical_levels_from_data(tmp_path):
    schema = [ColumnSchema("a"), ColumnSchema("state", kind="categorical"),
              ColumnSchema("y", role="target")]
    p = write(tmp_path, "d.csv", "a,state,y\n1,failed,1\n2,completed,2\n3,completed,3\n")
    ds = load_dataset(p, schema)
    col = next(c for c in ds.schema if c.name == "state")
    assert col.levels == ["completed", "failed"]


def test_schema_from_json_rejects_unknown_fields():
    with pytest.raises(DatasetError, match="unknown fields"):
        schema_from_json([{"name": "a", "typo": 1}])
    with pytest.raises(DatasetError, match="duplicate"):
        schema_from_json([{"name": "a"}, {"name": "a"}])


def make_dataset(tmp_path, rows, schema=None, name="d.csv"):
    header = ",".join(c.name for c in (schema or NUM_SCHEMA))
    body = "\n".join(",".join(str(v) for v in r) for r in rows)
    return load_dataset(write(tmp_path, name, header + "\n" + body + "\n"),
                        schema or NUM_SCHEMA)


def test_preprocess_drops_nan_rows(tmp_path):
    p = write(tmp_path, "d.csv", "a,b,y\n1,2,3\n4,,6\n7,8,9\n2,3,4\n")
    pre, report = preprocess(load_dataset(p, NUM_SCHEMA))
    assert report.dropped_nan_rows == 1
    assert pre.n == 3


def test_preprocess_drops_zero_variance(tmp_path):
    schema = [ColumnSchema("a"), ColumnSchema("c"), ColumnSchema("y", role="target")]
    rows = [[i, 7, i * 2] for i in range(10)]
    pre, report = preprocess(make_dataset(tmp_path, rows, schema))
    assert report.dropped_zero_variance == ["c"]
    assert pre.feature_names == ["a"]


def test_preprocess_prunes_correlated_keeps_first_name(tmp_path):
    rng = np.random.default_rng(0)
    a = rng.normal(size=50)
    rows = [[a[i], 2 * a[i], rng.normal()] for i in range(50)]
    pre, report = preprocess(make_dataset(tmp_path, rows))
    assert pre.feature_names == ["a"]
    kept, dropped, corr = report.dropped_correlated[0]
    assert (kept, dropped) == ("a", "b")
    assert corr == pytest.approx(1.0)


def test_preprocess_scaling_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    rows = rng.normal(loc=[10, -3, 100], scale=[5, 2, 20], size=(80, 3))
    pre, _ = preprocess(make_dataset(tmp_path, rows.tolist()))
    assert np.allclose(pre.X.mean(axis=0), 0, atol=1e-12)
    assert np.allclose(pre.X.std(axis=0), 1, atol=1e-12)
    raw = pre.unscale_matrix(pre.X)
    original = np.array([r[:2] for r in rows])
    assert np.max(np.abs(raw - original) / np.maximum(np.abs(original), 1.0)) < 1e-9


def test_preprocess_is_idempotent(tmp_path):
    rng = np.random.default_rng(2)
    rows = rng.normal(size=(60, 3)) * [3, 7, 11] + [1, 2, 3]
    pre1, _ = preprocess(make_dataset(tmp_path, rows.tolist()))
    pre2, report2 = preprocess(pre1.to_dataset())
    assert report2.is_empty
    assert np.allclose(pre1.X, pre2.X, atol=1e-9)
    assert np.allclose(pre1.Y, pre2.Y)


def test_preprocess_categorical_codes(tmp_path):
    schema = [ColumnSchema("a"), ColumnSchema("state", kind="categorical"),
              ColumnSchema("y", role="target")]
    p = write(tmp_path, "d.csv",
              "a,state,y\n1,failed,1\n2,completed,2\n3,completed,3\n4,failed,4\n")
    pre, _ = preprocess(load_dataset(p, schema))
    j = pre.feature_index("state")
    assert pre.X[:, j].tolist() == [1.0, 0.0, 0.0, 1.0]
    assert pre.code_to_level("state", 1.0) == "failed"
    assert pre.level_to_code("state", "completed") == 0
    with pytest.raises(DatasetError, match="unknown level"):
        pre.level_to_code("state", "exploded")


def test_preprocess_mad_fallback_uses_std(tmp_path):
    # codes [0, 0, 0, 1]: median 0, deviations [0, 0, 0, 1] -> MAD 0,
    # so the per-column distance scale falls back to the std of the codes
    schema = [ColumnSchema("a"), ColumnSchema("state", kind="categorical"),
              ColumnSchema("y", role="target")]
    p = write(tmp_path, "d.csv",
              "a,state,y\n1,u,1\n2,u,2\n3,u,3\n4,v,4\n")
    pre, report = preprocess(load_dataset(p, schema))
    j = pre.feature_index("state")
    expected = float(np.std([0, 0, 0, 1]))
    assert pre.mads[j] == pytest.approx(expected)
    assert report.mad["state"] == pytest.approx(expected)


def test_preprocess_outlier_trim(tmp_path):
    rows = [[i, i + 1, 2 * i] for i in range(20)] + [[1000, 2, 3]]
    pre, report = preprocess(make_dataset(tmp_path, rows), outlier_trim=True)
    assert report.dropped_outlier_rows == 1
    assert pre.n == 20
    pre2, report2 = preprocess(make_dataset(tmp_path, rows))
    assert report2.dropped_outlier_rows == 0
    assert pre2.n == 21


def test_preprocess_errors_when_everything_drops(tmp_path):
    schema = [ColumnSchema("a"), ColumnSchema("y", role="target")]
    rows = [[5, i] for i in range(6)]
    with pytest.raises(DatasetError, match="all feature columns"):
        preprocess(make_dataset(tmp_path, rows, schema))


def test_report_serializes_to_json(tmp_path):
    rows = [[i, 7, 2 * i] for i in range(10)]
    schema = [ColumnSchema("a"), ColumnSchema("c"), ColumnSchema("y", role="target")]
    _, report = preprocess(make_dataset(tmp_path, rows, schema))
    doc = json.loads(json.dumps(report.to_dict()))
    assert doc["dropped_zero_variance"] == ["c"]
    assert "a" in doc["scaler"]


def test_repair_covariance_identity_untouched():
    cov = np.eye(3)
    repaired, tag = repair_covariance(cov)
    assert tag == ("none", 0.0)
    assert np.array_equal(repaired, cov)


def test_repair_covariance_jitter_fixes_singular():
    cov = np.array([[1.0, 1.0], [1.0, 1.0]])  # eigenvalues 2 and 0
    repaired, tag = repair_covariance(cov)
    assert tag == ("jitter", 1e-6)
    assert np.linalg.eigvalsh(repaired)[0] > 0


def test_repair_covariance_pca_floors_trailing_spectrum():
    # jitter (1e-6) cannot lift the -0.004 eigenvalue; the spectral stage
    # keeps the leading component and floors the rest at their clipped mean
    cov = np.diag([10.0, 0.005, -0.004])
    repaired, tag = repair_covariance(cov)
    assert tag == ("pca", 1.0)
    eigs = np.linalg.eigvalsh(repaired)
    assert eigs[0] > 0
    assert eigs[-1] == pytest.approx(10.0)
    assert eigs[0] == pytest.approx(0.0025)


def test_repair_covariance_l2_as_last_resort():
    cov = np.diag([1.0, -1e-3])
    repaired, tag = repair_covariance(cov)
    assert tag[0] == "l2"
    assert np.linalg.eigvalsh(repaired)[0] > 0


def test_split_is_deterministic_and_partitions(tmp_path):
    rng = np.random.default_rng(3)
    rows = rng.normal(size=(53, 3)).tolist()
    pre, _ = preprocess(make_dataset(tmp_path, rows))
    train, test = train_test_split(pre, ratio=0.8, seed=42)
    assert train.n == int(0.8 * 53)  # floor(42.4) = 42
    assert train.n + test.n == 53
    merged = np.vstack([train.X, test.X])
    key = np.lexsort(merged.T)
    original = pre.X[np.lexsort(pre.X.T)]
    assert np.allclose(merged[key], original)
    train2, _ = train_test_split(pre, ratio=0.8, seed=42)
    assert np.array_equal(train.X, train2.X)
    train3, _ = train_test_split(pre, ratio=0.8, seed=7)
    assert not np.array_equal(train.X, train3.X)


def test_split_rejects_degenerate_ratio(tmp_path):
    rows = [[i, i + 1, i] for i in range(5)]
    pre, _ = preprocess(make_dataset(tmp_path, rows))
    with pytest.raises(DatasetError):
        train_test_split(pre, ratio=0.05, seed=0)
