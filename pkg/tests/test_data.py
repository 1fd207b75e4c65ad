import json
import math

import numpy as np
import pytest

from analogy_ot import streams
from analogy_ot.config import ConfigError, RunConfig, predicate_from_spec
from analogy_ot.data import (
    DatasetError,
    dumps_report,
    generate_class_blobs,
    generate_gaussian,
    load_dataset,
    save_dataset,
    write_plot_data,
    write_report,
)
from analogy_ot.estimation import LabeledSample, class_geometry, estimate_delta


def test_load_plain_csv(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("1,2\n3,4\n\n5,6\n")
    X = load_dataset(path)
    assert X.shape == (3, 2) and X[2, 1] == 6.0


def test_load_labeled_with_header(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("f1,f2,cls\n0,1,b\n2,3,a\n4,5,b\n")
    data = load_dataset(path, has_header=True, label_column="cls")
    assert isinstance(data, LabeledSample)
    assert data.n_classes == 2 and data.label_names == ("b", "a")
    np.testing.assert_array_equal(data.labels, [0, 1, 0])
    again = load_dataset(path, has_header=True, label_column=-1)
    np.testing.assert_array_equal(again.points, data.points)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("1,2\n3,NaN\n", "line 2, column 2"),
        ("1,2\n3,x\n", "line 2, column 2"),
        ("1,2\n3\n", "line 2 has 1 columns"),
        ("", "no data rows"),
        ("1,inf\n", "line 1, column 2"),
    ],
)
def test_load_errors_name_the_row(tmp_path, text, fragment):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(DatasetError, match=fragment):
        load_dataset(path)


def test_label_column_errors(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(DatasetError):
        load_dataset(path, has_header=True, label_column="c")
    with pytest.raises(DatasetError):
        load_dataset(path, label_column=5)


def test_save_load_round_trip(tmp_path):
    g = np.random.default_rng(0)
    X = g.normal(size=(25, 3)) * 1e5
    labels = g.integers(0, 3, size=25)
    save_dataset(tmp_path / "r.csv", X, labels)
    back = load_dataset(tmp_path / "r.csv", label_column=3)
    np.testing.assert_array_equal(back.points, X)


def test_generate_gaussian_reproducible_and_streamed():
    a = generate_gaussian(100, 2, stream=5)
    b = generate_gaussian(100, 2, stream=streams.SeededStream(5, (streams.GAUSSIAN,)))
    np.testing.assert_array_equal(a, b)
    c = generate_gaussian(100, 2, stream=streams.SeededStream(5, (streams.GAUSSIAN, 1)))
    assert not np.array_equal(a, c)


def test_generate_gaussian_degenerate_and_clt():
    X = generate_gaussian(10, 3, mean=[1, 2, 3], scale=np.zeros((3, 3)))
    np.testing.assert_array_equal(X, np.tile([1.0, 2.0, 3.0], (10, 1)))
    n, scale = 100_000, 2.0
    X = generate_gaussian(n, 2, mean=[5.0, -1.0], scale=scale, stream=1)
    assert np.all(np.abs(X.mean(axis=0) - [5.0, -1.0]) <= 4 * scale / math.sqrt(n))


def test_generate_gaussian_factor_validation():
    with pytest.raises(ValueError):
        generate_gaussian(5, 2, scale=np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        generate_gaussian(5, 2, mean=[0.0])
    L = np.array([[1.0, 0.0], [0.5, 2.0]])
    X = generate_gaussian(50_000, 2, scale=L, stream=2)
    np.testing.assert_allclose(np.cov(X.T), L @ L.T, atol=0.06)


def test_blobs_separable_and_overlapping():
    far = generate_class_blobs([{"n": 60, "mean": [0, 0], "scale": 1}, {"n": 60, "mean": [10, 0], "scale": 1}], seed=0)
    assert estimate_delta(class_geometry(far)).separable
    same = generate_class_blobs([{"n": 60, "mean": [0, 0], "scale": 1}, {"n": 60, "mean": [0, 0], "scale": 1}], seed=0)
    assert estimate_delta(class_geometry(same)).value <= 0
    three = generate_class_blobs(
        [{"n": 20, "mean": [0, 0]}, {"n": 25, "mean": [4, 0]}, {"n": 30, "mean": [0, 4]}], seed=1
    )
    D = class_geometry(three).distance_matrix
    np.testing.assert_array_equal(D, D.T)
    np.testing.assert_array_equal(np.diag(D), 0)


def test_blob_spec_errors():
    with pytest.raises(ValueError):
        generate_class_blobs([{"n": 5, "mean": [0, 0]}], seed=0)
    with pytest.raises(ValueError):
        generate_class_blobs([{"n": 0, "mean": [0, 0]}, {"n": 5, "mean": [0, 0]}], seed=0)


def test_report_serialisation_round_trip(tmp_path):
    report = {
        "a": 0.1,
        "b": np.float64(1) / 3,
        "c": [1, 2.0, None, True],
        "d": {"inf": math.inf, "arr": np.arange(3)},
        "e": np.int64(7),
    }
    text = dumps_report(report)
    assert "0.10000000000000001" in text and '"inf": Infinity' in text
    back = json.loads(text)
    assert back["b"] == 1 / 3 and back["c"] == [1, 2.0, None, True] and back["d"]["arr"] == [0, 1, 2]
    assert list(back) == ["a", "b", "c", "d", "e"]
    write_report(report, tmp_path / "r.json")
    assert (tmp_path / "r.json").read_text() == text


def test_plot_data_rows(tmp_path):
    write_plot_data(np.linspace(0, 1, 17), tmp_path / "p.csv")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "w_p" and len(lines) == 18


def test_run_config_validation(tmp_path):
    assert RunConfig().estimator == "exact"
    with pytest.raises(ConfigError, match="unknown config keys: bogus"):
        RunConfig.from_dict({"bogus": 1})
    for bad in ({"p": 0.5}, {"alpha": 1.0}, {"B": 1}, {"estimator": "sinkhorn"}, {"seed": -1}, {"x0": 3}):
        with pytest.raises(ConfigError):
            RunConfig.from_dict(bad)
    path = tmp_path / "c.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        RunConfig.load(path)
    cfg = RunConfig.from_dict({"B": 10}).replace(B=None, seed=4)
    assert (cfg.B, cfg.seed) == (10, 4)


def test_reference_point():
    X = np.array([[0.0, 0.0], [2.0, 2.0]])
    np.testing.assert_array_equal(RunConfig().reference_point(X), [1.0, 1.0])
    np.testing.assert_array_equal(RunConfig(x0=[3.0, 4.0]).reference_point(X), [3.0, 4.0])
    with pytest.raises(ConfigError):
        RunConfig(x0=[1.0]).reference_point(X)


def test_predicates_from_config():
    X = np.array([[0.0, 0.0], [3.0, 0.0]])
    np.testing.assert_array_equal(predicate_from_spec({"kind": "ball", "center": [0, 0], "radius": 1})(X), [True, False])
    np.testing.assert_array_equal(
        predicate_from_spec({"kind": "outside_ball", "center": [0, 0], "radius": 1})(X), [False, True]
    )
    np.testing.assert_array_equal(predicate_from_spec({"kind": "linear", "weights": [1, 0], "bias": -1})(X), [False, True])
    assert predicate_from_spec({"kind": "constant", "value": -1})(X).sum() == 0
    for bad in ({"kind": "ball"}, {"kind": "cube"}, {"kind": "constant", "value": 1, "x": 2}, {"value": 1}):
        with pytest.raises(ConfigError):
            predicate_from_spec(bad)
