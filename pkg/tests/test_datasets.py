"""Dataset loading, splitting, and the IDX wire format."""

import gzip
import shutil

import numpy as np
import pytest

from mtspike.coding import CodingParams
from mtspike.datasets import (
    EncodedDataset,
    EncodingSpec,
    RawDataset,
    attribute_ranges,
    encode_dataset,
    load_iris,
    load_mnist_idx,
    save_mnist_idx,
    split_dataset,
    stratified_subset,
)
from mtspike.errors import ConfigError, DataError


# --- iris-style CSV ---------------------------------------------------------


def test_load_repo_iris(iris_path):
    ds = load_iris(iris_path)
    assert ds.features.shape == (150, 4)
    assert ds.class_names == ("setosa", "versicolor", "virginica")
    assert np.bincount(ds.labels).tolist() == [50, 50, 50]
    assert ds.num_classes == 3


def test_header_row_is_skipped(tmp_path):
    path = tmp_path / "flowers.csv"
    path.write_text(
        "sepal_l,sepal_w,petal_l,petal_w,species\n"
        "5.1,3.5,1.4,0.2,Iris-setosa\n"
        "6.0,2.9,4.5,1.5,Iris-versicolor\n"
    )
    ds = load_iris(path)
    assert len(ds) == 2
    assert ds.class_names == ("setosa", "versicolor")


def test_label_normalization_and_alphabetical_order(tmp_path):
    path = tmp_path / "mixed.csv"
    path.write_text(
        "1,1,1,1,Iris-Virginica\n"
        "2,2,2,2,SETOSA\n"
        "3,3,3,3,iris-setosa\n"
    )
    ds = load_iris(path)
    assert ds.class_names == ("setosa", "virginica")
    assert ds.labels.tolist() == [1, 0, 0]


def test_malformed_rows_report_line_numbers(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,1,1,1,setosa\n1,1,1,setosa\n")
    with pytest.raises(DataError, match=r"bad\.csv:2"):
        load_iris(path)
    path.write_text("1,1,1,1,setosa\n1,1,oops,1,setosa\n")
    with pytest.raises(DataError, match=":2: non-numeric"):
        load_iris(path)
    path.write_text("1,1,1,1,setosa\n2,2,2,2,\n")
    with pytest.raises(DataError, match=":2: empty class label"):
        load_iris(path)


def test_missing_or_empty_iris_file(tmp_path):
    with pytest.raises(DataError, match="cannot read"):
        load_iris(tmp_path / "nope.csv")
    empty = tmp_path / "empty.csv"
    empty.write_text("attribute_a,attribute_b,attribute_c,attribute_d,label\n")
    with pytest.raises(DataError, match="no data rows"):
        load_iris(empty)


# --- raw dataset container --------------------------------------------------


def test_raw_dataset_validation():
    with pytest.raises(DataError):
        RawDataset(features=np.zeros((3, 4)), labels=np.zeros(2, dtype=int))
    with pytest.raises(DataError):
        RawDataset(features=np.zeros((2, 4)), labels=np.array([0, -1]))
    with pytest.raises(DataError):
        RawDataset(features=np.zeros((2, 4)), labels=np.zeros((2, 1), dtype=int))


def test_attribute_ranges():
    feats = np.array([[1.0, 10.0], [3.0, -2.0], [2.0, 4.0]])
    assert attribute_ranges(feats).tolist() == [[1.0, 3.0], [-2.0, 10.0]]
    with pytest.raises(DataError):
        attribute_ranges(np.zeros(3))


# --- splits and subsets -----------------------------------------------------


def test_split_is_stratified_and_disjoint(iris_path):
    ds = load_iris(iris_path)
    train, test = split_dataset(ds, 0.8, seed=0)
    assert np.bincount(train.labels).tolist() == [40, 40, 40]
    assert np.bincount(test.labels).tolist() == [10, 10, 10]
    joined = np.concatenate([train.features, test.features])
    assert joined.shape == ds.features.shape
    # every original row appears exactly once across the two halves
    seen = {tuple(row) for row in joined}
    assert seen == {tuple(row) for row in ds.features}


def test_split_determinism(iris_path):
    ds = load_iris(iris_path)
    a_train, _ = split_dataset(ds, 0.8, seed=3)
    b_train, _ = split_dataset(ds, 0.8, seed=3)
    c_train, _ = split_dataset(ds, 0.8, seed=4)
    assert np.array_equal(a_train.features, b_train.features)
    assert not np.array_equal(a_train.features, c_train.features)


def test_split_validation():
    ds = RawDataset(features=np.zeros((4, 2)), labels=np.array([0, 0, 1, 1]))
    with pytest.raises(ConfigError):
        split_dataset(ds, 1.0, seed=0)
    with pytest.raises(ConfigError):
        split_dataset(ds, 0.0, seed=0)
    tiny = RawDataset(features=np.zeros((1, 2)), labels=np.array([0]))
    with pytest.raises(ConfigError):
        split_dataset(tiny, 0.5, seed=0)


def test_stratified_subset_quotas():
    labels = np.array([0] * 50 + [1] * 50 + [2] * 50)
    ds = RawDataset(features=np.arange(150, dtype=float).reshape(150, 1),
                    labels=labels)
    sub = stratified_subset(ds, 10, seed=0)
    # 10/3 per class floors to 3 each; the leftover slot goes to class 0
    assert np.bincount(sub.labels).tolist() == [4, 3, 3]
    again = stratified_subset(ds, 10, seed=0)
    assert np.array_equal(sub.features, again.features)
    assert stratified_subset(ds, 150, seed=0) is ds
    with pytest.raises(ConfigError):
        stratified_subset(ds, 0, seed=0)
    with pytest.raises(ConfigError):
        stratified_subset(ds, 151, seed=0)


def test_subset_of_unbalanced_data_respects_proportions():
    labels = np.array([0] * 90 + [1] * 10)
    ds = RawDataset(features=np.zeros((100, 1)), labels=labels)
    sub = stratified_subset(ds, 20, seed=1)
    assert np.bincount(sub.labels).tolist() == [18, 2]


# --- IDX files --------------------------------------------------------------


def test_idx_round_trip_is_byte_exact(tmp_path):
    rng = np.random.default_rng(0)
    images = rng.integers(0, 256, (7, 5, 5)).astype(np.uint8)
    labels = rng.integers(0, 10, 7).astype(np.uint8)
    save_mnist_idx(images, labels, tmp_path / "img", tmp_path / "lbl")
    ds = load_mnist_idx(tmp_path / "img", tmp_path / "lbl")
    assert np.array_equal(ds.features, images)
    assert np.array_equal(ds.labels, labels)
    assert ds.class_names == tuple(str(d) for d in range(10))
    # a second save of the loaded data reproduces the files bit for bit
    save_mnist_idx(ds.features, ds.labels, tmp_path / "img2", tmp_path / "lbl2")
    assert (tmp_path / "img").read_bytes() == (tmp_path / "img2").read_bytes()
    assert (tmp_path / "lbl").read_bytes() == (tmp_path / "lbl2").read_bytes()


def test_idx_gzip_transparent(tmp_path):
    rng = np.random.default_rng(1)
    images = rng.integers(0, 256, (3, 4, 4)).astype(np.uint8)
    labels = np.array([1, 2, 3], dtype=np.uint8)
    save_mnist_idx(images, labels, tmp_path / "img", tmp_path / "lbl")
    for name in ("img", "lbl"):
        with open(tmp_path / name, "rb") as src:
            with gzip.open(tmp_path / f"{name}.gz", "wb") as dst:
                shutil.copyfileobj(src, dst)
    ds = load_mnist_idx(tmp_path / "img.gz", tmp_path / "lbl.gz")
    assert np.array_equal(ds.features, images)
    assert np.array_equal(ds.labels, labels)


def test_idx_error_cases(tmp_path):
    good_img, good_lbl = tmp_path / "img", tmp_path / "lbl"
    images = np.zeros((2, 3, 3), dtype=np.uint8)
    labels = np.zeros(2, dtype=np.uint8)
    save_mnist_idx(images, labels, good_img, good_lbl)

    bad = tmp_path / "bad"
    bad.write_bytes(b"\x00\x00")
    with pytest.raises(DataError, match="truncated IDX image header"):
        load_mnist_idx(bad, good_lbl)

    bad.write_bytes(b"\x00" * 16)
    with pytest.raises(DataError, match="bad IDX image magic"):
        load_mnist_idx(bad, good_lbl)

    raw = good_img.read_bytes()
    bad.write_bytes(raw[:-1])
    with pytest.raises(DataError, match="truncated image data"):
        load_mnist_idx(bad, good_lbl)
    bad.write_bytes(raw + b"\x00")
    with pytest.raises(DataError, match="trailing bytes"):
        load_mnist_idx(bad, good_lbl)

    bad_lbl = tmp_path / "badlbl"
    bad_lbl.write_bytes(good_lbl.read_bytes()[:-1])
    with pytest.raises(DataError, match="label data length"):
        load_mnist_idx(good_img, bad_lbl)

    # mismatched counts between the two files
    save_mnist_idx(np.zeros((3, 3, 3), dtype=np.uint8),
                   np.zeros(3, dtype=np.uint8), tmp_path / "img3", tmp_path / "lbl3")
    with pytest.raises(DataError, match="does not match label count"):
        load_mnist_idx(good_img, tmp_path / "lbl3")


def test_save_idx_validation(tmp_path):
    with pytest.raises(DataError):
        save_mnist_idx(np.zeros((2, 3)), np.zeros(2), tmp_path / "a", tmp_path / "b")
    with pytest.raises(DataError):
        save_mnist_idx(np.zeros((2, 3, 3)), np.zeros(3), tmp_path / "a", tmp_path / "b")
    with pytest.raises(DataError):
        save_mnist_idx(np.full((1, 2, 2), 300.0), np.zeros(1),
                       tmp_path / "a", tmp_path / "b")


# --- encoding specs and encoded datasets ------------------------------------


def test_encoding_spec_dict_round_trip():
    spec = EncodingSpec(
        scheme="numeric",
        params=CodingParams(window=8.0, unit=0.5),
        ranges=np.array([[0.0, 1.0], [2.0, 5.0]]),
    )
    back = EncodingSpec.from_dict(spec.to_dict())
    assert back.scheme == spec.scheme
    assert back.params == spec.params
    assert np.array_equal(back.ranges, spec.ranges)
    conv = EncodingSpec(scheme="conv",
                        params=CodingParams(kernel=4, stride=2))
    assert EncodingSpec.from_dict(conv.to_dict()).params.kernel == 4


def test_encoding_spec_validation():
    with pytest.raises(ConfigError):
        EncodingSpec(scheme="fourier")
    with pytest.raises(ConfigError):
        EncodingSpec(scheme="conv")  # needs a kernel
    with pytest.raises(ConfigError):
        EncodingSpec(scheme="numeric", ranges=np.zeros(4))
    with pytest.raises(ConfigError, match="missing field"):
        EncodingSpec.from_dict({"scheme": "numeric"})


def test_numeric_spec_requires_fitted_ranges():
    spec = EncodingSpec(scheme="numeric")
    with pytest.raises(ConfigError, match="ranges"):
        spec.encode_sample(np.array([1.0, 2.0]))


def test_encode_dataset_stacks_samples(iris_path):
    ds = load_iris(iris_path)
    spec = EncodingSpec(scheme="numeric", ranges=attribute_ranges(ds.features))
    enc = encode_dataset(ds, spec)
    assert enc.delays.shape == (150, 4)
    assert enc.fired.all()
    assert np.array_equal(enc.labels, ds.labels)
    vec, label = enc.sample(3)
    assert np.array_equal(vec.delays, enc.delays[3])
    assert label == int(ds.labels[3])
    # sample() hands out copies, not views
    vec.delays[0] += 1.0
    assert vec.delays[0] != enc.delays[3][0]


def test_encode_dataset_rejects_empty():
    spec = EncodingSpec(scheme="numeric", ranges=np.array([[0.0, 1.0]]))
    empty = RawDataset(features=np.zeros((0, 1)), labels=np.zeros(0, dtype=int))
    with pytest.raises(DataError, match="empty"):
        encode_dataset(empty, spec)


def test_encoded_dataset_validation():
    with pytest.raises(DataError):
        EncodedDataset(delays=np.zeros((2, 3)), fired=np.ones((2, 2), bool),
                       labels=np.zeros(2, dtype=int))
    with pytest.raises(DataError):
        EncodedDataset(delays=np.zeros((2, 3)), fired=np.ones((2, 3), bool),
                       labels=np.zeros(3, dtype=int))
