import io

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from rosvm.core import Dataset
from rosvm.data import load_dataset, parse_csv, parse_libsvm
from rosvm.errors import DataFormatError


def test_libsvm_example():
    ds = parse_libsvm(b"+1 1:0.5 3:-2\n-1 2:1")
    assert (ds.L, ds.n) == (2, 3)
    np.testing.assert_array_equal(ds.samples, [[0.5, 0, -2], [0, 1, 0]])
    np.testing.assert_array_equal(ds.labels, [1, -1])


def test_libsvm_accepts_streams_and_comments():
    ds = parse_libsvm(io.BytesIO(b"# header\n1 1:1e-3 2:.5  # trailing\n\n-1 2:-4\n"))
    np.testing.assert_array_equal(ds.samples, [[1e-3, 0.5], [0, -4]])
    assert parse_libsvm(io.StringIO("1 1:1")).L == 1


@pytest.mark.parametrize("text,where", [
    (b"1 2:1 1:1", "line 1"),
    (b"1 1:1\n1 1:1 1:2", "line 2"),
    (b"1 1:1\n2 1:1", "line 2"),
    (b"1 1:x", "line 1"),
    (b"1 0:1", "line 1"),
    (b"1 1:1e999", "line 1"),
    (b"1 1:nan", "line 1"),
    (b"1 a:1", "line 1"),
    (b"1 11", "line 1"),
])
def test_libsvm_located_errors(text, where):
    with pytest.raises(DataFormatError, match=where):
        parse_libsvm(text)


def test_libsvm_non_ascending_message():
    with pytest.raises(DataFormatError, match="non-ascending"):
        parse_libsvm(b"1 2:1 1:1")


@pytest.mark.parametrize("text", [b"", b"\n\n  \n", b"# only a comment\n"])
def test_libsvm_empty(text):
    with pytest.raises(DataFormatError, match="empty"):
        parse_libsvm(text)


def test_zero_one_remap():
    ds = parse_libsvm(b"0 1:1\n1 1:2", zero_one=True)
    np.testing.assert_array_equal(ds.labels, [-1, 1])
    with pytest.raises(DataFormatError):
        parse_libsvm(b"0 1:1")
    np.testing.assert_array_equal(parse_csv(b"0,1\n1,2", zero_one=True).labels, [-1, 1])


def test_invalid_utf8():
    with pytest.raises(DataFormatError, match="UTF-8"):
        parse_libsvm(b"1 1:\xff")


@settings(max_examples=10_000, deadline=None, suppress_health_check=list(HealthCheck))
@given(st.binary(max_size=64))
def test_libsvm_total_on_random_bytes(data):
    try:
        ds = parse_libsvm(data)
    except DataFormatError:
        return
    assert isinstance(ds, Dataset) and np.all(np.isfinite(ds.samples))


_token = st.sampled_from(["1", "-1", "+1", "0", "1:1", "2:-0.5", "3:1e3", ":", "1:", "x", "#", " ", "\n", "2:1"])


@settings(max_examples=2000, deadline=None)
@given(st.lists(_token, max_size=20))
def test_libsvm_total_on_near_valid_text(tokens):
    try:
        parse_libsvm(" ".join(tokens).encode())
    except DataFormatError:
        pass


@settings(max_examples=2000, deadline=None)
@given(st.binary(max_size=64))
def test_csv_total_on_random_bytes(data):
    try:
        parse_csv(data)
    except DataFormatError:
        pass


def test_csv_examples():
    ds = parse_csv(b"1,0.5,2\n-1,0,1", label_column=0)
    assert (ds.L, ds.n) == (2, 2)
    np.testing.assert_array_equal(ds.samples, [[0.5, 2], [0, 1]])
    ds = parse_csv(b"a,b,label\n0.5,2,1\n0,1,-1\n", label_column=-1, header=True)
    np.testing.assert_array_equal(ds.labels, [1, -1])


@pytest.mark.parametrize("text,msg", [
    (b"1,0.5,2\n-1,0", "line 2"),
    (b"1,0.5,2\n3,0,1", "label"),
    (b"1,0.5,abc", "line 1"),
    (b"", "empty"),
])
def test_csv_errors(text, msg):
    with pytest.raises(DataFormatError, match=msg):
        parse_csv(text)


def test_load_dataset_guesses_format(tmp_path):
    (tmp_path / "a.csv").write_text("1,2\n-1,3\n")
    (tmp_path / "a.svm").write_text("1 1:2\n-1 1:3\n")
    assert load_dataset(tmp_path / "a.csv").samples.tolist() == load_dataset(tmp_path / "a.svm").samples.tolist()
