"""Loading datasets from libsvm and numeric CSV text."""

import io
import re

import numpy as np

from .core import Dataset
from .errors import DataFormatError

MAX_FEATURES = 100_000

_FLOAT = re.compile(r"[+-]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?")
_INDEX = re.compile(r"[0-9]+")


def _read_text(stream):
    if isinstance(stream, (bytes, bytearray)):
        data = bytes(stream)
    elif isinstance(stream, str):
        return stream
    else:
        data = stream.read()
        if isinstance(data, str):
            return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DataFormatError(f"input is not valid UTF-8 ({exc.reason} at byte {exc.start})") from None


def _number(tok, what, line):
    if not _FLOAT.fullmatch(tok):
        raise DataFormatError(f"cannot parse {what} {tok!r}", line)
    val = float(tok)
    if not np.isfinite(val):
        raise DataFormatError(f"{what} {tok!r} is out of range", line)
    return val


def _label(tok, zero_one, line):
    val = _number(tok, "label", line)
    if zero_one and val in (0.0, 1.0):
        return 2.0 * val - 1.0
    if val not in (1.0, -1.0):
        allowed = "0/1" if zero_one else "-1/+1"
        raise DataFormatError(f"label {tok!r} is not {allowed}", line)
    return val


def parse_libsvm(stream, zero_one=False, max_features=MAX_FEATURES):
    """Parse ``label index:value ...`` lines into a dense :class:`Dataset`.

    Indices are 1-based and strictly ascending; absent indices are zero and
    n is the largest index seen. ``zero_one`` maps labels {0, 1} to {-1, +1}.
    Text after ``#`` is ignored.
    """
    text = _read_text(stream)
    labels, rows = [], []
    n = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        labels.append(_label(tokens[0], zero_one, lineno))
        row = {}
        prev = 0
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep or not _INDEX.fullmatch(idx_s):
                raise DataFormatError(f"malformed feature {tok!r}", lineno)
            idx = int(idx_s)
            if idx < 1:
                raise DataFormatError(f"feature index must be >= 1, got {idx}", lineno)
            if idx <= prev:
                raise DataFormatError(f"non-ascending index {idx} after {prev}", lineno)
            if idx > max_features:
                raise DataFormatError(f"feature index {idx} exceeds the limit {max_features}", lineno)
            row[idx] = _number(val_s, "value", lineno)
            prev = idx
        n = max(n, prev)
        rows.append(row)
    if not rows:
        raise DataFormatError("empty dataset")
    if n == 0:
        raise DataFormatError("dataset has no features")
    X = np.zeros((len(rows), n))
    for i, row in enumerate(rows):
        for idx, val in row.items():
            X[i, idx - 1] = val
    return Dataset(X, np.array(labels))


def parse_csv(stream, label_column=0, header=False, zero_one=False):
    """Parse numeric comma-separated rows; ``label_column`` holds the class."""
    text = _read_text(stream)
    lines = [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), 1)]
    lines = [(i, ln) for i, ln in lines if ln]
    if header and lines:
        lines = lines[1:]
    if not lines:
        raise DataFormatError("empty dataset")
    width = None
    labels, rows = [], []
    for lineno, line in lines:
        cells = [c.strip() for c in line.split(",")]
        if width is None:
            width = len(cells)
            if width < 2:
                raise DataFormatError("need a label column and at least one feature", lineno)
            if not -width <= label_column < width:
                raise DataFormatError(f"label column {label_column} out of range for {width} columns", lineno)
            col = label_column % width
        elif len(cells) != width:
            raise DataFormatError(f"row has {len(cells)} cells, expected {width}", lineno)
        labels.append(_label(cells[col], zero_one, lineno))
        rows.append([_number(c, "cell", lineno) for j, c in enumerate(cells) if j != col])
    return Dataset(np.array(rows), np.array(labels))


def load_dataset(path, fmt=None, **kwargs):
    """Read a dataset file; ``fmt`` is ``libsvm`` or ``csv`` (guessed from the suffix if None)."""
    path = str(path)
    if fmt is None:
        fmt = "csv" if path.lower().endswith(".csv") else "libsvm"
    with open(path, "rb") as fh:
        data = fh.read()
    if fmt == "libsvm":
        return parse_libsvm(io.BytesIO(data), zero_one=kwargs.get("zero_one", False))
    if fmt == "csv":
        return parse_csv(io.BytesIO(data), label_column=kwargs.get("label_column", 0),
                         header=kwargs.get("header", False), zero_one=kwargs.get("zero_one", False))
    raise ValueError(f"unknown data format {fmt!r}")
