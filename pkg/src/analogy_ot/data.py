"""Dataset CSV I/O, synthetic generators and the JSON report writer."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from . import streams
from .estimation import LabeledSample
from .metric import as_point

__all__ = [
    "DatasetError",
    "load_dataset",
    "save_dataset",
    "generate_gaussian",
    "generate_class_blobs",
    "dumps_report",
    "write_report",
    "write_plot_data",
]


class DatasetError(ValueError):
    pass


def _parse_float(text: str, lineno: int, col: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DatasetError(f"line {lineno}, column {col + 1}: cannot parse {text!r} as a number") from None
    if not math.isfinite(value):
        raise DatasetError(f"line {lineno}, column {col + 1}: non-finite value {text!r}")
    return value


def load_dataset(path, has_header: bool = False, label_column: int | str | None = None):
    """Read a comma-separated feature file.

    Returns an ``(n, d)`` array, or a :class:`LabeledSample` when
    ``label_column`` (zero-based index, or header name) is given.  Labels are
    mapped to ``0..K-1`` in order of first appearance; the original values are
    kept in ``label_names``.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh), start=1) if any(c.strip() for c in r)]
    if has_header:
        if not rows:
            raise DatasetError(f"{path}: empty file")
        header = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    else:
        header = None
    if not rows:
        raise DatasetError(f"{path}: no data rows")

    width = len(rows[0][1])
    label_idx = None
    if label_column is not None:
        if isinstance(label_column, str):
            if header is None or label_column not in header:
                raise DatasetError(f"{path}: label column {label_column!r} not found in header")
            label_idx = header.index(label_column)
        else:
            label_idx = int(label_column)
            if label_idx < 0:
                label_idx += width
            if not 0 <= label_idx < width:
                raise DatasetError(f"{path}: label column index {label_column} out of range")

    points, raw_labels = [], []
    for lineno, row in rows:
        if len(row) != width:
            raise DatasetError(f"{path}: line {lineno} has {len(row)} columns, expected {width}")
        feats = []
        for col, cell in enumerate(row):
            if col == label_idx:
                raw_labels.append(cell.strip())
            else:
                feats.append(_parse_float(cell.strip(), lineno, col))
        points.append(feats)
    X = np.array(points, dtype=float)
    if X.shape[1] == 0:
        raise DatasetError(f"{path}: no feature columns")
    if label_idx is None:
        return X
    names: dict[str, int] = {}
    labels = np.array([names.setdefault(lab, len(names)) for lab in raw_labels])
    return LabeledSample(X, labels, tuple(names))


def save_dataset(path, X, labels=None):
    """Write features (and optional trailing label column) with round-trip precision."""
    X = np.asarray(X, dtype=float)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for i, row in enumerate(X):
            cells = [repr(float(v)) for v in row]
            if labels is not None:
                cells.append(str(labels[i]))
            writer.writerow(cells)


def _as_stream(stream) -> streams.SeededStream:
    if isinstance(stream, streams.SeededStream):
        return stream
    return streams.SeededStream(int(stream), (streams.GAUSSIAN,))


def generate_gaussian(n: int, d: int, mean=None, scale=1.0, stream=0) -> np.ndarray:
    """i.i.d. normal sample: ``mean + Z @ factor.T``.

    ``scale`` is a scalar standard deviation or a ``(d, d)`` lower-triangular
    covariance factor.  ``Z`` comes from numpy's PCG64 + ziggurat normal
    sampler on the given stream, so output is fixed by (seed, stream id).
    """
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    mu = np.zeros(d) if mean is None else as_point(mean, "mean")
    if mu.size != d:
        raise ValueError(f"mean has {mu.size} coordinates, expected {d}")
    Z = _as_stream(stream).generator().standard_normal((n, d))
    factor = np.asarray(scale, dtype=float)
    if factor.ndim == 0:
        if not (factor >= 0 and math.isfinite(factor)):
            raise ValueError("scale must be a finite real >= 0")
        return mu + Z * float(factor)
    if factor.shape != (d, d) or not np.all(np.isfinite(factor)):
        raise ValueError(f"covariance factor must be a finite ({d}, {d}) matrix")
    if np.any(np.triu(factor, k=1) != 0):
        raise ValueError("covariance factor must be lower-triangular")
    return mu + Z @ factor.T


def generate_class_blobs(spec, seed: int) -> LabeledSample:
    """Concatenated Gaussian blobs; class k draws from stream (seed, BLOBS, k).

    ``spec`` is a list of mappings with keys ``n``, ``mean`` and ``scale``.
    """
    if len(spec) < 2:
        raise ValueError("need at least two classes")
    parts, labels = [], []
    for k, blob in enumerate(spec):
        n = int(blob["n"])
        if n < 1:
            raise ValueError(f"class {k} has n = {n}; every class needs at least one point")
        mean = as_point(blob["mean"], "mean")
        pts = generate_gaussian(n, mean.size, mean, blob.get("scale", 1.0), streams.SeededStream(seed, (streams.BLOBS, k)))
        parts.append(pts)
        labels.append(np.full(n, k))
    dims = {p.shape[1] for p in parts}
    if len(dims) != 1:
        raise ValueError("all classes must share the same dimension")
    return LabeledSample(np.vstack(parts), np.concatenate(labels), tuple(str(k) for k in range(len(spec))))


# ---------------------------------------------------------------------------
# report serialisation
# ---------------------------------------------------------------------------


def _float_text(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return "null" if obj is None else ("true" if obj else "false")
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float_text(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps_report(report: dict, indent: int = 2) -> str:
    """JSON text with reals at 17 significant digits and keys in insertion order."""
    return _encode(report, indent, 0) + "\n"


def write_report(report: dict, path) -> None:
    path = Path(path)
    try:
        path.write_text(dumps_report(report), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def write_plot_data(replicates, path) -> None:
    """One bootstrap replicate per line under a ``w_p`` header."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write("w_p\n")
        for v in replicates:
            fh.write(_float_text(float(v)) + "\n")
