"""Edge stream and label file ingestion.

Input files are newline-delimited ``source,destination,tick`` triples
of non-negative integers, comma- or space-separated; label files carry
one 0/1 token per line.  Node ids are interned to dense integers in
first-seen order (the detectors stay constant-memory because this
dictionary lives here, on the ingest side).  Ticks are kept verbatim
unless a tick divisor is given, in which case raw timestamps are
integer-divided and rebased to start at 1.

Loading takes a fast bulk-parse path; when that fails, a line-by-line
diagnostic pass pins the exact offending line for the error message.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .detector import Edge
from .errors import OrderingError, ParameterError, ParseError

FORMATS = ("auto", "comma", "space")


@dataclass
class LabeledStream:
    """An edge stream with optional per-edge ground truth.

    ``sources``/``destinations`` are dense interned node ids, ``ticks``
    are non-decreasing and >= 1, ``labels`` (when present) align with
    the edges by index.
    """

    sources: np.ndarray
    destinations: np.ndarray
    ticks: np.ndarray
    node_count: int
    labels: np.ndarray | None = None

    @property
    def edge_count(self) -> int:
        return int(self.ticks.shape[0])

    @property
    def tick_range(self) -> tuple[int, int]:
        if self.edge_count == 0:
            return (0, 0)
        return int(self.ticks[0]), int(self.ticks[-1])

    def iter_edges(self) -> Iterator[Edge]:
        for u, v, t in zip(self.sources, self.destinations, self.ticks):
            yield Edge(int(u), int(v), int(t))

    def prefix(self, n: int) -> "LabeledStream":
        if n > self.edge_count:
            raise ParameterError(
                f"prefix {n} exceeds stream length {self.edge_count}"
            )
        return LabeledStream(
            sources=self.sources[:n],
            destinations=self.destinations[:n],
            ticks=self.ticks[:n],
            node_count=self.node_count,
            labels=None if self.labels is None else self.labels[:n],
        )

    def with_labels(self, labels: np.ndarray) -> "LabeledStream":
        if labels.shape[0] != self.edge_count:
            raise ParameterError(
                f"{labels.shape[0]} labels for {self.edge_count} edges"
            )
        return LabeledStream(
            sources=self.sources,
            destinations=self.destinations,
            ticks=self.ticks,
            node_count=self.node_count,
            labels=labels,
        )


def _intern_first_seen(raw: np.ndarray) -> tuple[np.ndarray, int]:
    """Map arbitrary ids to dense ids in order of first appearance."""
    uniq, first_pos, inverse = np.unique(raw, return_index=True, return_inverse=True)
    order = np.argsort(first_pos, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.shape[0])
    return rank[inverse], int(uniq.shape[0])


def _sniff_delimiter(path: Path) -> str | None:
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                return "," if "," in line else None
    return None


def _resolve_delimiter(path: Path, fmt: str) -> str | None:
    if fmt not in FORMATS:
        raise ParameterError(f"format must be one of {FORMATS}, got {fmt!r}")
    if fmt == "comma":
        return ","
    if fmt == "space":
        return None
    return _sniff_delimiter(path)


def _load_int_table(path: Path, delimiter: str | None) -> np.ndarray:
    """Bulk-parse integer columns strictly: float tokens are errors, an
    empty file yields an empty table."""
    with warnings.catch_warnings():
        # numpy only warns when an integer field is parsed via float;
        # for this format that is a malformed file.
        warnings.simplefilter("error", DeprecationWarning)
        warnings.filterwarnings("ignore", message=".*no data.*", category=UserWarning)
        return np.loadtxt(path, dtype=np.int64, delimiter=delimiter, ndmin=2)


def _diagnose_edges(path: Path, delimiter: str | None) -> None:
    """Slow pass that raises with the exact line number; used after the
    bulk parser rejected the file."""
    last_tick = None
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            parts = stripped.split(delimiter)
            if len(parts) != 3:
                raise ParseError(
                    f"{path}: line {lineno}: expected 3 fields, got {len(parts)}",
                    line=lineno,
                )
            try:
                u, v, t = (int(p) for p in parts)
            except ValueError:
                raise ParseError(
                    f"{path}: line {lineno}: fields must be integers: {stripped!r}",
                    line=lineno,
                ) from None
            if u < 0 or v < 0 or t < 0:
                raise ParseError(
                    f"{path}: line {lineno}: fields must be non-negative",
                    line=lineno,
                )
            if last_tick is not None and t < last_tick:
                raise OrderingError(
                    f"{path}: line {lineno}: tick {t} after tick {last_tick}",
                    position=lineno,
                )
            last_tick = t


def load_edges(
    path: str | Path,
    fmt: str = "auto",
    tick_divisor: int | None = None,
) -> LabeledStream:
    """Load and validate an edge file.

    Raises :class:`ParseError` or :class:`OrderingError` with the
    offending line number, and ``FileNotFoundError`` for missing paths.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such edge file: {path}")
    if tick_divisor is not None and tick_divisor < 1:
        raise ParameterError(f"tick divisor must be >= 1, got {tick_divisor}")
    delimiter = _resolve_delimiter(path, fmt)
    try:
        table = _load_int_table(path, delimiter)
    except (ValueError, DeprecationWarning):
        _diagnose_edges(path, delimiter)
        raise ParseError(f"{path}: malformed edge file") from None
    if table.size == 0:
        return LabeledStream(
            sources=np.empty(0, dtype=np.int64),
            destinations=np.empty(0, dtype=np.int64),
            ticks=np.empty(0, dtype=np.int64),
            node_count=0,
        )
    if table.shape[1] != 3:
        _diagnose_edges(path, delimiter)
        raise ParseError(f"{path}: expected 3 columns, got {table.shape[1]}")
    if table.min() < 0:
        _diagnose_edges(path, delimiter)
        raise ParseError(f"{path}: negative field")
    ticks = table[:, 2].copy()
    if np.any(np.diff(ticks) < 0):
        _diagnose_edges(path, delimiter)
        raise OrderingError(f"{path}: ticks decrease")
    if tick_divisor is not None:
        ticks = ticks // tick_divisor
        ticks = ticks - ticks[0] + 1
    # Intern over the interleaved (source, destination) sequence so the
    # id assignment matches reading the file left to right, top down.
    interleaved = np.empty(table.shape[0] * 2, dtype=np.int64)
    interleaved[0::2] = table[:, 0]
    interleaved[1::2] = table[:, 1]
    dense, node_count = _intern_first_seen(interleaved)
    return LabeledStream(
        sources=np.ascontiguousarray(dense[0::2]),
        destinations=np.ascontiguousarray(dense[1::2]),
        ticks=np.ascontiguousarray(ticks),
        node_count=node_count,
    )


def _diagnose_labels(path: Path) -> None:
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped not in ("0", "1"):
                raise ParseError(
                    f"{path}: line {lineno}: labels must be 0 or 1, got {stripped!r}",
                    line=lineno,
                )


def load_labels(path: str | Path) -> np.ndarray:
    """Load a 0/1 label file aligned with an edge file by line."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such label file: {path}")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", DeprecationWarning)
            warnings.filterwarnings("ignore", message=".*no data.*", category=UserWarning)
            values = np.loadtxt(path, dtype=np.int64, ndmin=1)
    except (ValueError, DeprecationWarning):
        _diagnose_labels(path)
        raise ParseError(f"{path}: malformed label file") from None
    if values.size == 0:
        return np.empty(0, dtype=np.uint8)
    if values.ndim != 1:
        raise ParseError(f"{path}: expected one label per line")
    if not np.isin(values, (0, 1)).all():
        _diagnose_labels(path)
        raise ParseError(f"{path}: labels must be 0 or 1")
    return values.astype(np.uint8)


def write_edges(stream: LabeledStream, path: str | Path, fmt: str = "comma") -> None:
    if fmt == "auto":
        fmt = "comma"
    if fmt not in FORMATS:
        raise ParameterError(f"format must be one of {FORMATS}, got {fmt!r}")
    sep = "," if fmt == "comma" else " "
    with open(path, "w", encoding="utf-8") as handle:
        for u, v, t in zip(stream.sources, stream.destinations, stream.ticks):
            handle.write(f"{u}{sep}{v}{sep}{t}\n")


def write_labels(labels: np.ndarray, path: str | Path) -> None:
    np.savetxt(path, np.asarray(labels, dtype=np.int64), fmt="%d")


def write_scores(
    scores: np.ndarray, path: str | Path, flags: np.ndarray | None = None
) -> None:
    """One score per line, 9 significant digits; flags add a 0/1 column."""
    buf = io.StringIO()
    if flags is None:
        for s in scores:
            buf.write(f"{s:.9g}\n")
    else:
        for s, f in zip(scores, flags):
            buf.write(f"{s:.9g} {int(f)}\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def load_scores(path: str | Path) -> np.ndarray:
    """Read back a score file (first column only)."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such score file: {path}")
    values = np.loadtxt(path, dtype=np.float64, ndmin=2)
    if values.size == 0:
        return np.empty(0, dtype=np.float64)
    return np.ascontiguousarray(values[:, 0])
