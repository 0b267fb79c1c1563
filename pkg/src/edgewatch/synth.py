"""Synthetic edge streams: stationary background plus injected bursts.

The background draws Poisson counts per (pair, tick) over a sparse
random subset of directed pairs, matching the constant-mean-level null
model the decision procedure tests against.  A burst replaces the
designated pair's count over its window with ``round(magnitude *
background_rate)`` copies per tick (at least one above the background
draw), topped up when needed so the emitted stream always satisfies the
defining count-ratio inequality against the preceding window.  Burst
pairs need not belong to the background subset; a pair with no prior
occurrences trivially satisfies the ratio.

All burst-window occurrences of a burst pair are labeled 1, everything
else 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .stream_io import LabeledStream


@dataclass(frozen=True)
class Burst:
    """A single-pair burst: ``magnitude`` of at least the count-ratio
    threshold (> 1) sustained for ``duration`` ticks from ``start_tick``."""

    source: int
    destination: int
    start_tick: int
    duration: int
    magnitude: float


@dataclass(frozen=True)
class SynthSpec:
    nodes: int
    ticks: int
    background_rate: float
    bursts: tuple[Burst, ...] = ()
    seed: int = 0
    active_pairs: int | None = None

    def __post_init__(self):
        if self.nodes < 2:
            raise ParameterError(f"need at least 2 nodes, got {self.nodes}")
        if self.ticks < 1:
            raise ParameterError(f"need at least 1 tick, got {self.ticks}")
        if self.background_rate <= 0.0:
            raise ParameterError(
                f"background rate must be > 0, got {self.background_rate}"
            )
        if self.active_pairs is not None and self.active_pairs < 1:
            raise ParameterError("active_pairs must be >= 1")
        for burst in self.bursts:
            self._check_burst(burst)

    def _check_burst(self, burst: Burst) -> None:
        if burst.magnitude <= 1.0:
            raise ParameterError(
                f"burst magnitude must exceed 1, got {burst.magnitude}"
            )
        if burst.duration < 1:
            raise ParameterError(f"burst duration must be >= 1, got {burst.duration}")
        if not (1 <= burst.start_tick and burst.start_tick + burst.duration - 1 <= self.ticks):
            raise ParameterError(
                f"burst window [{burst.start_tick}, "
                f"{burst.start_tick + burst.duration - 1}] outside [1, {self.ticks}]"
            )
        for node in (burst.source, burst.destination):
            if not 0 <= node < self.nodes:
                raise ParameterError(f"burst node {node} outside [0, {self.nodes})")
        if burst.source == burst.destination:
            raise ParameterError("burst pair must join two distinct nodes")


def _decode_pairs(indices: np.ndarray, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    # Enumerate directed pairs without self-loops: index -> (u, v).
    u = indices // (nodes - 1)
    r = indices % (nodes - 1)
    v = np.where(r < u, r, r + 1)
    return u, v


def generate(spec: SynthSpec) -> LabeledStream:
    """Draw a labeled stream from ``spec``; identical seeds give
    identical streams."""
    rng = np.random.default_rng(spec.seed)
    total_pairs = spec.nodes * (spec.nodes - 1)
    n_active = spec.active_pairs
    if n_active is None:
        n_active = min(3 * spec.nodes, total_pairs)
    n_active = min(n_active, total_pairs)
    chosen = rng.choice(total_pairs, size=n_active, replace=False)
    pair_u, pair_v = _decode_pairs(chosen, spec.nodes)
    pair_u = pair_u.astype(np.int64)
    pair_v = pair_v.astype(np.int64)

    counts = rng.poisson(spec.background_rate, size=(n_active, spec.ticks)).astype(np.int64)

    pair_row = {(int(u), int(v)): i for i, (u, v) in enumerate(zip(pair_u, pair_v))}
    burst_mask = np.zeros((n_active, spec.ticks), dtype=bool)
    rows_u = [pair_u]
    rows_v = [pair_v]
    extra_counts = []
    extra_masks = []

    for burst in spec.bursts:
        key = (burst.source, burst.destination)
        if key in pair_row:
            row = pair_row[key]
        else:
            row = counts.shape[0] + len(extra_counts)
            pair_row[key] = row
            rows_u.append(np.array([burst.source], dtype=np.int64))
            rows_v.append(np.array([burst.destination], dtype=np.int64))
            extra_counts.append(np.zeros(spec.ticks, dtype=np.int64))
            extra_masks.append(np.zeros(spec.ticks, dtype=bool))
        if row < counts.shape[0]:
            row_counts, row_mask = counts[row], burst_mask[row]
        else:
            row_counts = extra_counts[row - counts.shape[0]]
            row_mask = extra_masks[row - counts.shape[0]]
        _inject(row_counts, row_mask, burst, spec.background_rate)

    if extra_counts:
        counts = np.vstack([counts, np.stack(extra_counts)])
        burst_mask = np.vstack([burst_mask, np.stack(extra_masks)])
    all_u = np.concatenate(rows_u)
    all_v = np.concatenate(rows_v)

    sources, destinations, ticks, labels = [], [], [], []
    for t in range(spec.ticks):
        col = counts[:, t]
        idx = np.repeat(np.arange(col.shape[0]), col)
        if idx.size == 0:
            continue
        idx = rng.permutation(idx)
        sources.append(all_u[idx])
        destinations.append(all_v[idx])
        ticks.append(np.full(idx.shape[0], t + 1, dtype=np.int64))
        labels.append(burst_mask[idx, t].astype(np.uint8))

    if not sources:
        empty = np.empty(0, dtype=np.int64)
        return LabeledStream(empty, empty.copy(), empty.copy(), spec.nodes,
                             labels=np.empty(0, dtype=np.uint8))
    return LabeledStream(
        sources=np.concatenate(sources),
        destinations=np.concatenate(destinations),
        ticks=np.concatenate(ticks),
        node_count=spec.nodes,
        labels=np.concatenate(labels),
    )


def _inject(row_counts: np.ndarray, row_mask: np.ndarray, burst: Burst, rate: float) -> None:
    """Overwrite one pair's counts over the burst window, in place."""
    start = burst.start_tick - 1
    end = start + burst.duration
    base = max(int(round(burst.magnitude * rate)), 1)
    for t in range(start, end):
        row_counts[t] = max(base, row_counts[t] + 1)
    # Guarantee the window-to-window count ratio strictly exceeds the
    # magnitude even when the preceding window drew unusually high.
    prev_total = int(row_counts[max(0, start - burst.duration):start].sum())
    if prev_total > 0:
        needed = int(burst.magnitude * prev_total) + 1
        window_total = int(row_counts[start:end].sum())
        if window_total < needed:
            per_tick = math.ceil(needed / burst.duration)
            for t in range(start, end):
                row_counts[t] = max(row_counts[t], per_tick)
    row_mask[start:end] = True


def stationary_stream(
    nodes: int,
    ticks: int,
    rate: float,
    seed: int = 0,
    active_pairs: int | None = None,
) -> LabeledStream:
    """Background-only stream: every pair's expected per-tick count is
    constant over time, all labels 0."""
    return generate(SynthSpec(
        nodes=nodes,
        ticks=ticks,
        background_rate=rate,
        bursts=(),
        seed=seed,
        active_pairs=active_pairs,
    ))
