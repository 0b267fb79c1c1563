"""Evaluation harness: exact ROC-AUC, repeated-trial medians,
hyperparameter sweeps, per-tick aggregation and scaling benchmarks.

Timing throughout covers the scoring loop only, via a monotonic clock;
file I/O happens before or after.  Multiple trials rehash with seeds
``seed, seed+1, ...`` and report the median, damping the influence of
any one hash draw.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

import numpy as np

from .detector import DetectorConfig
from .engine import score_stream, warmup
from .errors import EvaluationError, ParameterError
from .stream_io import LabeledStream

SWEEPABLE = ("alpha", "theta", "buckets")


def roc_auc(scores, labels) -> float:
    """Exact rank statistic: the probability that a random positive
    outscores a random negative, ties counting one half."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape[0] != labels.shape[0]:
        raise EvaluationError(
            f"{scores.shape[0]} scores vs {labels.shape[0]} labels"
        )
    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = scores.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise EvaluationError("labels must contain both classes")
    ranks = _midranks(scores)
    pos_rank_sum = float(ranks[positive].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    sorted_vals = values[order]
    # Average the 1-based ranks inside each run of equal values.
    boundaries = np.flatnonzero(np.diff(sorted_vals) != 0) + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [values.shape[0]]))
    for s, e in zip(starts, ends):
        ranks[order[s:e]] = (s + e + 1) / 2.0
    return ranks


@dataclass
class EvalReport:
    """Median AUC over trials plus the per-trial values and timing."""

    auc: float
    trials: int
    per_trial_auc: list[float]
    runtime_seconds: float
    edges_per_second: float


def run_trials(
    stream: LabeledStream,
    cfg: DetectorConfig,
    trials: int = 21,
    seed: int = 0,
) -> EvalReport:
    """Score the stream ``trials`` times (seed + i) and report medians."""
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if stream.labels is None:
        raise EvaluationError("run_trials needs a labeled stream")
    warmup()
    aucs: list[float] = []
    runtimes: list[float] = []
    for i in range(trials):
        result = score_stream(stream, cfg, seed=seed + i)
        aucs.append(roc_auc(result.scores, stream.labels))
        runtimes.append(result.runtime_seconds)
    runtime = statistics.median(runtimes)
    return EvalReport(
        auc=statistics.median(aucs),
        trials=trials,
        per_trial_auc=aucs,
        runtime_seconds=runtime,
        edges_per_second=stream.edge_count / runtime if runtime > 0 else float("inf"),
    )


@dataclass
class SweepRow:
    value: float
    auc: float
    runtime_seconds: float


def sweep(
    stream: LabeledStream,
    base_cfg: DetectorConfig,
    parameter: str,
    values,
    trials: int = 21,
    seed: int = 0,
) -> list[SweepRow]:
    """One :func:`run_trials` per value of ``parameter``, all else fixed."""
    if parameter not in SWEEPABLE:
        raise ParameterError(f"parameter must be one of {SWEEPABLE}, got {parameter!r}")
    values = list(values)
    if not values:
        raise ParameterError("sweep needs at least one value")
    rows = []
    for value in values:
        cfg = base_cfg.with_value(parameter, value)
        report = run_trials(stream, cfg, trials=trials, seed=seed)
        rows.append(SweepRow(value=float(value), auc=report.auc,
                             runtime_seconds=report.runtime_seconds))
    return rows


@dataclass
class TickAggregate:
    tick: int
    max_score: float
    normalized: float


def aggregate_by_tick(scores, ticks, mode: str = "max") -> list[TickAggregate]:
    """Collapse per-edge scores to one value per tick, then min-max
    normalize to [0, 1] for plotting.  A zero range maps to 1.0."""
    if mode != "max":
        raise ParameterError(f"unsupported aggregation mode {mode!r}")
    scores = np.asarray(scores, dtype=np.float64)
    ticks = np.asarray(ticks, dtype=np.int64)
    if scores.shape[0] != ticks.shape[0]:
        raise EvaluationError(
            f"{scores.shape[0]} scores vs {ticks.shape[0]} ticks"
        )
    if scores.shape[0] == 0:
        return []
    uniq, inverse = np.unique(ticks, return_inverse=True)
    maxima = np.full(uniq.shape[0], -np.inf)
    np.maximum.at(maxima, inverse, scores)
    low, high = maxima.min(), maxima.max()
    if high > low:
        normalized = (maxima - low) / (high - low)
    else:
        normalized = np.ones_like(maxima)
    return [
        TickAggregate(tick=int(t), max_score=float(m), normalized=float(n))
        for t, m, n in zip(uniq, maxima, normalized)
    ]


def bench_scaling(
    stream: LabeledStream,
    cfg: DetectorConfig,
    prefixes,
    seed: int = 0,
    repeats: int = 1,
) -> list[tuple[int, float]]:
    """Wall-clock scoring time for each stream prefix, detector re-created
    per prefix.  ``repeats`` > 1 keeps the median per prefix."""
    prefixes = [int(p) for p in prefixes]
    if not prefixes:
        raise ParameterError("bench needs at least one prefix length")
    if sorted(prefixes) != prefixes:
        raise ParameterError("prefixes must be sorted ascending")
    if prefixes[-1] > stream.edge_count:
        raise ParameterError(
            f"prefix {prefixes[-1]} exceeds stream length {stream.edge_count}"
        )
    if repeats < 1:
        raise ParameterError("repeats must be >= 1")
    warmup()
    rows = []
    for n in prefixes:
        part = stream.prefix(n)
        times = [
            score_stream(part, cfg, seed=seed).runtime_seconds
            for _ in range(repeats)
        ]
        rows.append((n, statistics.median(times)))
    return rows


def linear_fit_r2(xs, ys) -> tuple[float, float, float]:
    """Least-squares line through (xs, ys): slope, intercept, R^2."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    slope, intercept = np.polyfit(xs, ys, 1)
    predicted = slope * xs + intercept
    total = float(((ys - ys.mean()) ** 2).sum())
    if total == 0.0:
        return float(slope), float(intercept), 1.0
    residual = float(((ys - predicted) ** 2).sum())
    return float(slope), float(intercept), 1.0 - residual / total
