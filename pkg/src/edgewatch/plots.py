"""Figure rendering for the CLI report paths.

Every report-emitting command can drop a PNG next to its delimited
output.  Rendering is headless (Agg) and file-based only.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .evaluation import EvalReport, SweepRow, TickAggregate, linear_fit_r2  # noqa: E402

_FIGSIZE = (6.0, 4.0)
_DPI = 150


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_trials_figure(report: EvalReport, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    xs = range(1, report.trials + 1)
    ax.plot(xs, report.per_trial_auc, "o", color="tab:blue", label="trial AUC")
    ax.axhline(report.auc, color="tab:red", linestyle="--",
               label=f"median {report.auc:.4f}")
    ax.set_xlabel("trial")
    ax.set_ylabel("ROC-AUC")
    ax.set_title(f"ROC-AUC over {report.trials} trials")
    ax.legend()
    return _finish(fig, path)


def save_sweep_figure(rows: list[SweepRow], parameter: str, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    xs = [row.value for row in rows]
    ys = [row.auc for row in rows]
    ax.plot(xs, ys, "o-", color="tab:blue")
    if parameter in ("theta", "buckets") and min(xs) > 0 and max(xs) / min(xs) >= 100:
        ax.set_xscale("log")
    ax.set_xlabel(parameter)
    ax.set_ylabel("median ROC-AUC")
    ax.set_title(f"ROC-AUC vs {parameter}")
    return _finish(fig, path)


def save_scaling_figure(rows: list[tuple[int, float]], path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    xs = [n for n, _ in rows]
    ys = [t for _, t in rows]
    ax.plot(xs, ys, "o", color="tab:blue", label="measured")
    if len(rows) >= 2:
        slope, intercept, r2 = linear_fit_r2(xs, ys)
        ax.plot(xs, [slope * x + intercept for x in xs], "--", color="tab:red",
                label=f"linear fit (R²={r2:.4f})")
        ax.legend()
    ax.set_xlabel("edges processed")
    ax.set_ylabel("seconds")
    ax.set_title("Scoring time vs stream prefix length")
    return _finish(fig, path)


def save_tick_series_figure(aggregates: list[TickAggregate], path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    xs = [agg.tick for agg in aggregates]
    ys = [agg.normalized for agg in aggregates]
    ax.plot(xs, ys, "-", color="tab:blue")
    ax.set_xlabel("tick")
    ax.set_ylabel("normalized max score")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title("Per-tick anomaly score")
    return _finish(fig, path)
