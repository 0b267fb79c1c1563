"""Stateful streaming detectors behind one per-edge interface.

Three variants share the contract *feed an edge, get a score back*:

* ``midas``    — live-tick sketches cleared at every tick boundary.
* ``midas-r``  — live-tick sketches decayed by ``alpha`` instead of
  cleared, plus per-node sketches; scores combined across edge, source
  and destination.
* ``midas-f``  — history sketches frozen during a tick and updated only
  by a conditional bucket-wise merge at the boundary, gated by a cached
  score against ``theta``; also keeps per-node state.

A detector instance is strictly sequential (ticks must be
non-decreasing) and uses memory fixed by its sketch geometry, never by
the number of distinct keys seen.  Instances are independent; run one
per thread if you want parallel trials.

This module is the readable reference path.  ``edgewatch.engine``
implements the same semantics as vectorized kernels for throughput; the
two are cross-checked in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import OrderingError, ParameterError, UnsupportedVariantError
from .scoring import GuaranteeParams, adjusted_statistic, decide, midas_score, midasf_score
from .sketch import Cms, ScoreCms, SketchLayout, require_shared_layout

VARIANTS = ("midas", "midas-r", "midas-f")
COMBINE_MODES = ("max", "sum")

DEFAULT_ROWS = 2
DEFAULT_BUCKETS = 1024
DEFAULT_ALPHA = 0.5
DEFAULT_THETA = 1000.0


@dataclass(frozen=True)
class Edge:
    """One stream element: directed source/destination pair at a time tick."""

    source: int
    destination: int
    tick: int


def edge_key(source: int, destination: int) -> int:
    """Pack a directed pair of interned 32-bit node ids into one 64-bit key."""
    return ((source & 0xFFFFFFFF) << 32) | (destination & 0xFFFFFFFF)


@dataclass(frozen=True)
class DetectorConfig:
    """Hyperparameters for any variant.

    ``rows``/``buckets`` give the sketch geometry; per-row hash seeds
    are drawn from the RNG seed passed to :func:`new_detector`, so the
    same config can be re-seeded across trials.  ``alpha`` is the decay
    applied to live-tick counts at boundaries (variants r/f), ``theta``
    the merge-gating threshold (variant f), ``guarantee`` the optional
    decision parameters (plain midas only).
    """

    variant: str = "midas"
    rows: int = DEFAULT_ROWS
    buckets: int = DEFAULT_BUCKETS
    alpha: float = DEFAULT_ALPHA
    theta: float = DEFAULT_THETA
    combine: str = "max"
    guarantee: GuaranteeParams | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ParameterError(
                f"variant must be one of {VARIANTS}, got {self.variant!r}"
            )
        if self.rows < 1 or self.buckets < 1:
            raise ParameterError("rows and buckets must be >= 1")
        if self.variant != "midas" and not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must be strictly in (0, 1), got {self.alpha}")
        if self.theta < 0.0:
            raise ParameterError(f"theta must be >= 0, got {self.theta}")
        if self.combine not in COMBINE_MODES:
            raise ParameterError(
                f"combine must be one of {COMBINE_MODES}, got {self.combine!r}"
            )

    def with_value(self, parameter: str, value) -> "DetectorConfig":
        """Copy of this config with one hyperparameter replaced."""
        if parameter == "buckets":
            value = int(value)
        return replace(self, **{parameter: value})


def conditional_merge(total: Cms, current: Cms, cached: ScoreCms, theta: float, tick: int) -> None:
    """Fold live-tick counts into history, bucket by bucket.

    For every bucket of the shared grid: if the cached score is below
    ``theta`` the live count is added to history; otherwise (the bucket
    looks anomalous) history grows by its own per-tick mean
    ``total / (tick - 1)``, keeping the mean level unchanged.  ``tick``
    is the tick being closed; at tick 1 the anomalous branch is a no-op.
    ``current`` and ``cached`` are left untouched.
    """
    require_shared_layout(total, current, cached)
    s = total.table.reshape(-1)
    a = current.table.reshape(-1)
    c = cached.table.reshape(-1)
    # Buckets at or above the threshold are rare; add the live counts in
    # bulk, then rewrite just those buckets with the expected-count branch.
    hot = np.flatnonzero(c >= theta)
    saved = s[hot].copy() if hot.size else None
    s += a
    if hot.size:
        if tick == 1:
            s[hot] = saved
        else:
            s[hot] = saved + saved / (tick - 1)


class _Detector:
    """Common tick bookkeeping; subclasses provide the sketch work."""

    variant: str = ""

    def __init__(self, cfg: DetectorConfig, seed: int):
        self.cfg = cfg
        self.layout = SketchLayout.from_seed(cfg.rows, cfg.buckets, seed)
        self.internal_tick = 1
        self.current_tick_mass = 0.0
        self._edges_seen = 0

    def process_edge(self, edge: Edge) -> float:
        if edge.tick < 1:
            raise ParameterError(f"tick must be >= 1, got {edge.tick}")
        if edge.tick < self.internal_tick:
            raise OrderingError(
                f"edge #{self._edges_seen + 1} has tick {edge.tick} "
                f"after tick {self.internal_tick}",
                position=self._edges_seen + 1,
            )
        if edge.tick > self.internal_tick:
            self.tick_transition(edge.tick)
        self._edges_seen += 1
        self.current_tick_mass += 1.0
        return self._score_edge(edge)

    def tick_transition(self, new_tick: int) -> None:
        """Close the live tick and move to ``new_tick``.

        A jump over several ticks still runs exactly one transition.
        """
        if new_tick <= self.internal_tick:
            raise OrderingError(
                f"new tick {new_tick} does not advance past {self.internal_tick}"
            )
        self._on_transition()
        self.internal_tick = new_tick

    def decide_edge(self, edge: Edge) -> tuple[float, bool]:
        raise UnsupportedVariantError(
            f"binary decisions are only defined for the plain midas variant, "
            f"not {self.variant!r}"
        )

    def _score_edge(self, edge: Edge) -> float:
        raise NotImplementedError

    def _on_transition(self) -> None:
        raise NotImplementedError

    def _combine(self, scores: tuple[float, float, float]) -> float:
        if self.cfg.combine == "sum":
            return scores[0] + scores[1] + scores[2]
        return max(scores)


class Midas(_Detector):
    """Plain variant: one edge-keyed sketch pair, cleared every tick."""

    variant = "midas"

    def __init__(self, cfg: DetectorConfig, seed: int):
        super().__init__(cfg, seed)
        self.current = Cms(self.layout)
        self.total = Cms(self.layout)

    def _score_edge(self, edge: Edge) -> float:
        coords = self.layout.coords(edge_key(edge.source, edge.destination))
        self.current.increment_at(coords)
        self.total.increment_at(coords)
        return midas_score(
            self.current.query_at(coords), self.total.query_at(coords), edge.tick
        )

    def _on_transition(self) -> None:
        self.current.clear()
        self.current_tick_mass = 0.0

    def decide_edge(self, edge: Edge) -> tuple[float, bool]:
        """Score the edge and flag it against the cached threshold.

        Requires ``cfg.guarantee``; the adjusted statistic uses the
        live-tick mass recorded so far (including this edge).
        """
        params = self.cfg.guarantee
        if params is None:
            raise ParameterError("decide_edge requires guarantee parameters")
        score = self.process_edge(edge)
        coords = self.layout.coords(edge_key(edge.source, edge.destination))
        statistic = adjusted_statistic(
            self.current.query_at(coords),
            self.total.query_at(coords),
            edge.tick,
            params.nu,
            self.current_tick_mass,
        )
        return score, decide(statistic, params)


class MidasR(_Detector):
    """Relational variant: node sketches plus decay at tick boundaries."""

    variant = "midas-r"

    def __init__(self, cfg: DetectorConfig, seed: int):
        super().__init__(cfg, seed)
        self.current = tuple(Cms(self.layout) for _ in range(3))
        self.total = tuple(Cms(self.layout) for _ in range(3))

    def _keys(self, edge: Edge) -> tuple[int, int, int]:
        return edge_key(edge.source, edge.destination), edge.source, edge.destination

    def _score_edge(self, edge: Edge) -> float:
        scores = []
        for key, cur, tot in zip(self._keys(edge), self.current, self.total):
            coords = self.layout.coords(key)
            cur.increment_at(coords)
            tot.increment_at(coords)
            scores.append(
                midas_score(cur.query_at(coords), tot.query_at(coords), edge.tick)
            )
        return self._combine(tuple(scores))

    def _on_transition(self) -> None:
        for cur in self.current:
            cur.scale(self.cfg.alpha)
        self.current_tick_mass *= self.cfg.alpha


class MidasF(_Detector):
    """Filtering variant: history updated only by the conditional merge."""

    variant = "midas-f"

    def __init__(self, cfg: DetectorConfig, seed: int):
        super().__init__(cfg, seed)
        # Three groups (edge, source, destination); the sketches inside a
        # group share the layout so merges are bucket-aligned.
        self.current = tuple(Cms(self.layout) for _ in range(3))
        self.total = tuple(Cms(self.layout) for _ in range(3))
        self.cached = tuple(ScoreCms(self.layout) for _ in range(3))

    def _keys(self, edge: Edge) -> tuple[int, int, int]:
        return edge_key(edge.source, edge.destination), edge.source, edge.destination

    def _score_edge(self, edge: Edge) -> float:
        scores = []
        for key, cur, tot, cache in zip(
            self._keys(edge), self.current, self.total, self.cached
        ):
            coords = self.layout.coords(key)
            cur.increment_at(coords)
            score = midasf_score(
                cur.query_at(coords), tot.query_at(coords), edge.tick
            )
            cache.write_at(coords, score)
            scores.append(score)
        return self._combine(tuple(scores))

    def _on_transition(self) -> None:
        closing = self.internal_tick
        for cur, tot, cache in zip(self.current, self.total, self.cached):
            conditional_merge(tot, cur, cache, self.cfg.theta, closing)
        for cur in self.current:
            cur.scale(self.cfg.alpha)
        self.current_tick_mass *= self.cfg.alpha


_CLASSES = {"midas": Midas, "midas-r": MidasR, "midas-f": MidasF}


def new_detector(cfg: DetectorConfig, seed: int = 0) -> _Detector:
    """Build a zeroed detector; identical seeds give identical hashing."""
    return _CLASSES[cfg.variant](cfg, seed)
