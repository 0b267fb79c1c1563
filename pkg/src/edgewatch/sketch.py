"""Count-min sketches over 64-bit keys.

Two flavours share one layout type:

* ``Cms`` accumulates weights.  Queries return the minimum bucket over
  all rows, so an estimate never falls below the true total for a key;
  it is exact whenever at least one row is collision-free for that key.
* ``ScoreCms`` stores the latest value instead of accumulating: a write
  overwrites the key's bucket in every row, a read takes the row
  minimum.

Rows hash independently.  Each row owns a 64-bit seed and maps a key
through a splitmix64-style finalizer, so two sketches built from the
same :class:`SketchLayout` place any key in identical buckets.  That
property is what makes bucket-wise merging across sketches meaningful.

Counters are floats: decayed counts and expected-count top-ups are
fractional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LayoutMismatchError, ParameterError

_MASK64 = (1 << 64) - 1
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def bucket_index(key: int, seed: int, buckets: int) -> int:
    """Bucket for ``key`` in a row seeded with ``seed``.

    splitmix64 finalizer over ``key ^ seed``; the numba engine carries
    an identical twin, so both paths must stay in lockstep.
    """
    x = (key ^ seed) & _MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK64
    x ^= x >> 31
    return x % buckets


@dataclass(frozen=True)
class SketchLayout:
    """Geometry plus per-row hash seeds.

    Two layouts are compatible iff rows, buckets and seeds all match.
    """

    rows: int
    buckets: int
    seeds: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 1:
            raise ParameterError(f"rows must be >= 1, got {self.rows}")
        if self.buckets < 1:
            raise ParameterError(f"buckets must be >= 1, got {self.buckets}")
        if len(self.seeds) != self.rows:
            raise ParameterError(
                f"need exactly {self.rows} seeds, got {len(self.seeds)}"
            )

    @classmethod
    def from_seed(cls, rows: int, buckets: int, seed: int) -> "SketchLayout":
        rng = np.random.default_rng(seed)
        seeds = tuple(int(s) for s in rng.integers(0, 1 << 64, size=rows, dtype=np.uint64))
        return cls(rows=rows, buckets=buckets, seeds=seeds)

    def coords(self, key: int) -> tuple[int, ...]:
        """Bucket index of ``key`` in every row."""
        return tuple(bucket_index(key, s, self.buckets) for s in self.seeds)


def layout_for_guarantee(eps: float, nu: float, seed: int = 0) -> SketchLayout:
    """Size a layout so the false-positive bound of the decision
    procedure holds: ``rows = ceil(ln(2/eps))``, ``buckets = ceil(e/nu)``.
    """
    if not 0.0 < eps < 1.0:
        raise ParameterError(f"eps must be in (0, 1), got {eps}")
    if nu <= 0.0:
        raise ParameterError(f"nu must be > 0, got {nu}")
    rows = math.ceil(math.log(2.0 / eps))
    buckets = math.ceil(math.e / nu)
    return SketchLayout.from_seed(rows=rows, buckets=buckets, seed=seed)


class Cms:
    """Counting sketch: ``increment`` adds, ``query`` takes the row minimum."""

    def __init__(self, layout: SketchLayout):
        self.layout = layout
        self.table = np.zeros((layout.rows, layout.buckets), dtype=np.float64)

    def increment(self, key: int, weight: float = 1.0) -> None:
        if weight <= 0.0:
            raise ParameterError(f"weight must be > 0, got {weight}")
        self.increment_at(self.layout.coords(key), weight)

    def increment_at(self, coords: tuple[int, ...], weight: float = 1.0) -> None:
        table = self.table
        for r, idx in enumerate(coords):
            table[r, idx] += weight

    def query(self, key: int) -> float:
        return self.query_at(self.layout.coords(key))

    def query_at(self, coords: tuple[int, ...]) -> float:
        table = self.table
        value = table[0, coords[0]]
        for r in range(1, len(coords)):
            v = table[r, coords[r]]
            if v < value:
                value = v
        return float(value)

    def scale(self, factor: float) -> None:
        """Multiply every counter by ``factor`` (strictly inside (0, 1))."""
        if not 0.0 < factor < 1.0:
            raise ParameterError(f"scale factor must be in (0, 1), got {factor}")
        self.table *= factor

    def clear(self) -> None:
        self.table[:] = 0.0


class ScoreCms:
    """Override-semantics sketch for cached scores.

    ``write`` replaces the key's bucket in every row; ``read`` returns
    the row minimum.  Fresh buckets read 0.
    """

    def __init__(self, layout: SketchLayout):
        self.layout = layout
        self.table = np.zeros((layout.rows, layout.buckets), dtype=np.float64)

    def write(self, key: int, value: float) -> None:
        if value < 0.0:
            raise ParameterError(f"value must be >= 0, got {value}")
        self.write_at(self.layout.coords(key), value)

    def write_at(self, coords: tuple[int, ...], value: float) -> None:
        table = self.table
        for r, idx in enumerate(coords):
            table[r, idx] = value

    def read(self, key: int) -> float:
        return self.read_at(self.layout.coords(key))

    def read_at(self, coords: tuple[int, ...]) -> float:
        table = self.table
        value = table[0, coords[0]]
        for r in range(1, len(coords)):
            v = table[r, coords[r]]
            if v < value:
                value = v
        return float(value)


def require_shared_layout(*sketches: Cms | ScoreCms) -> SketchLayout:
    """Assert that all sketches were built from one layout and return it."""
    layout = sketches[0].layout
    for other in sketches[1:]:
        if other.layout != layout:
            raise LayoutMismatchError(
                "sketches must share one layout for bucket-wise operations"
            )
    return layout
