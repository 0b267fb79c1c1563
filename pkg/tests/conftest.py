import numpy as np
import pytest

from edgewatch.detector import edge_key
from edgewatch.sketch import SketchLayout, bucket_index
from edgewatch.stream_io import LabeledStream


def random_stream(seed, n=2000, nodes=20, max_tick=40):
    """Uniform random edges with sorted ticks; no labels."""
    rng = np.random.default_rng(seed)
    src = rng.integers(0, nodes, n).astype(np.int64)
    dst = rng.integers(0, nodes, n).astype(np.int64)
    ticks = np.sort(rng.integers(1, max_tick + 1, n)).astype(np.int64)
    return LabeledStream(src, dst, ticks, nodes)


def rows_injective(layout: SketchLayout, keys) -> bool:
    """True iff no two distinct keys share a bucket in any row."""
    keys = sorted(set(int(k) for k in keys))
    for seed in layout.seeds:
        coords = {bucket_index(k, seed, layout.buckets) for k in keys}
        if len(coords) != len(keys):
            return False
    return True


def collision_free_seed(stream: LabeledStream, rows: int, buckets: int,
                        start: int = 0, attempts: int = 200) -> int:
    """First detector seed whose layout is injective on the stream's edge
    keys and node keys in every row (makes sketch counts exact)."""
    pairs = {edge_key(int(u), int(v))
             for u, v in zip(stream.sources, stream.destinations)}
    nodes = set(int(u) for u in stream.sources) | set(int(v) for v in stream.destinations)
    for candidate in range(start, start + attempts):
        layout = SketchLayout.from_seed(rows, buckets, candidate)
        if rows_injective(layout, pairs) and rows_injective(layout, nodes):
            return candidate
    raise AssertionError("no collision-free seed found; enlarge buckets")


@pytest.fixture(scope="session", autouse=True)
def _warm_engine():
    # Pay the one-off JIT cost before any timed or hypothesis-driven test.
    from edgewatch.engine import warmup

    warmup()
