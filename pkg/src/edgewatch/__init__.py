"""Constant-memory anomaly scoring for timestamped graph edge streams."""

from .detector import (
    DetectorConfig,
    Edge,
    Midas,
    MidasF,
    MidasR,
    conditional_merge,
    edge_key,
    new_detector,
)
from .engine import ScoredStreamResult, score_stream, warmup
from .errors import (
    EdgewatchError,
    EvaluationError,
    LayoutMismatchError,
    OrderingError,
    ParameterError,
    ParseError,
    UnsupportedVariantError,
)
from .evaluation import (
    EvalReport,
    aggregate_by_tick,
    bench_scaling,
    roc_auc,
    run_trials,
    sweep,
)
from .scoring import (
    GuaranteeParams,
    adjusted_statistic,
    chi2_quantile_1dof,
    decide,
    midas_score,
    midasf_score,
)
from .sketch import Cms, ScoreCms, SketchLayout, layout_for_guarantee
from .stream_io import LabeledStream, load_edges, load_labels
from .synth import Burst, SynthSpec, generate, stationary_stream

__version__ = "0.1.0"

__all__ = [
    "Burst",
    "Cms",
    "DetectorConfig",
    "Edge",
    "EdgewatchError",
    "EvalReport",
    "EvaluationError",
    "GuaranteeParams",
    "LabeledStream",
    "LayoutMismatchError",
    "Midas",
    "MidasF",
    "MidasR",
    "OrderingError",
    "ParameterError",
    "ParseError",
    "ScoreCms",
    "ScoredStreamResult",
    "SketchLayout",
    "SynthSpec",
    "UnsupportedVariantError",
    "adjusted_statistic",
    "aggregate_by_tick",
    "bench_scaling",
    "chi2_quantile_1dof",
    "conditional_merge",
    "decide",
    "edge_key",
    "generate",
    "layout_for_guarantee",
    "load_edges",
    "load_labels",
    "midas_score",
    "midasf_score",
    "new_detector",
    "roc_auc",
    "run_trials",
    "score_stream",
    "stationary_stream",
    "sweep",
    "warmup",
]
