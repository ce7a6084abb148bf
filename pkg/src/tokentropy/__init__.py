"""Token-level uncertainty analysis for language-model inference.

Computes probability, surprisal, entropy, varentropy, skewentropy, and
perplexity from per-step token distributions, aggregates them per
sequence, contrasts structured vs. destroyed-structure text, monitors
rolling statistics for drift, and serves an interactive token heatmap.
"""

from .backend import BackendDescriptor, fetch_logprobs
from .distributions import Coverage, TokenDistribution, normalize_logits
from .errors import TokentropyError
from .metrics import (
    METRIC_KINDS,
    MetricCache,
    TokenMetrics,
    distribution_entropy,
    distribution_skewentropy,
    distribution_varentropy,
    get_metric,
    sequence_perplexity,
    token_metrics,
    token_probability,
    token_surprisal,
)
from .monitor import MonitorState
from .records import LogitsBuffer, lump_tail, parse_records, write_records
from .session import (
    AggregateStats,
    AnalysisSession,
    ComparisonReport,
    FlagThresholds,
    aggregate,
    build_session,
    color_map,
    compare,
    flag_tokens,
    preamble_text,
    reverse_words,
    scatter_export,
    session_report,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateStats",
    "AnalysisSession",
    "BackendDescriptor",
    "ComparisonReport",
    "Coverage",
    "FlagThresholds",
    "LogitsBuffer",
    "METRIC_KINDS",
    "MetricCache",
    "MonitorState",
    "TokenDistribution",
    "TokenMetrics",
    "TokentropyError",
    "aggregate",
    "build_session",
    "color_map",
    "compare",
    "distribution_entropy",
    "distribution_skewentropy",
    "distribution_varentropy",
    "fetch_logprobs",
    "flag_tokens",
    "get_metric",
    "lump_tail",
    "normalize_logits",
    "parse_records",
    "preamble_text",
    "reverse_words",
    "scatter_export",
    "sequence_perplexity",
    "session_report",
    "token_metrics",
    "token_probability",
    "token_surprisal",
    "write_records",
]
