"""Analyzed sequences and their aggregate views.

An AnalysisSession owns an ordered run of token distributions, the aligned
token texts, and a lazy metric cache. Everything downstream of it (reports,
scatter exports, comparisons, flagging, heatmap intensities) reads through
the cache, so each metric vector is computed once per session.

The word-reversal experiment lives here too: reverse_words destroys word
order while preserving each word's spelling, and compare() produces the
side-by-side aggregate table for original vs. reversed scoring runs.
"""

from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from .distributions import TokenDistribution
from .errors import AlignmentError, EmptySequence
from .metrics import METRIC_KINDS, MetricCache, sequence_perplexity

FLAGGABLE_KINDS = ("entropy", "varentropy", "surprisal")

# Comparison table rows, in the order they are printed.
COMPARISON_ROWS = (
    "entropy",
    "varentropy",
    "skewentropy",
    "perplexity",
    "probability",
    "log_probability",
)


def preamble_text() -> str:
    """The bundled Declaration of Independence preamble evaluation text."""
    return (
        resources.files("tokentropy.fixtures").joinpath("preamble.txt").read_text("utf-8").strip()
    )


def reverse_words(text: str) -> str:
    """Emit whitespace-delimited words in reverse order, single-spaced.

    Each word keeps its characters verbatim, attached punctuation included
    ("Happiness.--That" is one word).
    """
    return " ".join(reversed(text.split()))


@dataclass
class AnalysisSession:
    """One analyzed sequence: distributions, texts, and cached metrics."""

    session_id: str
    label: str
    distributions: list[TokenDistribution]
    token_texts: list[str]
    cache: MetricCache = field(default_factory=MetricCache)
    source_text: Optional[str] = None
    created_at: float = field(default_factory=time.time)

    def __len__(self) -> int:
        return len(self.distributions)

    def metric(self, kind: str) -> np.ndarray:
        """Read one per-position metric vector (lazy, cached)."""
        return self.cache.get(kind, self.distributions)

    @property
    def approximate(self) -> bool:
        """True when any position was computed from a lumped top-k support."""
        return any(d.approximate for d in self.distributions)

    @property
    def text(self) -> str:
        return self.source_text if self.source_text is not None else "".join(self.token_texts)


def build_session(
    label: str,
    distributions: Sequence[TokenDistribution],
    token_texts: Sequence[str],
    *,
    source_text: Optional[str] = None,
) -> AnalysisSession:
    """Assemble a session; no metric is computed until first read.

    Raises:
        EmptySequence: no distributions.
        AlignmentError: texts and distributions differ in length.
    """
    if len(distributions) == 0:
        raise EmptySequence("a session needs at least one token position")
    if len(token_texts) != len(distributions):
        raise AlignmentError(
            f"{len(token_texts)} token texts for {len(distributions)} distributions"
        )
    return AnalysisSession(
        session_id=uuid.uuid4().hex,
        label=label,
        distributions=list(distributions),
        token_texts=list(token_texts),
        source_text=source_text,
    )


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    median: float
    min: float
    max: float

    def to_dict(self) -> dict:
        return {"mean": self.mean, "median": self.median, "min": self.min, "max": self.max}


@dataclass(frozen=True)
class AggregateStats:
    """Per-session aggregates: the sidebar statistics and comparison rows.

    ``log_probability`` is the mean natural-log probability of the selected
    tokens (equal to -mean surprisal); the label is explicit because log
    bases vary across tools.
    """

    tokens: int
    characters: int
    metrics: dict[str, MetricSummary]
    perplexity: float
    log_probability: float

    def row_value(self, row: str) -> float:
        """Representative scalar for one comparison-table row."""
        if row == "perplexity":
            return self.perplexity
        if row == "log_probability":
            return self.log_probability
        return self.metrics[row].mean

    def to_dict(self) -> dict:
        return {
            "tokens": self.tokens,
            "characters": self.characters,
            "metrics": {k: self.metrics[k].to_dict() for k in METRIC_KINDS},
            "perplexity": self.perplexity,
            "log_probability": self.log_probability,
        }


def _summarize(values: np.ndarray) -> MetricSummary:
    return MetricSummary(
        mean=float(np.mean(values)),
        median=float(np.median(values)),
        min=float(np.min(values)),
        max=float(np.max(values)),
    )


def aggregate(session: AnalysisSession) -> AggregateStats:
    """Mean/median/min/max per metric, sequence perplexity, and counts.

    Medians of even counts are the arithmetic mean of the two central
    values. Character count is the number of Unicode scalar values in the
    session's source text.
    """
    if len(session) == 0:
        raise EmptySequence("cannot aggregate an empty session")
    summaries = {kind: _summarize(session.metric(kind)) for kind in METRIC_KINDS}
    surprisals = session.metric("surprisal")
    return AggregateStats(
        tokens=len(session),
        characters=len(session.text),
        metrics=summaries,
        perplexity=sequence_perplexity(surprisals),
        log_probability=float(-np.mean(surprisals)),
    )


@dataclass(frozen=True)
class FlagThresholds:
    """Strict per-metric flag levels; a token trips when it exceeds one."""

    entropy: float = float("inf")
    varentropy: float = float("inf")
    surprisal: float = float("inf")

    def __post_init__(self):
        for kind in FLAGGABLE_KINDS:
            if getattr(self, kind) < 0:
                raise ValueError(f"{kind} threshold must be >= 0")


def flag_tokens(
    session: AnalysisSession, thresholds: FlagThresholds
) -> list[tuple[int, list[str]]]:
    """Positions whose entropy, varentropy, or surprisal strictly exceed
    their thresholds, with the triggering metric kinds per position."""
    vectors = {kind: session.metric(kind) for kind in FLAGGABLE_KINDS}
    flagged = []
    for pos in range(len(session)):
        kinds = [k for k in FLAGGABLE_KINDS if vectors[k][pos] > getattr(thresholds, k)]
        if kinds:
            flagged.append((pos, kinds))
    return flagged


def scatter_export(session: AnalysisSession) -> list[tuple[float, float, int, str]]:
    """One (entropy, varentropy, position, token) point per position.

    Values are taken verbatim from the cached metric vectors.
    """
    if len(session) == 0:
        raise EmptySequence("cannot export scatter for an empty session")
    h = session.metric("entropy")
    v = session.metric("varentropy")
    return [
        (float(h[i]), float(v[i]), i, session.token_texts[i]) for i in range(len(session))
    ]


def color_map(values, kind: str = "") -> np.ndarray:
    """Min-max normalize a metric vector to per-token intensities in [0, 1].

    Constant vectors map to all zeros. No metric-specific inversion is
    applied; probability keeps its direct scale (bright = confident), the
    others read bright = high value.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise EmptySequence("cannot color an empty vector")
    lo, hi = float(np.min(arr)), float(np.max(arr))
    if hi == lo:
        return np.zeros_like(arr)
    return (arr - lo) / (hi - lo)


@dataclass(frozen=True)
class ComparisonReport:
    """Side-by-side aggregates for two sessions, one row per metric."""

    left_label: str
    right_label: str
    left: AggregateStats
    right: AggregateStats

    @property
    def deltas(self) -> dict[str, float]:
        return {
            row: self.right.row_value(row) - self.left.row_value(row)
            for row in COMPARISON_ROWS
        }

    @property
    def ratios(self) -> dict[str, Optional[float]]:
        out = {}
        for row in COMPARISON_ROWS:
            lv = self.left.row_value(row)
            out[row] = self.right.row_value(row) / lv if lv != 0 else None
        return out

    def to_dict(self) -> dict:
        return {
            "left_label": self.left_label,
            "right_label": self.right_label,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
            "deltas": self.deltas,
            "ratios": self.ratios,
        }

    def render_table(self) -> str:
        """Aggregate pairs as a fixed-order text table.

        Row order follows the original-vs-reversed presentation: counts
        first, then entropy, varentropy, skewentropy, perplexity,
        probability, and mean natural-log probability.
        """
        names = {
            "entropy": "Entropy",
            "varentropy": "Varentropy",
            "skewentropy": "Skewentropy",
            "perplexity": "Perplexity",
            "probability": "Probability",
            "log_probability": "Log Probability (mean ln P)",
        }
        width = max(len(n) for n in names.values())
        lines = [
            f"{'Metric':<{width}}  {self.left_label:>14}  {self.right_label:>14}",
            f"{'Tokens':<{width}}  {self.left.tokens:>14d}  {self.right.tokens:>14d}",
            f"{'Characters':<{width}}  {self.left.characters:>14d}  {self.right.characters:>14d}",
        ]
        for row in COMPARISON_ROWS:
            lines.append(
                f"{names[row]:<{width}}  {self.left.row_value(row):>14.4f}  "
                f"{self.right.row_value(row):>14.4f}"
            )
        return "\n".join(lines)


def compare(left: AnalysisSession, right: AnalysisSession) -> ComparisonReport:
    """Pair two sessions' aggregates (lengths may differ)."""
    return ComparisonReport(
        left_label=left.label,
        right_label=right.label,
        left=aggregate(left),
        right=aggregate(right),
    )


def session_report(
    session: AnalysisSession, thresholds: Optional[FlagThresholds] = None
) -> dict:
    """The session's full external report, with stable key order."""
    stats = aggregate(session)
    flags = flag_tokens(session, thresholds) if thresholds is not None else []
    return {
        "label": session.label,
        "tokens": stats.tokens,
        "characters": stats.characters,
        "metrics": {k: stats.metrics[k].to_dict() for k in METRIC_KINDS},
        "perplexity": stats.perplexity,
        "log_probability": stats.log_probability,
        "approximate": session.approximate,
        "scatter": [[h, v, pos, tok] for h, v, pos, tok in scatter_export(session)],
        "flags": [[pos, kinds] for pos, kinds in flags],
    }


def render_report_bytes(
    session: AnalysisSession, thresholds: Optional[FlagThresholds] = None
) -> bytes:
    """Serialized report; the CLI and the HTTP API both emit exactly this."""
    doc = session_report(session, thresholds)
    return (json.dumps(doc, ensure_ascii=False, indent=2) + "\n").encode("utf-8")
