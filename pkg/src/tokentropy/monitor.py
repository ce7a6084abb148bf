"""Rolling-window statistics and drift alarms over streaming token metrics.

A MonitorState keeps a ring of the last ``capacity`` per-token values for
each metric kind, maintains window mean/std incrementally (Welford add and
remove, resynced from the ring on eviction batches so window statistics
stay exact), and scores the live window against a frozen baseline:

    score = |window mean - baseline mean| / max(baseline std, eps_std)

An alarm is recorded whenever a score exceeds the multiplier k. Per-token
perplexity enters the ring as exp(surprisal); the surprisal median is
tracked as its own channel on top of the six means.
"""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import NoBaseline, NoData
from .metrics import METRIC_KINDS, TokenMetrics

MEDIAN_CHANNEL = "surprisal_median"
MONITOR_CHANNELS = METRIC_KINDS + (MEDIAN_CHANNEL,)

DEFAULT_CAPACITY = 512
DEFAULT_K = 3.0
DEFAULT_EPS_STD = 1e-6


class _Window:
    """Fixed-capacity ring with incrementally maintained mean/variance."""

    def __init__(self, capacity: int):
        self.ring: deque[float] = deque(maxlen=capacity)
        self.capacity = capacity
        self._mean = 0.0
        self._m2 = 0.0
        self._evictions = 0

    def push(self, value: float):
        if len(self.ring) == self.ring.maxlen:
            self._remove(self.ring[0])
            self._evictions += 1
        self.ring.append(value)
        self._add(value)
        # Accumulator rounding drifts across long remove sequences; resync
        # from the ring once per full turnover to keep window stats exact.
        if self._evictions >= self.capacity:
            self._resync()

    def _add(self, value: float):
        n = len(self.ring)
        delta = value - self._mean
        self._mean += delta / n
        self._m2 += delta * (value - self._mean)

    def _remove(self, value: float):
        n = len(self.ring)
        if n <= 1:
            self._mean, self._m2 = 0.0, 0.0
            return
        delta = value - self._mean
        self._mean -= delta / (n - 1)
        self._m2 -= delta * (value - self._mean)
        self._m2 = max(self._m2, 0.0)

    def _resync(self):
        arr = np.fromiter(self.ring, dtype=np.float64)
        self._mean = float(np.mean(arr))
        self._m2 = float(np.sum((arr - self._mean) ** 2))
        self._evictions = 0

    def __len__(self) -> int:
        return len(self.ring)

    @property
    def mean(self) -> float:
        return self._mean if self.ring else 0.0

    @property
    def std(self) -> float:
        # Population std: the windows are whole populations, not samples.
        return math.sqrt(self._m2 / len(self.ring)) if self.ring else 0.0

    @property
    def median(self) -> float:
        if not self.ring:
            return 0.0
        return float(np.median(np.fromiter(self.ring, dtype=np.float64)))


@dataclass(frozen=True)
class Alarm:
    timestamp: float
    channel: str
    score: float
    window_value: float
    baseline_value: float

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "channel": self.channel,
            "score": self.score,
            "window_value": self.window_value,
            "baseline_value": self.baseline_value,
        }


@dataclass(frozen=True)
class Baseline:
    mean: float
    std: float
    median: float = 0.0


class MonitorState:
    """Single-writer drift monitor for one token stream."""

    def __init__(
        self,
        capacity: int = DEFAULT_CAPACITY,
        k: float = DEFAULT_K,
        eps_std: float = DEFAULT_EPS_STD,
    ):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.k = k
        self.eps_std = eps_std
        self.windows = {kind: _Window(capacity) for kind in METRIC_KINDS}
        self.baselines: dict[str, Baseline] | None = None
        self.alarms: list[Alarm] = []
        self.observed = 0

    def observe(self, metrics: TokenMetrics):
        """Fold one token's metrics into the rolling windows."""
        for kind in METRIC_KINDS:
            if kind == "perplexity":
                value = math.exp(metrics.surprisal)
            else:
                value = metrics.value(kind)
            self.windows[kind].push(value)
        self.observed += 1

    def window_count(self) -> int:
        return len(self.windows["surprisal"])

    def freeze_baseline(self):
        """Snapshot current window statistics as the drift reference.

        A second freeze overwrites the first.

        Raises:
            NoData: nothing observed yet.
        """
        if self.window_count() == 0:
            raise NoData("cannot freeze a baseline from an empty window")
        self.baselines = {
            kind: Baseline(w.mean, w.std, w.median) for kind, w in self.windows.items()
        }

    def drift_score(
        self, channel: str, *, now: float | None = None, record: bool = True
    ) -> float:
        """Score one channel against the baseline; log an alarm above k.

        Mean channels compare window mean to baseline mean; the
        surprisal_median channel compares medians, scaled by the baseline
        surprisal std. Pass ``record=False`` for read-only probes (status
        endpoints) that must not grow the alarm log.

        Raises:
            NoBaseline: freeze_baseline was never called.
            NoData: the window is empty.
        """
        if self.baselines is None:
            raise NoBaseline("freeze a baseline before scoring drift")
        if self.window_count() == 0:
            raise NoData("cannot score drift on an empty window")
        if channel == MEDIAN_CHANNEL:
            base = self.baselines["surprisal"]
            window_value = self.windows["surprisal"].median
            baseline_value = base.median
        elif channel in METRIC_KINDS:
            base = self.baselines[channel]
            window_value = self.windows[channel].mean
            baseline_value = base.mean
        else:
            raise KeyError(f"unknown monitor channel: {channel!r}")
        score = abs(window_value - baseline_value) / max(base.std, self.eps_std)
        if record and score > self.k:
            self.alarms.append(
                Alarm(
                    timestamp=now if now is not None else time.time(),
                    channel=channel,
                    score=score,
                    window_value=window_value,
                    baseline_value=baseline_value,
                )
            )
        return score

    def drift_scores(
        self, *, now: float | None = None, record: bool = True
    ) -> dict[str, float]:
        """Score every monitored channel at once."""
        return {c: self.drift_score(c, now=now, record=record) for c in MONITOR_CHANNELS}

    def status(self) -> dict:
        """Window means/stds, baseline, current scores, and the alarm log."""
        out = {
            "observed": self.observed,
            "window_count": self.window_count(),
            "capacity": self.capacity,
            "k": self.k,
            "window": {
                kind: {"mean": w.mean, "std": w.std} for kind, w in self.windows.items()
            },
            "baseline": None,
            "scores": None,
            "alarms": [a.to_dict() for a in self.alarms],
        }
        if self.baselines is not None:
            out["baseline"] = {
                kind: {"mean": b.mean, "std": b.std} for kind, b in self.baselines.items()
            }
            if self.window_count() > 0:
                out["scores"] = self.drift_scores(record=False)
        return out
