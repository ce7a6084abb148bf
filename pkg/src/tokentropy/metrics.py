"""Information metrics over token distributions.

Six metrics are computed from each step's log-probability vector, all in
natural log (nats). A bits view is a presentation concern: divide by ln 2.

    probability   P(x_t)      chosen-token probability, direct confidence
    surprisal     I(x_t)      -ln P(x_t), how unexpected the choice was
    entropy       H           expected surprisal over the support
    varentropy    Var         variance of surprisal over the support
    skewentropy   Skew        third moment of (ln p + H), over Var^(3/2)
    perplexity    PPL_t       running exp(mean surprisal up to position t)

Everything is evaluated from log-probabilities: p*ln(p) terms are
exp(lp)*lp with the 0*ln(0) := 0 convention for underflowed entries, so
huge vocabularies with extremely unlikely tokens stay finite and exact.

The per-position perplexity vector is cumulative; its last element equals
the sequence perplexity, exp of the mean surprisal over all positions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Sequence

import numpy as np

from .distributions import TokenDistribution
from .errors import EmptySequence

# Below this variance (nats^2) the surprisal distribution is treated as
# degenerate and skewentropy is defined as 0.
EPSILON_VAR = 1e-12

METRIC_KINDS = (
    "probability",
    "surprisal",
    "entropy",
    "varentropy",
    "skewentropy",
    "perplexity",
)


def token_probability(d: TokenDistribution) -> float:
    """Probability the model assigned to the token it selected."""
    return float(np.exp(d.log_probs[d.selected_index]))


def token_surprisal(d: TokenDistribution) -> float:
    """Surprisal of the selected token, in nats.

    Taken directly from log space (never exp-then-log), so a stored token
    can never produce infinite surprisal through underflow.
    """
    return -float(d.log_probs[d.selected_index])


def _masked_terms(lp: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Probabilities plus lp with underflowed entries replaced by 0.

    Entries whose probability underflows to 0 contribute nothing to any
    moment (the 0*ln(0) := 0 convention), so their log-prob can safely be
    zeroed before forming products.
    """
    p = np.exp(lp)
    safe_lp = np.where(p > 0.0, lp, 0.0)
    return p, safe_lp


def distribution_entropy(d: TokenDistribution) -> float:
    """Shannon entropy H = -sum p*ln(p) over the support, in nats."""
    p, safe_lp = _masked_terms(d.log_probs)
    return -float(np.sum(p * safe_lp))


def distribution_varentropy(d: TokenDistribution) -> float:
    """Variance of surprisal: sum p*ln(p)^2 - H^2, clamped at 0."""
    _, var = _entropy_varentropy(d.log_probs)
    return var


def _entropy_varentropy(lp: np.ndarray) -> tuple[float, float]:
    # Single moments pass: H and E[I^2] together, then Var = E[I^2] - H^2.
    p, safe_lp = _masked_terms(lp)
    plogp = p * safe_lp
    h = -float(np.sum(plogp))
    second = float(np.sum(plogp * safe_lp))  # sum p*ln(p)^2
    return h, max(second - h * h, 0.0)


def distribution_skewentropy(d: TokenDistribution) -> float:
    """Asymmetry of the surprisal distribution.

    Skew = sum p*(ln p + H)^3 / Var^(3/2). Returns 0 when Var < EPSILON_VAR,
    where the normalization is undefined (one-hot and uniform limits).
    """
    h, var = _entropy_varentropy(d.log_probs)
    if var < EPSILON_VAR:
        return 0.0
    p, safe_lp = _masked_terms(d.log_probs)
    third = float(np.sum(p * (safe_lp + h) ** 3))
    return third / var**1.5


def sequence_perplexity(surprisals: Sequence[float]) -> float:
    """exp(mean surprisal) over the sequence; lower is better prediction.

    Raises:
        EmptySequence: no positions to aggregate.
    """
    arr = np.asarray(surprisals, dtype=np.float64)
    if arr.size == 0:
        raise EmptySequence("perplexity of an empty sequence is undefined")
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError("surprisals must be finite and non-negative")
    return float(np.exp(np.mean(arr)))


@dataclass(frozen=True)
class TokenMetrics:
    """All per-position metric values for one token.

    ``approximate`` is set when the values come from a lumped top-k support
    rather than the full vocabulary.
    """

    probability: float
    surprisal: float
    entropy: float
    varentropy: float
    skewentropy: float
    approximate: bool = False

    def value(self, kind: str) -> float:
        return getattr(self, kind)


def token_metrics(d: TokenDistribution) -> TokenMetrics:
    """Compute all five per-token metrics for one distribution."""
    h, var = _entropy_varentropy(d.log_probs)
    return TokenMetrics(
        probability=token_probability(d),
        surprisal=token_surprisal(d),
        entropy=h,
        varentropy=var,
        skewentropy=distribution_skewentropy(d),
        approximate=d.approximate,
    )


def _vector(fn: Callable[[TokenDistribution], float], seq) -> np.ndarray:
    return np.array([fn(d) for d in seq], dtype=np.float64)


def _running_perplexity(seq) -> np.ndarray:
    if not seq:
        return np.array([], dtype=np.float64)
    surs = _vector(token_surprisal, seq)
    cum_mean = np.cumsum(surs) / np.arange(1, surs.size + 1)
    return np.exp(cum_mean)


_COMPUTERS: Dict[str, Callable[[Sequence[TokenDistribution]], np.ndarray]] = {
    "probability": lambda seq: _vector(token_probability, seq),
    "surprisal": lambda seq: _vector(token_surprisal, seq),
    "entropy": lambda seq: _vector(distribution_entropy, seq),
    "varentropy": lambda seq: _vector(distribution_varentropy, seq),
    "skewentropy": lambda seq: _vector(distribution_skewentropy, seq),
    "perplexity": _running_perplexity,
}


@dataclass
class MetricCache:
    """Lazy per-metric vectors at sequence scope.

    Each metric kind is computed at most once per cache: the first read
    fills the slot, every later read returns the stored vector object
    unchanged. ``compute_counts`` exists so tests can assert the contract.

    Fills are idempotent; concurrent first reads may each compute the same
    values, but a slot is only ever published once (dict assignment), so
    all readers observe identical vectors.
    """

    _slots: Dict[str, np.ndarray] = field(default_factory=dict)
    compute_counts: Dict[str, int] = field(default_factory=dict)

    def get(self, kind: str, distributions: Sequence[TokenDistribution]) -> np.ndarray:
        if kind not in _COMPUTERS:
            raise KeyError(f"unknown metric kind: {kind!r}")
        if kind not in self._slots:
            self.compute_counts[kind] = self.compute_counts.get(kind, 0) + 1
            values = _COMPUTERS[kind](distributions)
            values.flags.writeable = False
            # setdefault: losers of a concurrent first-read race adopt the
            # already-published vector instead of replacing it
            self._slots.setdefault(kind, values)
        return self._slots[kind]

    def compute_count(self, kind: str) -> int:
        return self.compute_counts.get(kind, 0)


def get_metric(
    cache: MetricCache, kind: str, distributions: Sequence[TokenDistribution]
) -> np.ndarray:
    """Read one metric vector through the cache (first read computes)."""
    return cache.get(kind, distributions)
