"""Per-step token probability distributions.

A TokenDistribution is one generation step: natural-log probabilities over a
support (the whole vocabulary, or an observed top-k plus one synthetic tail
entry holding the residual mass), the vocabulary ids of the support entries,
and the index of the token the model actually selected.

Raw logits and derived log-probs are held by reference and never copied on
read: ``raw_logits`` is the exact array object the caller passed in, and
``log_probs`` is materialized once at construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import EmptySupport, InvalidLogits

# Vocabulary id reserved for the synthetic tail entry of a lumped top-k
# distribution; never a real token id.
TAIL_TOKEN_ID = -1

_SUM_TOL = 1e-9
_LOGPROB_TOL = 1e-12


class Coverage(Enum):
    """How much of the vocabulary the support covers."""

    FULL = "full"
    TOPK_LUMPED = "topk_lumped"


def log_sum_exp(values: np.ndarray) -> float:
    """Stable logsumexp with max-subtraction, so nothing overflows."""
    m = float(np.max(values))
    return m + float(np.log(np.sum(np.exp(values - m))))


@dataclass(frozen=True)
class TokenDistribution:
    """One token position's probability distribution plus the chosen token.

    Treated as immutable after construction; arrays must not be mutated by
    callers. ``support_texts``, when present, carries backend-provided token
    strings aligned with ``token_ids`` (used by the top-k inspector).
    """

    position: int
    log_probs: np.ndarray
    token_ids: np.ndarray
    selected_index: int
    coverage: Coverage = Coverage.FULL
    tail_index: Optional[int] = None
    raw_logits: Optional[np.ndarray] = None
    support_texts: Optional[Sequence[str]] = None

    def __post_init__(self):
        n = len(self.log_probs)
        if n == 0:
            raise EmptySupport("distribution has no support entries")
        if self.position < 0:
            raise ValueError(f"position must be >= 0, got {self.position}")
        if np.any(np.isnan(self.log_probs)):
            raise InvalidLogits("log_probs contain NaN")
        if float(np.max(self.log_probs)) > _LOGPROB_TOL:
            raise InvalidLogits(
                f"log_probs contain a positive entry: {float(np.max(self.log_probs))}"
            )
        total = log_sum_exp(self.log_probs)
        if abs(total) > _SUM_TOL:
            raise InvalidLogits(f"probabilities do not sum to 1: logsumexp={total}")
        if not 0 <= self.selected_index < n:
            raise ValueError(f"selected_index {self.selected_index} out of range [0,{n})")
        if len(self.token_ids) != n:
            raise ValueError("token_ids and log_probs must have equal length")
        if len(np.unique(self.token_ids)) != n:
            raise ValueError("token_ids must be pairwise distinct")
        if self.coverage is Coverage.TOPK_LUMPED:
            if self.tail_index is None or not 0 <= self.tail_index < n:
                raise ValueError("TOPK_LUMPED requires a valid tail_index")
            if self.selected_index == self.tail_index:
                raise ValueError("selected token must be explicit, not the tail entry")
        elif self.tail_index is not None:
            raise ValueError("tail_index is only meaningful for TOPK_LUMPED coverage")
        if self.support_texts is not None and len(self.support_texts) != n:
            raise ValueError("support_texts must align with log_probs")

    @property
    def support_size(self) -> int:
        return len(self.log_probs)

    @property
    def selected_token_id(self) -> int:
        return int(self.token_ids[self.selected_index])

    @property
    def selected_log_prob(self) -> float:
        return float(self.log_probs[self.selected_index])

    @property
    def approximate(self) -> bool:
        """True when metrics over this support only approximate the full vocabulary."""
        return self.coverage is Coverage.TOPK_LUMPED


def normalize_logits(
    logits,
    selected: int,
    *,
    position: int = 0,
    token_ids=None,
    support_texts: Optional[Sequence[str]] = None,
) -> TokenDistribution:
    """Turn raw scores into a FULL-coverage distribution via log-softmax.

    log_probs = logits - logsumexp(logits), computed with max-subtraction so
    no intermediate overflows. The input array is kept by reference on the
    result (``raw_logits``); it is not copied.

    Args:
        logits: raw score vector (array-like; ndarray inputs are not copied).
        selected: index of the chosen token within ``logits``.
        position: token position within the sequence.
        token_ids: vocabulary ids per entry; defaults to 0..n-1.
        support_texts: optional token strings aligned with the support.

    Raises:
        EmptySupport: ``logits`` is empty.
        InvalidLogits: any entry is NaN or infinite.
    """
    raw = np.asarray(logits)
    if raw.ndim != 1:
        raise InvalidLogits(f"logits must be a vector, got shape {raw.shape}")
    if raw.size == 0:
        raise EmptySupport("empty logit vector")
    if not np.all(np.isfinite(raw)):
        raise InvalidLogits("logits contain non-finite entries")
    if not 0 <= selected < raw.size:
        raise ValueError(f"selected index {selected} out of range [0,{raw.size})")
    scores = raw.astype(np.float64, copy=False)
    # Max-subtracted form, with the leading exp(0)=1 term split out through
    # log1p: keeps the top entry's log-prob accurate in relative terms even
    # for near-one-hot distributions, where x - logsumexp(x) would cancel.
    top = int(np.argmax(scores))
    z = scores - scores[top]
    rest = np.exp(z)
    rest[top] = 0.0
    log_probs = z - np.log1p(np.sum(rest))
    # Guard against positive rounding residue in the maximum entry.
    np.minimum(log_probs, 0.0, out=log_probs)
    if token_ids is None:
        token_ids = np.arange(raw.size)
    return TokenDistribution(
        position=position,
        log_probs=log_probs,
        token_ids=np.asarray(token_ids),
        selected_index=int(selected),
        coverage=Coverage.FULL,
        raw_logits=raw,
        support_texts=support_texts,
    )
