"""Line-delimited token record files.

One JSON object per line, one line per token position:

    {"pos": 0, "token_id": 17, "token": "We", "logits": [...]}
    {"pos": 1, "token_id": 3,  "token": " hold", "top_logprobs": [[3, -0.2], [9, -2.1]]}

Exactly one payload per record: "logits" (full vocabulary, token_id indexes
into the vector), "top_logprobs" (observed top-k as [token_id, logprob]
pairs, non-increasing), or "logits_ref" ({"offset", "count", "dtype"}
pointing into an external binary buffer, for vocabularies too large to
inline). Buffer slices are exposed to the distribution as zero-copy views.

Top-k records are completed by lumping the residual probability mass into
one synthetic tail entry, which keeps entropy a provable lower bound of the
full-vocabulary value instead of biasing it by renormalization.
"""

from __future__ import annotations

import json
from typing import IO, Iterable, Optional, Sequence

import numpy as np

from .distributions import (
    TAIL_TOKEN_ID,
    Coverage,
    TokenDistribution,
    log_sum_exp,
    normalize_logits,
)
from .errors import (
    EmptySupport,
    InvalidLogits,
    MassOverflowError,
    ParseError,
    SelectionMissingError,
    SequenceGapError,
)

# Residual mass below this is dropped instead of becoming a tail entry.
MIN_TAIL_MASS = 1e-12
# Observed top-k mass may exceed 1 by at most this before it is an error.
MASS_TOL = 1e-6

TAIL_TEXT = "<tail>"


def lump_tail(
    topk: Sequence[tuple[int, float]],
    selected: int,
    *,
    position: int = 0,
    texts: Optional[Sequence[str]] = None,
) -> TokenDistribution:
    """Build a distribution from top-k (token_id, logprob) pairs.

    Residual mass 1 - sum(exp(logprob)) becomes one synthetic tail entry so
    the support is a proper probability distribution. If the residual is
    below MIN_TAIL_MASS the tail is omitted and the support counts as FULL.

    Raises:
        SelectionMissingError: ``selected`` is not among the top-k ids.
        MassOverflowError: top-k mass exceeds 1 + MASS_TOL.
    """
    ids = [int(t) for t, _ in topk]
    lps = np.array([float(lp) for _, lp in topk], dtype=np.float64)
    if selected not in ids:
        raise SelectionMissingError(
            f"selected token {selected} not among top-k ids at position {position}"
        )
    selected_index = ids.index(int(selected))
    lse = log_sum_exp(lps)
    if lse > np.log1p(MASS_TOL):
        raise MassOverflowError(
            f"top-k mass {float(np.exp(lse))} exceeds 1 at position {position}"
        )
    residual = -float(np.expm1(lse))  # 1 - sum(p), computed in log space
    if residual < MIN_TAIL_MASS:
        log_probs = lps - lse
        np.minimum(log_probs, 0.0, out=log_probs)
        return TokenDistribution(
            position=position,
            log_probs=log_probs,
            token_ids=np.array(ids),
            selected_index=selected_index,
            coverage=Coverage.FULL,
            support_texts=list(texts) if texts is not None else None,
        )
    log_probs = np.append(lps, np.log(residual))
    support_texts = list(texts) + [TAIL_TEXT] if texts is not None else None
    return TokenDistribution(
        position=position,
        log_probs=log_probs,
        token_ids=np.array(ids + [TAIL_TOKEN_ID]),
        selected_index=selected_index,
        coverage=Coverage.TOPK_LUMPED,
        tail_index=len(ids),
        support_texts=support_texts,
    )


class LogitsBuffer:
    """Read-only memory map over an external binary logits buffer."""

    def __init__(self, path):
        self._raw = np.memmap(path, dtype=np.uint8, mode="r")

    def slice(self, offset: int, count: int, dtype: str) -> np.ndarray:
        dt = np.dtype(dtype)
        end = offset + count * dt.itemsize
        if end > self._raw.size:
            raise ValueError(
                f"logits_ref [{offset}:{end}] beyond buffer of {self._raw.size} bytes"
            )
        return self._raw[offset:end].view(dt)


def _payload_key(obj: dict) -> str:
    present = [k for k in ("logits", "top_logprobs", "logits_ref") if k in obj]
    if len(present) != 1:
        raise ValueError(
            f"record must carry exactly one of logits/top_logprobs/logits_ref, got {present}"
        )
    return present[0]


def parse_record_line(
    line: str,
    *,
    lineno: int = 1,
    logits_buffer: Optional[LogitsBuffer] = None,
) -> tuple[TokenDistribution, str]:
    """Parse one record line into a distribution plus its token text.

    Does not enforce the position sequence; parse_records does that for
    whole files. Streaming consumers use this directly so one bad record
    can be skipped without losing the rest of the stream.
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(lineno, f"invalid JSON ({exc.msg})") from exc
    try:
        pos = int(obj["pos"])
        token_id = int(obj["token_id"])
        token = obj["token"]
        if not isinstance(token, str):
            raise ValueError("token must be a string")
        key = _payload_key(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(lineno, f"schema violation: {exc}") from exc

    if key == "logits":
        values = np.asarray(obj["logits"], dtype=np.float64)
        d = _full_record(values, token_id, pos, lineno)
    elif key == "logits_ref":
        if logits_buffer is None:
            raise ParseError(lineno, "record references a buffer but none was given")
        ref = obj["logits_ref"]
        try:
            values = logits_buffer.slice(
                int(ref["offset"]), int(ref["count"]), ref.get("dtype", "<f8")
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(lineno, f"bad logits_ref: {exc}") from exc
        d = _full_record(values, token_id, pos, lineno)
    else:
        pairs = obj["top_logprobs"]
        try:
            topk = [(int(t), float(lp)) for t, lp in pairs]
        except (TypeError, ValueError) as exc:
            raise ParseError(lineno, f"bad top_logprobs: {exc}") from exc
        if not topk:
            raise ParseError(lineno, "top_logprobs is empty")
        lps = [lp for _, lp in topk]
        if any(a < b for a, b in zip(lps, lps[1:])):
            raise ParseError(lineno, "top_logprobs must be non-increasing")
        try:
            d = lump_tail(topk, token_id, position=pos)
        except ValueError as exc:
            raise ParseError(lineno, f"bad top_logprobs: {exc}") from exc
    return d, token


def parse_records(
    stream: Iterable[str] | str,
    *,
    logits_buffer: Optional[LogitsBuffer] = None,
) -> tuple[list[TokenDistribution], list[str]]:
    """Parse line-delimited records into distributions plus token texts.

    Args:
        stream: record text, either one string or an iterable of lines.
        logits_buffer: required when any record uses "logits_ref".

    Raises:
        ParseError: malformed JSON or schema violation, with line number.
        SequenceGapError: positions are not exactly 0, 1, 2, ...
        SelectionMissingError: a record's token is outside its support.
        MassOverflowError: a top-k record's mass exceeds 1 + MASS_TOL.
    """
    if isinstance(stream, str):
        stream = stream.splitlines()
    distributions: list[TokenDistribution] = []
    texts: list[str] = []
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        d, token = parse_record_line(line, lineno=lineno, logits_buffer=logits_buffer)
        if d.position != len(distributions):
            raise SequenceGapError(
                lineno, f"expected position {len(distributions)}, got {d.position}"
            )
        distributions.append(d)
        texts.append(token)
    return distributions, texts


def _full_record(values: np.ndarray, token_id: int, pos: int, lineno: int):
    if not 0 <= token_id < values.size:
        raise SelectionMissingError(
            f"line {lineno}: token_id {token_id} outside full support of size {values.size}"
        )
    try:
        return normalize_logits(values, token_id, position=pos)
    except (InvalidLogits, EmptySupport, ValueError) as exc:
        raise ParseError(lineno, f"bad logits: {exc}") from exc


def write_records(
    distributions: Sequence[TokenDistribution],
    texts: Sequence[str],
    *,
    buffer: Optional[IO[bytes]] = None,
    buffer_dtype: str = "<f8",
) -> str:
    """Serialize distributions back to the line-delimited record format.

    FULL-coverage distributions whose token ids are the plain 0..n-1 range
    are written as full logit vectors (or as "logits_ref" into ``buffer``
    when one is given); everything else is written as top_logprobs pairs,
    dropping any synthetic tail so a re-parse lumps the residual again.
    """
    if len(distributions) != len(texts):
        raise ValueError("distributions and texts must align")
    lines = []
    offset = 0
    dt = np.dtype(buffer_dtype)
    for d, text in zip(distributions, texts):
        rec: dict = {"pos": d.position, "token_id": d.selected_token_id, "token": text}
        plain_ids = bool(np.array_equal(d.token_ids, np.arange(d.support_size)))
        if d.coverage is Coverage.FULL and plain_ids:
            values = d.raw_logits if d.raw_logits is not None else d.log_probs
            if buffer is not None:
                data = np.ascontiguousarray(values, dtype=dt)
                buffer.write(data.tobytes())
                rec["logits_ref"] = {
                    "offset": offset,
                    "count": int(data.size),
                    "dtype": buffer_dtype,
                }
                offset += data.nbytes
            else:
                rec["logits"] = [float(v) for v in values]
        else:
            order = np.argsort(-d.log_probs, kind="stable")
            pairs = [
                [int(d.token_ids[i]), float(d.log_probs[i])]
                for i in order
                if i != d.tail_index
            ]
            rec["top_logprobs"] = pairs
        lines.append(json.dumps(rec, ensure_ascii=False))
    return "\n".join(lines) + "\n" if lines else ""
