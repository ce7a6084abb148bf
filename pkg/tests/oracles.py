"""Independent brute-force reference implementations for tests.

Everything here evaluates the metric definitions term by term, straight
from the naive formulas: the softmax is the literal exp-over-sum with no
max-subtraction, and each moment is a direct sum over the support.
Deliberately shares no code with the package.

Two precision tiers: small supports go through mpmath at 40 significant
digits (long double's log() loses relative accuracy on probabilities
within 1e-16 of 1, which near-one-hot two-point draws do hit); large
supports use x87 80-bit long double, where random draws cannot get close
enough to degenerate for that cliff to matter and mpmath would be slow.
"""

from __future__ import annotations

import numpy as np
from mpmath import mp, mpf

LD = np.longdouble

MPMATH_MAX_SUPPORT = 128
EPS_VAR = 1e-12


def softmax_ld(logits) -> np.ndarray:
    x = np.asarray(logits, dtype=LD)
    e = np.exp(x)
    return e / np.sum(e)


def probs_from_log_probs_ld(log_probs) -> np.ndarray:
    return np.exp(np.asarray(log_probs, dtype=LD))


def entropy_ld(p: np.ndarray) -> LD:
    mask = p > 0
    return -np.sum(p[mask] * np.log(p[mask]))


def varentropy_ld(p: np.ndarray) -> LD:
    mask = p > 0
    logs = np.log(p[mask])
    h = -np.sum(p[mask] * logs)
    return np.sum(p[mask] * logs**2) - h**2


def skewentropy_ld(p: np.ndarray, eps_var: float = EPS_VAR) -> LD:
    mask = p > 0
    logs = np.log(p[mask])
    h = -np.sum(p[mask] * logs)
    var = np.sum(p[mask] * logs**2) - h**2
    if var < eps_var:
        return LD(0.0)
    third = np.sum(p[mask] * (logs + h) ** 3)
    return third / var ** LD(1.5)


def all_metrics_ld(p: np.ndarray) -> tuple[float, float, float]:
    """Entropy, varentropy, skewentropy of a probability vector."""
    return float(entropy_ld(p)), float(varentropy_ld(p)), float(skewentropy_ld(p))


def _metrics_mp(logits) -> tuple[float, float, float]:
    with mp.workdps(40):
        xs = [mpf(float(x)) for x in logits]
        es = [mp.exp(x) for x in xs]
        total = mp.fsum(es)
        ps = [e / total for e in es]
        logs = [mp.log(p) for p in ps]
        h = -mp.fsum(p * lg for p, lg in zip(ps, logs))
        var = mp.fsum(p * lg**2 for p, lg in zip(ps, logs)) - h**2
        if var < mpf(EPS_VAR):
            skew = mpf(0)
        else:
            third = mp.fsum(p * (lg + h) ** 3 for p, lg in zip(ps, logs))
            skew = third / var ** mpf("1.5")
        return float(h), float(var), float(skew)


def reference_metrics(logits) -> tuple[float, float, float]:
    """Entropy, varentropy, skewentropy straight from raw logits."""
    logits = np.asarray(logits, dtype=np.float64)
    if logits.size <= MPMATH_MAX_SUPPORT:
        return _metrics_mp(logits)
    return all_metrics_ld(softmax_ld(logits))


def relative_error(value: float, reference: float, floor: float = 1e-300) -> float:
    return abs(value - reference) / max(abs(reference), floor)
