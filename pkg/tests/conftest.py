import numpy as np
import pytest

from tokentropy import normalize_logits, write_records
from tokentropy.stub_backend import StubBackendServer


@pytest.fixture(scope="session")
def stub_server():
    with StubBackendServer() as server:
        yield server


def uniform_distribution(n: int, selected: int = 0, position: int = 0):
    return normalize_logits(np.zeros(n), selected, position=position)


def one_hot_distribution(n: int = 4, hot: int = 0, position: int = 0, sharpness: float = 1e4):
    logits = np.zeros(n)
    logits[hot] = sharpness
    return normalize_logits(logits, hot, position=position)


def distribution_from_probs(probs, selected: int = 0, position: int = 0):
    return normalize_logits(np.log(np.asarray(probs, dtype=np.float64)), selected, position=position)


def random_session_records(rng: np.random.Generator, n_tokens: int, vocab: int) -> str:
    """Record text for a session of random FULL distributions."""
    distributions = []
    texts = []
    for pos in range(n_tokens):
        logits = rng.normal(0.0, 3.0, size=vocab)
        selected = int(rng.integers(vocab))
        distributions.append(normalize_logits(logits, selected, position=pos))
        texts.append(f"tok{pos}")
    return write_records(distributions, texts)
