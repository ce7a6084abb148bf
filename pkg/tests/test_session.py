import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tokentropy import (
    FlagThresholds,
    aggregate,
    build_session,
    color_map,
    compare,
    flag_tokens,
    normalize_logits,
    parse_records,
    preamble_text,
    reverse_words,
    scatter_export,
    session_report,
)
from tokentropy.errors import AlignmentError, EmptySequence
from tokentropy.session import render_report_bytes

from .conftest import one_hot_distribution, random_session_records, uniform_distribution

LN2 = math.log(2)
LN4 = math.log(4)


def uniform_session(n_tokens=5, support=4, label="uniform"):
    distributions = [uniform_distribution(support, position=i) for i in range(n_tokens)]
    return build_session(label, distributions, [f"t{i}" for i in range(n_tokens)])


class TestBuildSession:
    def test_fresh_session_has_no_computations(self):
        s = uniform_session(3)
        assert all(s.cache.compute_count(k) == 0 for k in ("entropy", "surprisal"))
        assert len(s) == 3

    def test_alignment_mismatch(self):
        distributions = [uniform_distribution(4, position=i) for i in range(3)]
        with pytest.raises(AlignmentError):
            build_session("x", distributions, ["a", "b"])

    def test_empty_rejected(self):
        with pytest.raises(EmptySequence):
            build_session("x", [], [])


class TestAggregate:
    def test_uniform_session_aggregates(self):
        stats = aggregate(uniform_session(5, support=4))
        summary = stats.metrics["entropy"]
        for value in (summary.mean, summary.median, summary.min, summary.max):
            assert value == pytest.approx(LN4, abs=1e-12)
        assert stats.tokens == 5

    def test_even_median_and_ppl(self):
        # surprisals [0, ln 4] -> PPL = 2, median = ln 2
        d0 = one_hot_distribution(4, hot=0, position=0)
        d1 = uniform_distribution(4, position=1)
        s = build_session("x", [d0, d1], ["a", "b"])
        stats = aggregate(s)
        assert stats.perplexity == pytest.approx(2.0, rel=1e-9)
        assert stats.metrics["surprisal"].median == pytest.approx(LN2, abs=1e-9)

    def test_mean_surprisal_is_log_perplexity(self):
        rng = np.random.default_rng(2)
        distributions = [
            normalize_logits(rng.normal(0, 2, size=16), int(rng.integers(16)), position=i)
            for i in range(33)
        ]
        stats = aggregate(build_session("x", distributions, ["t"] * 33))
        assert stats.metrics["surprisal"].mean == pytest.approx(
            math.log(stats.perplexity), abs=1e-9
        )
        assert stats.log_probability == pytest.approx(-stats.metrics["surprisal"].mean)

    def test_bounds_hold(self):
        rng = np.random.default_rng(9)
        distributions = [
            normalize_logits(rng.normal(0, 3, size=12), int(rng.integers(12)), position=i)
            for i in range(40)
        ]
        stats = aggregate(build_session("x", distributions, ["t"] * 40))
        for summary in stats.metrics.values():
            assert summary.min <= summary.median <= summary.max
            assert summary.min <= summary.mean <= summary.max

    def test_character_count_from_source_text(self):
        s = build_session(
            "x",
            [uniform_distribution(4)],
            ["hello"],
            source_text="hello world",
        )
        assert aggregate(s).characters == len("hello world")
        s2 = build_session("x", [uniform_distribution(4)], ["héllo"])
        assert aggregate(s2).characters == 5


class TestReverseWords:
    def test_basic(self):
        assert reverse_words("a b c") == "c b a"

    def test_empty(self):
        assert reverse_words("") == ""

    def test_preamble_opening(self):
        assert reverse_words("We hold these truths") == "truths these hold We"

    def test_punctuation_stays_attached(self):
        assert reverse_words("Happiness.--That to") == "to Happiness.--That"

    @given(st.lists(st.text(st.characters(blacklist_categories=("Z", "C")), min_size=1), min_size=0, max_size=30))
    @settings(max_examples=200, deadline=None)
    def test_involution_on_normalized_text(self, words):
        text = " ".join(words)
        assert reverse_words(reverse_words(text)) == text

    def test_fixture_reversal_preserves_characters(self):
        text = preamble_text()
        reversed_text = reverse_words(text)
        assert len(reversed_text) == len(text)
        assert reverse_words(reversed_text) == text


class TestPreambleFixture:
    def test_character_count_matches_published_value(self):
        assert len(preamble_text()) == 1628


class TestCompare:
    def test_self_comparison_zero_deltas(self):
        s = uniform_session(4)
        report = compare(s, s)
        assert all(delta == 0.0 for delta in report.deltas.values())
        for row, ratio in report.ratios.items():
            if report.left.row_value(row) == 0:
                assert ratio is None  # zero-by-zero has no ratio
            else:
                assert ratio == pytest.approx(1.0)

    def test_known_constant_entropy_delta(self):
        left = uniform_session(6, support=2, label="two")
        right = uniform_session(6, support=4, label="four")
        report = compare(left, right)
        assert report.deltas["entropy"] == pytest.approx(LN4 - LN2, abs=1e-12)
        assert report.ratios["entropy"] == pytest.approx(LN4 / LN2, rel=1e-12)

    def test_lengths_may_differ(self):
        report = compare(uniform_session(3), uniform_session(7))
        assert report.left.tokens == 3
        assert report.right.tokens == 7

    def test_table_rendering_row_order(self):
        table = compare(uniform_session(2), uniform_session(2)).render_table()
        lines = table.splitlines()
        heads = [line.split("  ")[0].strip() for line in lines]
        assert heads[:3] == ["Metric", "Tokens", "Characters"]
        assert heads[3:] == [
            "Entropy",
            "Varentropy",
            "Skewentropy",
            "Perplexity",
            "Probability",
            "Log Probability (mean ln P)",
        ]


class TestScatter:
    def test_uniform_points(self):
        points = scatter_export(uniform_session(2))
        assert len(points) == 2
        for h, v, pos, _ in points:
            assert h == pytest.approx(LN4, abs=1e-12)
            assert v == pytest.approx(0.0, abs=1e-10)

    def test_one_hot_confident_corner(self):
        distributions = [one_hot_distribution(4, position=i) for i in range(3)]
        s = build_session("hot", distributions, ["a", "b", "c"])
        for h, v, _, _ in scatter_export(s):
            assert h == pytest.approx(0.0, abs=1e-9)
            assert v == pytest.approx(0.0, abs=1e-9)

    def test_points_equal_cached_vectors_exactly(self):
        rng = np.random.default_rng(4)
        distributions = [
            normalize_logits(rng.normal(0, 2, size=10), int(rng.integers(10)), position=i)
            for i in range(9)
        ]
        s = build_session("mixed", distributions, [f"t{i}" for i in range(9)])
        points = scatter_export(s)
        h = s.metric("entropy")
        v = s.metric("varentropy")
        for i, (ph, pv, pos, tok) in enumerate(points):
            assert pos == i and tok == f"t{i}"
            assert ph == h[i] and pv == v[i]  # equality, not tolerance


class TestFlagging:
    def test_infinite_thresholds_flag_nothing(self):
        assert flag_tokens(uniform_session(5), FlagThresholds()) == []

    def test_zero_thresholds_flag_everything(self):
        s = uniform_session(5)
        flagged = flag_tokens(
            s, FlagThresholds(entropy=0.0, varentropy=float("inf"), surprisal=0.0)
        )
        assert [pos for pos, _ in flagged] == list(range(5))
        for _, kinds in flagged:
            assert "entropy" in kinds and "surprisal" in kinds

    def test_threshold_separates_support_sizes(self):
        distributions = [
            uniform_distribution(2, position=0),
            uniform_distribution(4, position=1),
            uniform_distribution(2, position=2),
            uniform_distribution(4, position=3),
        ]
        s = build_session("mix", distributions, list("abcd"))
        flagged = flag_tokens(s, FlagThresholds(entropy=math.log(3)))
        assert [pos for pos, _ in flagged] == [1, 3]
        assert all(kinds == ["entropy"] for _, kinds in flagged)

    def test_negative_threshold_rejected(self):
        with pytest.raises(ValueError):
            FlagThresholds(entropy=-1.0)


class TestColorMap:
    def test_linear_ramp(self):
        np.testing.assert_allclose(color_map([1.0, 2.0, 3.0]), [0.0, 0.5, 1.0])

    def test_constant_maps_to_zero(self):
        np.testing.assert_array_equal(color_map([5.0, 5.0, 5.0]), [0.0, 0.0, 0.0])

    def test_argmax_preserved(self):
        s = uniform_session(1)
        rng = np.random.default_rng(8)
        values = rng.uniform(0, 3, size=50)
        intensities = color_map(values, "entropy")
        assert int(np.argmax(intensities)) == int(np.argmax(values))
        assert intensities.min() == 0.0 and intensities.max() == 1.0


class TestReportDeterminism:
    def test_identical_records_identical_reports(self):
        rng = np.random.default_rng(21)
        text = random_session_records(rng, 17, 12)
        d1, t1 = parse_records(text)
        d2, t2 = parse_records(text)
        s1 = build_session("same", d1, t1)
        s2 = build_session("same", d2, t2)
        assert render_report_bytes(s1) == render_report_bytes(s2)

    def test_report_schema_keys(self):
        s = uniform_session(3)
        doc = session_report(s)
        assert list(doc.keys()) == [
            "label",
            "tokens",
            "characters",
            "metrics",
            "perplexity",
            "log_probability",
            "approximate",
            "scatter",
            "flags",
        ]
        assert list(doc["metrics"].keys()) == [
            "probability",
            "surprisal",
            "entropy",
            "varentropy",
            "skewentropy",
            "perplexity",
        ]
        for summary in doc["metrics"].values():
            assert list(summary.keys()) == ["mean", "median", "min", "max"]
        parsed = json.loads(render_report_bytes(s))
        assert parsed["tokens"] == 3
        assert len(parsed["scatter"]) == 3
