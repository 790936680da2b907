import json
from functools import lru_cache

import pytest
from hypothesis import given
from hypothesis import strategies as st

from docrec.ctc import StopPolicy, paragraph_decode
from docrec.errors import FormatError, UndefinedMetricError
from docrec.textmetrics import (
    aggregate_counts,
    cer,
    d_mean,
    levenshtein,
    load_eval_pairs,
    pair_counts,
    split_words,
    wer,
)
from docrec.tokens import TokenDictionary

import numpy as np

text = st.text("abcd .!", max_size=12)


def edit_oracle(a, b):
    @lru_cache(maxsize=None)
    def go(i, j):
        if i == 0 or j == 0:
            return i + j
        return min(go(i - 1, j) + 1, go(i, j - 1) + 1, go(i - 1, j - 1) + (a[i - 1] != b[j - 1]))

    return go(len(a), len(b))


def test_levenshtein_examples():
    assert levenshtein("", "abc") == 3
    assert levenshtein("kitten", "sitting") == 3 == edit_oracle("kitten", "sitting")
    assert levenshtein("same", "same") == 0


def test_levenshtein_on_word_lists():
    assert levenshtein(["a", "cat"], ["a", "dog", "sat"]) == 2


@given(text, text)
def test_levenshtein_symmetry_and_bounds(a, b):
    d = levenshtein(a, b)
    assert d == levenshtein(b, a) == edit_oracle(a, b)
    assert abs(len(a) - len(b)) <= d <= max(len(a), len(b))
    assert (d == 0) == (a == b)


@given(text, text, text)
def test_levenshtein_triangle_inequality(a, b, c):
    assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


def test_cer_examples():
    assert cer([("abc", "abc")]) == 0.0
    assert cer([("ab", "ab"), ("cd", "ce")]) == 0.25
    assert cer([("abcdefghij", "")]) == 1.0


def test_cer_empty_ground_truth_is_undefined():
    with pytest.raises(UndefinedMetricError):
        cer([("", "abc")])


@given(st.lists(st.tuples(text.filter(bool), text), min_size=1, max_size=5))
def test_cer_is_length_weighted_mean_and_order_free(pairs):
    total = sum(len(g) for g, _ in pairs)
    weighted = sum(len(g) * (levenshtein(p, g) / len(g)) for g, p in pairs) / total
    assert cer(pairs) == pytest.approx(weighted)
    assert cer(pairs) == cer(list(reversed(pairs)))


def test_cer_nfc_switch():
    composed, decomposed = "\u00e9", "e\u0301"
    assert cer([(composed, decomposed)]) > 0
    assert cer([(composed, decomposed)], nfc=True) == 0


def test_split_words_modes():
    assert split_words("a cat !") == ["a", "cat", "!"]
    assert split_words("a cat!") == ["a", "cat", "!"]
    assert split_words("a cat !", "punct_attached") == ["a", "cat!"]
    assert split_words("«oui»", "punct_as_word") == ["«", "oui", "»"]
    with pytest.raises(ValueError):
        split_words("x", "bogus")


def test_wer_examples():
    assert wer([("a cat.", "a cat.")]) == 0.0
    assert wer([("a cat.", "a cat.")], mode="punct_attached") == 0.0
    assert wer([("a cat !", "a cat .")]) == pytest.approx(1 / 3)
    assert wer([("a cat !", "a cat .")], mode="punct_attached") == pytest.approx(1 / 2)


@given(st.lists(st.tuples(st.text("ab ", max_size=10).filter(lambda s: s.split() != []), st.text("ab ", max_size=10)), min_size=1, max_size=4))
def test_wer_modes_agree_without_punctuation(pairs):
    assert wer(pairs, "punct_as_word") == wer(pairs, "punct_attached")


def test_wer_custom_punctuation():
    assert split_words("a-b", punctuation="-") == ["a", "-", "b"]
    assert split_words("a-b", punctuation="") == ["a-b"]


def test_d_mean_examples():
    assert d_mean([(3, 3), (5, 5)]) == 0.0
    assert d_mean([(5, 7), (3, 3)]) == 1.0
    with pytest.raises(UndefinedMetricError):
        d_mean([])


def test_d_mean_of_fixed_stop_policy():
    # a fixed-stop decoder always reads l_max = 30 lines; true counts average 9.68
    d = TokenDictionary(("a",))
    blank = np.array([[0.0, 1.0]])
    true_counts = [9] * 8 + [10] * 17  # mean 9.68
    used = [paragraph_decode([blank] * 30, d, StopPolicy("fixed", 30)).lines_used for _ in true_counts]
    assert d_mean(zip(true_counts, used)) == pytest.approx(20.32)


def test_pair_counts_aggregate_like_cer_and_wer():
    pairs = [("a cat !", "a cat ."), ("hello", "help")]
    scores = aggregate_counts(pair_counts(p) for p in pairs)
    assert scores.cer == pytest.approx(cer(pairs))
    assert scores.wer == pytest.approx(wer(pairs))


def test_load_eval_pairs(tmp_path):
    path = tmp_path / "p.jsonl"
    path.write_text(json.dumps({"id": 1, "gt": "ab", "pred": "ac"}) + "\n\n", encoding="utf-8")
    [(doc_id, pair)] = load_eval_pairs(path)
    assert doc_id == "1" and pair.ground_truth == "ab" and pair.prediction == "ac"
    path.write_text('{"id": 1, "gt": "ab"}\n', encoding="utf-8")
    with pytest.raises(FormatError):
        load_eval_pairs(path)
