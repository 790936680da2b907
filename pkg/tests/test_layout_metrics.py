import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from docrec.errors import ConfigurationError, FormatError, GrammarError, UndefinedMetricError
from docrec.layout import (
    TaggedTranscription,
    extract_subsequences,
    load_transcriptions,
    map_cer,
    map_cer_corpus,
    postprocess,
    pper,
    read_schema,
    tokenize,
)
from docrec.layout.metrics import dump_transcription, map_cer_details
from docrec.segmetrics import interpolated_ap
from docrec.textmetrics import levenshtein
from layout_helpers import MIXED, random_tree_tokens

WORKED = ["<X>", "text1", "</X>", "<B>", "<A>", "text2", "</A>", "<A>", "text3", "</A>", "</B>"]
WORKED_CONF = [0.90, 0.95, 0.70, 0.95, 0.82, 0.73, 0.86, 0.80, 0.89, 0.80, 0.75]


def worked_example():
    toks, conf = [], []
    for t, c in zip(WORKED, WORKED_CONF):
        parts = [t] if MIXED.is_layout(t) else list(t)
        toks += parts
        conf += [c] * len(parts)
    return TaggedTranscription(toks, conf)


def test_worked_subsequence_example():
    spans = extract_subsequences(worked_example(), MIXED)
    pct = {c: [(t, round(s * 100, 9)) for t, s in v] for c, v in spans.items()}
    assert pct == {"X": [("text1", 80.0)], "A": [("text2", 84.0), ("text3", 80.0)], "B": [("text2text3", 85.0)]}


def test_no_layout_tokens_gives_no_spans():
    assert extract_subsequences(TaggedTranscription(list("abc"), [1.0] * 3), MIXED) == {}


def test_innermost_spans_cover_each_character_once():
    spans = extract_subsequences(worked_example(), MIXED)
    innermost = "".join(t for c in ("X", "A") for t, _ in spans[c])
    assert sorted(innermost) == sorted("text1text2text3")


def test_extract_requires_confidences_and_grammar():
    with pytest.raises(ConfigurationError):
        extract_subsequences(TaggedTranscription(["<X>", "</X>"]), MIXED)
    with pytest.raises(GrammarError):
        extract_subsequences(TaggedTranscription(["<X>"], [1.0]), MIXED)


def test_transcription_validation():
    with pytest.raises(ConfigurationError):
        TaggedTranscription(["a"], [0.5, 0.5])
    with pytest.raises(ConfigurationError):
        TaggedTranscription(["a"], [1.5])


def test_map_cer_identity_and_total_miss():
    t = worked_example()
    assert map_cer(t, t, MIXED) == 1.0
    wrong = TaggedTranscription(tokenize("<X>zzzzz</X><B><A>qqqqq</A><A>wwwww</A></B>", MIXED), [0.5] * 23)
    assert map_cer(wrong, t, MIXED) == 0.0


def map_cer_oracle(pred, gt, schema):
    """Per-class AP by explicit matching and exact fractions; classes weighted by GT characters."""
    from docrec.layout.metrics import _spans

    pspans = extract_subsequences(pred, schema)
    gspans = {c: [s[0] for s in sorted(v, key=lambda s: s[2])] for c, v in _spans(gt, schema, False).items()}
    num = Fraction(0)
    den = 0
    for c, gts in gspans.items():
        w = sum(map(len, gts))
        if not w:
            continue
        aps = []
        for k in range(1, 11):
            free = list(range(len(gts)))
            flags = []
            for text, _ in pspans.get(c, []):
                ok = [(Fraction(levenshtein(text, gts[j]), len(gts[j]) or 1), j) for j in free
                      if Fraction(levenshtein(text, gts[j]), len(gts[j]) or 1) <= Fraction(k, 20)
                      and (len(gts[j]) or not levenshtein(text, gts[j]))]
                if ok:
                    free.remove(min(ok)[1])
                flags.append(bool(ok))
            aps.append(Fraction(interpolated_ap(flags, len(gts))).limit_denominator(10**6))
        num += w * sum(aps) / 10
        den += w
    return float(num / den)


@given(st.integers(0, 2**32 - 1))
def test_map_cer_matches_oracle_on_random_documents(seed):
    rng = np.random.default_rng(seed)
    gt = TaggedTranscription(random_tree_tokens(MIXED, rng, chars="abcd"))
    if not any(not MIXED.is_layout(t) for t in gt.tokens):
        return
    raw = random_tree_tokens(MIXED, rng, chars="abcd")
    fixed = postprocess(raw, MIXED).corrected_tokens
    pred = TaggedTranscription(fixed, list(rng.random(len(fixed))))
    try:
        want = map_cer_oracle(pred, gt, MIXED)
    except ZeroDivisionError:
        with pytest.raises(UndefinedMetricError):
            map_cer(pred, gt, MIXED)
        return
    assert map_cer(pred, gt, MIXED) == pytest.approx(want, abs=1e-9)


@given(st.integers(0, 2**32 - 1))
def test_map_cer_depends_only_on_confidence_order(seed):
    rng = np.random.default_rng(seed)
    gt = TaggedTranscription(random_tree_tokens(MIXED, rng, chars="ab") + ["<X>", "a", "</X>"])
    pred_toks = random_tree_tokens(MIXED, rng, chars="ab")
    conf = rng.random(len(pred_toks))
    a = map_cer(TaggedTranscription(pred_toks, conf), gt, MIXED)
    b = map_cer(TaggedTranscription(pred_toks, conf**2 / 3), gt, MIXED)
    assert a == b


def test_lowest_cer_ground_truth_wins():
    gt = TaggedTranscription(tokenize("<X>abcdefghij</X><X>abcdefghik</X>", MIXED))
    # the prediction equals the second span exactly; the first is 10% away
    pred = TaggedTranscription(tokenize("<X>abcdefghik</X><X>abcdefghij</X>", MIXED), [1.0] * 24)
    assert map_cer(pred, gt, MIXED) == 1.0


def test_threshold_is_inclusive():
    gt = TaggedTranscription(tokenize("<X>abcdefghijklmnopqrst</X>", MIXED))  # 20 chars
    pred = TaggedTranscription(tokenize("<X>zbcdefghijklmnopqrst</X>", MIXED), [1.0] * 22)  # CER 5%
    assert map_cer(pred, gt, MIXED) == 1.0


def test_map_cer_corpus_weights_by_document_characters():
    a = TaggedTranscription(tokenize("<X>abc</X>", MIXED), [1.0] * 5)
    b_gt = TaggedTranscription(tokenize("<X>a</X>", MIXED))
    b_pred = TaggedTranscription(tokenize("<X>zzz</X>", MIXED), [1.0] * 5)
    assert map_cer_corpus([(a, a), (b_pred, b_gt)], MIXED) == pytest.approx(3 / 4)
    assert map_cer_details(a, a, MIXED).weight == 3


def test_pper_examples():
    gts = [TaggedTranscription(["<X>", "</X>"] * 7)]
    clean = postprocess(gts[0].tokens, MIXED)
    assert pper([clean], gts, MIXED) == 0.0
    broken = postprocess(["<X>", "</Y>"] + ["<X>", "</X>"] * 6, MIXED)
    assert broken.n_ppe == 2  # </Y> dropped, </X> added
    assert pper([broken], gts, MIXED) == pytest.approx(1 / 7)


@given(st.lists(st.integers(0, 2**32 - 1), min_size=1, max_size=4))
def test_pper_equals_recount_over_documents(seeds):
    reports, gts = [], []
    for s in seeds:
        rng = np.random.default_rng(s)
        gt = random_tree_tokens(MIXED, rng) + ["<Y>", "</Y>"]
        corrupted = [t for t in gt if rng.random() > 0.2]
        reports.append(postprocess(corrupted, MIXED))
        gts.append(gt)
    edits = sum(r.n_ppe for r in reports)
    norm = sum(sum(MIXED.is_layout(t) for t in g) for g in gts)
    assert pper(reports, gts, MIXED) == pytest.approx(edits / norm)


def test_transcription_jsonl_round_trip(tmp_path):
    t = worked_example()
    path = tmp_path / "t.jsonl"
    path.write_text(dump_transcription("d1", t) + "\n", encoding="utf-8")
    [(doc_id, back)] = load_transcriptions(path)
    assert doc_id == "d1" and back.tokens == t.tokens and back.confidences == t.confidences
    path.write_text(json.dumps({"id": "x", "tokens": "abc"}) + "\n")
    with pytest.raises(FormatError):
        load_transcriptions(path)
