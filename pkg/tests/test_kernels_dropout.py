import math

import numpy as np
import pytest

from docrec.errors import ConfigurationError
from docrec.kernels import (
    DropoutConfig,
    ScheduleConfig,
    curriculum_dropout_rate,
    diffused_mix_dropout,
    drop_probability,
    dropout,
    inject_tf_errors,
    mix_dropout,
)


def test_zero_rate_is_identity(rng):
    x = rng.normal(size=(4, 5))
    np.testing.assert_array_equal(dropout(x, 0.0, rng), x)
    np.testing.assert_array_equal(mix_dropout(x, DropoutConfig(0.0, 0.0), rng), x)


def test_standard_dropout_scales_survivors(rng):
    x = np.ones((200, 50))
    y = dropout(x, 0.5, rng)
    assert set(np.unique(y)) <= {0.0, 2.0}


def test_channel_dropout_drops_whole_channels(rng):
    y = dropout(np.ones((6, 7, 40)), 0.25, rng, channel_wise=True)
    per_channel = y.reshape(-1, 40)
    assert np.all((per_channel == 0).all(axis=0) | (per_channel == 1 / 0.75).all(axis=0))


@pytest.mark.parametrize("mode_prob", [1.0, 0.0])
def test_mix_dropout_preserves_expectation_in_each_mode(mode_prob):
    rng = np.random.default_rng(5)
    cfg = DropoutConfig(mode_prob=mode_prob)
    x = np.array([1.5, -2.0, 0.5, 3.0])
    n = 100_000
    samples = np.stack([mix_dropout(x, cfg, rng) for _ in range(n)])
    se = samples.std(axis=0) / math.sqrt(n)
    assert np.all(np.abs(samples.mean(axis=0) - x) <= 3 * se)


def test_mix_dropout_modes_equally_likely():
    rng = np.random.default_rng(9)
    n = 20_000
    hits = sum(mix_dropout(np.ones(3), rng=rng, return_mode=True)[1] == "standard" for _ in range(n))
    assert abs(hits / n - 0.5) <= 3 * math.sqrt(0.25 / n)


def test_mix_dropout_is_reproducible(rng):
    x = rng.normal(size=(3, 8))
    a = mix_dropout(x, rng=np.random.default_rng(42))
    b = mix_dropout(x, rng=np.random.default_rng(42))
    assert a.tobytes() == b.tobytes()


def test_diffused_mix_dropout_touches_one_location(rng):
    tensors = [np.ones((3, 4)), np.ones((2, 4)), np.ones((5, 4))]
    out, where = diffused_mix_dropout(tensors, DropoutConfig(0.9, 0.9), rng)
    for i, (a, b) in enumerate(zip(tensors, out)):
        if i != where:
            np.testing.assert_array_equal(a, b)


def test_dropout_config_validation():
    with pytest.raises(ConfigurationError):
        DropoutConfig(p_std=1.5)


def test_curriculum_values():
    cfg = ScheduleConfig(tau_bar=0.2, total_updates=1000)
    assert curriculum_dropout_rate(0, cfg) == 1.0
    assert curriculum_dropout_rate(1000, cfg) == pytest.approx(0.8 * math.exp(-1) + 0.2, abs=1e-12)
    assert curriculum_dropout_rate(100_000, cfg) == pytest.approx(0.2, abs=1e-9)


def test_drop_probability_meaning_flag():
    retain = ScheduleConfig(0.2, 1000, meaning="retain")
    drop = ScheduleConfig(0.2, 1000, meaning="drop")
    assert drop_probability(0, retain) == 0.0
    assert drop_probability(0, drop) == 1.0
    assert drop_probability(500, retain) == pytest.approx(1 - drop_probability(500, drop))
    with pytest.raises(ConfigurationError):
        ScheduleConfig(0.2, meaning="keep")
    with pytest.raises(ValueError):
        curriculum_dropout_rate(-1, retain)


def test_tf_errors_identity_at_zero_rate(rng):
    toks = list("hello")
    assert inject_tf_errors(toks, 0.0, list("helo"), rng) == toks


def test_tf_errors_rate_and_never_self_replace():
    rng = np.random.default_rng(11)
    vocab = list("abcd") + ["<X>", "</X>"]
    toks = list(rng.choice(vocab, size=100_000))
    out = inject_tf_errors(toks, 0.2, vocab, rng)
    changed = np.array([a != b for a, b in zip(toks, out)])
    n = len(toks)
    assert abs(changed.mean() - 0.2) <= 3 * math.sqrt(0.2 * 0.8 / n)


def test_tf_replacements_are_uniform_over_other_tokens():
    rng = np.random.default_rng(2)
    out = inject_tf_errors(["a"] * 30_000, 0.99, list("abcd"), rng)
    counts = {t: out.count(t) for t in "bcd"}
    assert all(abs(c / 30_000 - 0.33) < 0.02 for c in counts.values())


def test_tf_validation(rng):
    with pytest.raises(ConfigurationError):
        inject_tf_errors(["a"], 1.0, ["a", "b"], rng)
    with pytest.raises(ConfigurationError):
        inject_tf_errors(["z"], 0.1, ["a", "b"], rng)
