import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from docrec.errors import ConfigurationError, ShapeError
from docrec.kernels import (
    AttentionParams,
    PEConfig,
    attention_mask,
    finite_diff_check,
    flatten_with_pe,
    gate,
    layer_norm,
    numerical_gradient,
    positional_encoding_1d,
    positional_encoding_2d,
    scaled_dot_product_attention,
    sdpa_multihead,
    softmax,
    softmax_backward,
)
from docrec.kernels.check import min_pairwise_linf

vectors = st.lists(st.floats(-50, 50), min_size=1, max_size=12).map(np.array)


# -- softmax ---------------------------------------------------------------------


def test_softmax_examples():
    np.testing.assert_array_equal(softmax(np.array([0.0, 0.0])), [0.5, 0.5])
    out = softmax(np.array([1000.0, 0.0]))
    assert np.all(np.isfinite(out)) and out[0] == pytest.approx(1.0) and out[1] < 1e-300


@given(vectors, st.floats(-100, 100))
def test_softmax_sums_to_one_and_is_shift_invariant(v, c):
    y = softmax(v)
    assert abs(y.sum() - 1) <= 1e-9 and np.all(y >= 0)
    np.testing.assert_allclose(softmax(v + c), y, rtol=1e-9, atol=1e-15)


def test_softmax_preserves_argmax(rng):
    v = rng.normal(size=(1000, 7)) * 5
    assert np.array_equal(softmax(v).argmax(axis=1), v.argmax(axis=1))


def test_softmax_backward_matches_finite_differences(rng):
    v = rng.normal(size=6)
    g = rng.normal(size=6)
    analytic = softmax_backward(softmax(v), g)
    assert finite_diff_check(lambda z: float(softmax(z) @ g), analytic, v, step=1e-6) < 1e-6


# -- gradient checker ------------------------------------------------------------


def test_finite_diff_exact_on_linear_function(rng):
    w = rng.normal(size=5)
    assert finite_diff_check(lambda x: float(w @ x), w, rng.normal(size=5)) <= 1e-10


def test_finite_diff_on_softmax_cross_entropy(rng):
    target = 2
    z = rng.normal(size=5)
    analytic = softmax(z) - np.eye(5)[target]
    assert finite_diff_check(lambda x: -np.log(softmax(x)[target]), analytic, z, step=1e-5) <= 1e-6


def test_numerical_gradient_restores_point(rng):
    x = rng.normal(size=(2, 3))
    before = x.copy()
    numerical_gradient(lambda v: float((v**2).sum()), x)
    np.testing.assert_array_equal(x, before)


# -- positional encodings --------------------------------------------------------


def test_pe_at_origin_alternates_zero_one():
    np.testing.assert_array_equal(positional_encoding_1d(0, PEConfig(8)), [0, 1] * 4)
    np.testing.assert_array_equal(positional_encoding_2d(0, 0, PEConfig(8)), [0, 1] * 4)


def test_pe_1d_matches_formula():
    cfg = PEConfig(16)
    pos = 37
    pe = positional_encoding_1d(pos, cfg)
    for i in range(8):
        w = 10000 ** (-2 * i / 16)
        assert pe[2 * i] == pytest.approx(np.sin(pos * w))
        assert pe[2 * i + 1] == pytest.approx(np.cos(pos * w))


def test_pe_2d_halves_encode_y_then_x():
    cfg = PEConfig(16)
    pe = positional_encoding_2d(3, 5, cfg)
    w = 10000 ** (-2 * np.arange(4) / 16)
    np.testing.assert_allclose(pe[0:8:2], np.sin(5 * w))
    np.testing.assert_allclose(pe[9::2], np.cos(3 * w))


def test_pe_bounded_and_length_independent():
    cfg = PEConfig(64)
    a = positional_encoding_1d(np.arange(100), cfg)
    b = positional_encoding_1d(np.arange(500), cfg)[:100]
    assert np.all(np.abs(b) <= 1)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("n,d", [(200, 16), (300, 32), (150, 8)])
def test_pe_gap_matches_pairwise_scan(n, d):
    cfg = PEConfig(d)
    pe = positional_encoding_1d(np.arange(n), cfg)
    brute = min(np.max(np.abs(pe[i] - pe[j])) for i in range(n) for j in range(i + 1, n))
    assert min_pairwise_linf(n, cfg) == pytest.approx(brute, rel=1e-12)


def test_pe_validation():
    with pytest.raises(ConfigurationError):
        PEConfig(7)
    with pytest.raises(ConfigurationError):
        positional_encoding_2d(0, 0, PEConfig(6))
    with pytest.raises(ValueError):
        positional_encoding_1d(-1)


def test_flatten_with_pe_index_mapping(rng):
    cfg = PEConfig(8)
    f = rng.normal(size=(3, 5, 8))
    flat = flatten_with_pe(f, cfg)
    assert flat.shape == (15, 8)
    np.testing.assert_allclose(flat[7], f[1, 2] + positional_encoding_2d(2, 1, cfg))
    grid = flat.reshape(3, 5, 8)
    ys, xs = np.meshgrid(np.arange(3), np.arange(5), indexing="ij")
    np.testing.assert_allclose(grid - positional_encoding_2d(xs, ys, cfg), f)
    single = flatten_with_pe(f[:1, :1], cfg)
    np.testing.assert_allclose(single[0], f[0, 0] + positional_encoding_2d(0, 0, cfg))
    with pytest.raises(ShapeError):
        flatten_with_pe(f[0], cfg)


# -- attention -------------------------------------------------------------------


def test_window_mask_shape():
    m = attention_mask(6, 6, "window", window=3)
    assert m[5].tolist() == [False, False, False, True, True, True]
    assert m[0].tolist() == [True] + [False] * 5
    assert np.array_equal(attention_mask(4, 4, "causal"), np.tril(np.ones((4, 4), bool)))


def test_single_key_returns_its_value(rng):
    q = rng.normal(size=(3, 4))
    k = rng.normal(size=(1, 4))
    v = rng.normal(size=(1, 5))
    out, w = scaled_dot_product_attention(q, k, v)
    np.testing.assert_allclose(out, np.repeat(v, 3, axis=0))
    np.testing.assert_array_equal(w, np.ones((3, 1)))


def test_attention_matches_direct_formula(rng):
    q, k, v = rng.normal(size=(4, 8)), rng.normal(size=(6, 8)), rng.normal(size=(6, 3))
    out, w = scaled_dot_product_attention(q, k, v)
    logits = q @ k.T / np.sqrt(8)
    e = np.exp(logits - logits.max(axis=1, keepdims=True))
    np.testing.assert_allclose(w, e / e.sum(axis=1, keepdims=True))
    np.testing.assert_allclose(out, w @ v)


def _perturb_check(rng, mask, window, positions):
    t_len, d = 130, 16
    params = AttentionParams.random(d, 4, rng)
    x = rng.normal(size=(t_len, d))
    out, w = sdpa_multihead(x, x, params, mask, window, return_weights=True)
    np.testing.assert_allclose(w.sum(axis=-1), 1.0, atol=1e-9)
    for t in (0, 50, 129):
        y = x.copy()
        hidden = positions(t, t_len)
        y[hidden] += rng.normal(size=(len(hidden), d)) * 10
        assert np.array_equal(sdpa_multihead(y, y, params, mask, window)[t], out[t])


def test_causal_independence(rng):
    _perturb_check(rng, "causal", 100, lambda t, n: list(range(t + 1, n)))


def test_window_independence(rng):
    _perturb_check(rng, "window", 100, lambda t, n: list(range(0, max(t - 99, 0))))


def test_one_head_identity_output_equals_single_head(rng):
    d = 6
    x = rng.normal(size=(5, d))
    eye = np.eye(d)[None]
    params = AttentionParams(eye, eye, eye, np.eye(d))
    out = sdpa_multihead(x, x, params, "causal")
    ref, _ = scaled_dot_product_attention(x, x, x, attention_mask(5, 5, "causal"))
    np.testing.assert_array_equal(out, ref)


def test_multihead_shape_errors(rng):
    params = AttentionParams.random(8, 2, rng)
    with pytest.raises(ShapeError):
        sdpa_multihead(rng.normal(size=(3, 4)), rng.normal(size=(3, 8)), params)
    with pytest.raises(ConfigurationError):
        attention_mask(3, 3, "diagonal")


# -- gating ----------------------------------------------------------------------


def test_gate_halves_channels(rng):
    assert gate(rng.normal(size=(4, 4, 8))).shape == (4, 4, 4)
    with pytest.raises(ShapeError):
        gate(np.zeros((2, 3)))


def test_gate_of_constant_input_is_zero():
    np.testing.assert_array_equal(gate(np.full((4, 4, 8), 3.0)), 0.0)


@pytest.mark.parametrize("axes", [None, -1])
def test_gate_matches_step_by_step_composition(rng, axes):
    x = rng.normal(size=(3, 5, 6))
    a, b = x[..., :3], x[..., 3:]
    t = np.tanh(a)
    s = 1 / (1 + np.exp(-b))

    def ln(v):
        mu = v.mean(axis=axes, keepdims=True)
        return (v - mu) / np.sqrt(((v - mu) ** 2).mean(axis=axes, keepdims=True) + 1e-5)

    np.testing.assert_allclose(gate(x, norm_axes=axes), ln(t) * ln(s), rtol=1e-12)


def test_layer_norm_statistics(rng):
    y = layer_norm(rng.normal(3, 2, size=(10, 10)))
    assert abs(y.mean()) < 1e-12 and y.std() == pytest.approx(1, abs=1e-5)
