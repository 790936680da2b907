"""Deterministic numeric kernels: attention, encodings, VAN step, gating, dropout."""
from .attention import (
    AttentionParams,
    PEConfig,
    attention_mask,
    flatten_with_pe,
    positional_encoding_1d,
    positional_encoding_2d,
    scaled_dot_product_attention,
    sdpa_multihead,
    softmax,
    softmax_backward,
)
from .dropout import (
    DropoutConfig,
    ScheduleConfig,
    curriculum_dropout_rate,
    diffused_mix_dropout,
    drop_probability,
    dropout,
    inject_tf_errors,
    mix_dropout,
)
from .gating import gate, layer_norm
from .gradcheck import finite_diff_check, numerical_gradient
from .van import (
    VANAttentionState,
    VANParams,
    adaptive_max_pool,
    adaptive_pool_bins,
    learned_stop_head,
    van_attention_step,
)

__all__ = [
    "AttentionParams",
    "DropoutConfig",
    "PEConfig",
    "ScheduleConfig",
    "VANAttentionState",
    "VANParams",
    "adaptive_max_pool",
    "adaptive_pool_bins",
    "attention_mask",
    "curriculum_dropout_rate",
    "diffused_mix_dropout",
    "drop_probability",
    "dropout",
    "finite_diff_check",
    "flatten_with_pe",
    "gate",
    "inject_tf_errors",
    "layer_norm",
    "learned_stop_head",
    "mix_dropout",
    "numerical_gradient",
    "positional_encoding_1d",
    "positional_encoding_2d",
    "scaled_dot_product_attention",
    "sdpa_multihead",
    "softmax",
    "softmax_backward",
    "van_attention_step",
]
