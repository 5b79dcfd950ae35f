#pragma once

#include <cstdint>
#include <span>

#include "ttlm/tensor.hpp"

namespace ttlm {

// x_i / sqrt(mean(x^2) + eps) * gain_i, applied per row.
Tensor rms_norm(const Tensor& x, const Tensor& gain, float eps);

// Count of rms_norm invocations since process start (block-style tests).
std::uint64_t rms_norm_call_count();

// x * sigmoid(x), elementwise.
Tensor silu(const Tensor& x);

// Gated MLP: (silu(x W1^T) . (x V^T)) W2^T.
// w_gate/w_up: [d_ff, d_model], w_down: [d_model, d_ff].
Tensor swiglu_mlp(const Tensor& x, const Tensor& w_gate, const Tensor& w_up,
                  const Tensor& w_down);

// Rotates coordinate pairs (2i, 2i+1) of each head by position * base^(-2i/d_head).
// x: [..., n_heads * d_head] rows; every row rotated at the same position.
Tensor rope_apply(const Tensor& x, std::int64_t n_heads, std::int64_t position, float theta_base);

// In-place variant for one row (heads laid out contiguously).
void rope_apply_row(std::span<float> row, std::int64_t n_heads, std::int64_t position,
                    float theta_base);

// Key/value head serving query head h: floor(h * G / H). Contiguous groups of
// size H/G share one kv head; G=H is multi-head, G=1 is multi-query.
std::int64_t kv_group_index(std::int64_t q_head, std::int64_t n_heads, std::int64_t n_kv_heads);

// Sliding-window mask rule: key j visible from query i iff
// max(0, i-window+1) <= j <= i. window == 0 means no window (full causal).
bool swa_allowed(std::int64_t query_pos, std::int64_t key_pos, std::int64_t window);

// x [T, d_in] * w^T, w stored [d_out, d_in] -> [T, d_out].
Tensor linear(const Tensor& x, const Tensor& w);

}  // namespace ttlm
