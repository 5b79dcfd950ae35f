#pragma once

#include <cstdint>
#include <span>

#include "ttlm/tensor.hpp"

namespace ttlm {

// Scaled dot-product attention over pre-rotated projections.
//
// q: [Tq, n_heads * d_head], k/v: [Tk, n_kv_heads * d_head]. Query head h
// attends through kv head floor(h * n_kv_heads / n_heads). q_pos/k_pos give
// absolute sequence positions per row; a key is visible when
// max(0, q - window + 1) <= k <= q (window == 0 disables the lower bound).
// Masked keys are excluded from the softmax rather than scored at -inf.
// Returns [Tq, n_heads * d_head], pre output-projection. A row with no
// visible keys comes back zero.

// Two-pass reference: materialises the score row, subtracts the row max,
// normalises, then mixes values.
Tensor attention_ref(const Tensor& q, const Tensor& k, const Tensor& v, std::int64_t n_heads,
                     std::int64_t n_kv_heads, std::span<const std::int64_t> q_pos,
                     std::span<const std::int64_t> k_pos, std::int64_t window);

// Single-pass streaming form: running max m, running normaliser l, and an
// accumulator rescaled by exp(m_old - m_new) whenever the max moves. Never
// stores a [Tq, Tk] score matrix.
Tensor attention_online(const Tensor& q, const Tensor& k, const Tensor& v, std::int64_t n_heads,
                        std::int64_t n_kv_heads, std::span<const std::int64_t> q_pos,
                        std::span<const std::int64_t> k_pos, std::int64_t window);

}  // namespace ttlm
