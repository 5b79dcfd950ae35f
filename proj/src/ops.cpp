#include "ttlm/ops.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>

#include "ttlm/errors.hpp"

namespace ttlm {

namespace {
std::atomic<std::uint64_t> g_rms_norm_calls{0};
}

std::uint64_t rms_norm_call_count() { return g_rms_norm_calls.load(); }

Tensor rms_norm(const Tensor& x, const Tensor& gain, float eps) {
  g_rms_norm_calls.fetch_add(1, std::memory_order_relaxed);
  if (x.rank() != 2) throw DimensionError("rms_norm expects rank-2 input, got " + shape_str(x.shape()));
  const std::int64_t d = x.cols();
  if (gain.rank() != 1 || gain.numel() != d) {
    throw DimensionError("rms_norm gain shape " + shape_str(gain.shape()) +
                         " does not match feature dim " + std::to_string(d));
  }
  Tensor out(x.shape());
  for (std::int64_t r = 0; r < x.rows(); ++r) {
    double ss = 0.0;
    for (std::int64_t k = 0; k < d; ++k) {
      const double v = x(r, k);
      ss += v * v;
    }
    const float inv = 1.0f / std::sqrt(static_cast<float>(ss / static_cast<double>(d)) + eps);
    for (std::int64_t k = 0; k < d; ++k) {
      out(r, k) = x(r, k) * inv * gain(k);
    }
  }
  return out;
}

Tensor silu(const Tensor& x) {
  Tensor out(x.shape());
  const float* src = x.data();
  float* dst = out.data();
  for (std::int64_t i = 0; i < x.numel(); ++i) {
    const float s = 1.0f / (1.0f + std::exp(-src[i]));
    dst[i] = src[i] * s;
  }
  return out;
}

Tensor swiglu_mlp(const Tensor& x, const Tensor& w_gate, const Tensor& w_up,
                  const Tensor& w_down) {
  Tensor gate = silu(linear(x, w_gate));  // [T, d_ff]
  Tensor up = linear(x, w_up);            // [T, d_ff]
  Tensor prod = mul(gate, up);
  return linear(prod, w_down);  // [T, d_model]
}

void rope_apply_row(std::span<float> row, std::int64_t n_heads, std::int64_t position,
                    float theta_base) {
  if (n_heads <= 0) throw ConfigError("rope_apply: n_heads must be positive");
  if (row.size() % static_cast<std::size_t>(n_heads) != 0) {
    throw DimensionError("rope_apply: row width " + std::to_string(row.size()) +
                         " not divisible by n_heads " + std::to_string(n_heads));
  }
  const std::int64_t d_head = static_cast<std::int64_t>(row.size()) / n_heads;
  if (d_head % 2 != 0) {
    throw DimensionError("rope_apply: head dim " + std::to_string(d_head) + " must be even");
  }
  for (std::int64_t h = 0; h < n_heads; ++h) {
    float* head = row.data() + h * d_head;
    for (std::int64_t i = 0; i < d_head / 2; ++i) {
      const float freq =
          std::pow(theta_base, -2.0f * static_cast<float>(i) / static_cast<float>(d_head));
      const float angle = static_cast<float>(position) * freq;
      const float c = std::cos(angle);
      const float s = std::sin(angle);
      const float x0 = head[2 * i];
      const float x1 = head[2 * i + 1];
      head[2 * i] = x0 * c - x1 * s;
      head[2 * i + 1] = x0 * s + x1 * c;
    }
  }
}

Tensor rope_apply(const Tensor& x, std::int64_t n_heads, std::int64_t position, float theta_base) {
  if (x.rank() != 2) throw DimensionError("rope_apply expects rank-2 input, got " + shape_str(x.shape()));
  Tensor out = x;
  for (std::int64_t r = 0; r < out.rows(); ++r) {
    rope_apply_row(out.row(r), n_heads, position, theta_base);
  }
  return out;
}

std::int64_t kv_group_index(std::int64_t q_head, std::int64_t n_heads, std::int64_t n_kv_heads) {
  if (n_kv_heads <= 0 || n_heads <= 0 || n_heads % n_kv_heads != 0) {
    throw ConfigError("kv heads " + std::to_string(n_kv_heads) + " must divide query heads " +
                      std::to_string(n_heads));
  }
  if (q_head < 0 || q_head >= n_heads) {
    throw UsageError("query head index " + std::to_string(q_head) + " out of range");
  }
  return q_head * n_kv_heads / n_heads;
}

bool swa_allowed(std::int64_t query_pos, std::int64_t key_pos, std::int64_t window) {
  if (key_pos > query_pos) return false;
  if (window == 0) return key_pos >= 0;
  return key_pos >= std::max<std::int64_t>(0, query_pos - window + 1);
}

Tensor linear(const Tensor& x, const Tensor& w) {
  if (x.rank() != 2 || w.rank() != 2 || x.cols() != w.cols()) {
    throw DimensionError("linear shape mismatch: x " + shape_str(x.shape()) + " vs w " +
                         shape_str(w.shape()));
  }
  const std::int64_t t = x.rows();
  const std::int64_t d_in = x.cols();
  const std::int64_t d_out = w.rows();
  Tensor out({t, d_out});
  for (std::int64_t r = 0; r < t; ++r) {
    for (std::int64_t o = 0; o < d_out; ++o) {
      float acc = 0.0f;
      for (std::int64_t k = 0; k < d_in; ++k) {
        acc += x(r, k) * w(o, k);
      }
      out(r, o) = acc;
    }
  }
  return out;
}

}  // namespace ttlm
