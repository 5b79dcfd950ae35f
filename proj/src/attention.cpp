#include "ttlm/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ttlm/errors.hpp"
#include "ttlm/ops.hpp"

namespace ttlm {

namespace {

struct AttnDims {
  std::int64_t tq;
  std::int64_t tk;
  std::int64_t d_head;
};

AttnDims check_attention_args(const Tensor& q, const Tensor& k, const Tensor& v,
                              std::int64_t n_heads, std::int64_t n_kv_heads,
                              std::span<const std::int64_t> q_pos,
                              std::span<const std::int64_t> k_pos) {
  if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2) {
    throw DimensionError("attention expects rank-2 q/k/v");
  }
  if (n_heads <= 0 || n_kv_heads <= 0 || n_heads % n_kv_heads != 0) {
    throw ConfigError("attention: kv heads " + std::to_string(n_kv_heads) +
                      " must divide query heads " + std::to_string(n_heads));
  }
  if (q.cols() % n_heads != 0) {
    throw DimensionError("attention: q width " + std::to_string(q.cols()) +
                         " not divisible by n_heads " + std::to_string(n_heads));
  }
  const std::int64_t d_head = q.cols() / n_heads;
  if (k.cols() != n_kv_heads * d_head || v.cols() != n_kv_heads * d_head) {
    throw DimensionError("attention: k/v width " + std::to_string(k.cols()) +
                         " does not match kv heads * head dim " +
                         std::to_string(n_kv_heads * d_head));
  }
  if (k.rows() != v.rows()) throw DimensionError("attention: k/v row counts differ");
  if (static_cast<std::int64_t>(q_pos.size()) != q.rows() ||
      static_cast<std::int64_t>(k_pos.size()) != k.rows()) {
    throw DimensionError("attention: position spans do not match q/k rows");
  }
  return {q.rows(), k.rows(), d_head};
}

}  // namespace

Tensor attention_ref(const Tensor& q, const Tensor& k, const Tensor& v, std::int64_t n_heads,
                     std::int64_t n_kv_heads, std::span<const std::int64_t> q_pos,
                     std::span<const std::int64_t> k_pos, std::int64_t window) {
  const AttnDims dims = check_attention_args(q, k, v, n_heads, n_kv_heads, q_pos, k_pos);
  const float scale = 1.0f / std::sqrt(static_cast<float>(dims.d_head));
  Tensor out({dims.tq, n_heads * dims.d_head});

  std::vector<std::int64_t> visible;
  std::vector<float> scores;
  for (std::int64_t i = 0; i < dims.tq; ++i) {
    for (std::int64_t h = 0; h < n_heads; ++h) {
      const std::int64_t g = kv_group_index(h, n_heads, n_kv_heads);
      const float* qh = q.data() + i * q.cols() + h * dims.d_head;

      visible.clear();
      scores.clear();
      float max_score = -std::numeric_limits<float>::infinity();
      for (std::int64_t j = 0; j < dims.tk; ++j) {
        if (!swa_allowed(q_pos[i], k_pos[j], window)) continue;
        const float* kj = k.data() + j * k.cols() + g * dims.d_head;
        float s = 0.0f;
        for (std::int64_t c = 0; c < dims.d_head; ++c) s += qh[c] * kj[c];
        s *= scale;
        visible.push_back(j);
        scores.push_back(s);
        if (s > max_score) max_score = s;
      }
      if (visible.empty()) continue;  // row stays zero

      float denom = 0.0f;
      for (float& s : scores) {
        s = std::exp(s - max_score);
        denom += s;
      }
      float* oh = out.data() + i * out.cols() + h * dims.d_head;
      for (std::size_t idx = 0; idx < visible.size(); ++idx) {
        const float p = scores[idx] / denom;
        const float* vj = v.data() + visible[idx] * v.cols() + g * dims.d_head;
        for (std::int64_t c = 0; c < dims.d_head; ++c) oh[c] += p * vj[c];
      }
    }
  }
  return out;
}

Tensor attention_online(const Tensor& q, const Tensor& k, const Tensor& v, std::int64_t n_heads,
                        std::int64_t n_kv_heads, std::span<const std::int64_t> q_pos,
                        std::span<const std::int64_t> k_pos, std::int64_t window) {
  const AttnDims dims = check_attention_args(q, k, v, n_heads, n_kv_heads, q_pos, k_pos);
  const float scale = 1.0f / std::sqrt(static_cast<float>(dims.d_head));
  Tensor out({dims.tq, n_heads * dims.d_head});

  std::vector<float> acc(static_cast<std::size_t>(dims.d_head));
  for (std::int64_t i = 0; i < dims.tq; ++i) {
    for (std::int64_t h = 0; h < n_heads; ++h) {
      const std::int64_t g = kv_group_index(h, n_heads, n_kv_heads);
      const float* qh = q.data() + i * q.cols() + h * dims.d_head;

      float m = -std::numeric_limits<float>::infinity();
      float l = 0.0f;
      std::fill(acc.begin(), acc.end(), 0.0f);
      bool any = false;
      for (std::int64_t j = 0; j < dims.tk; ++j) {
        if (!swa_allowed(q_pos[i], k_pos[j], window)) continue;
        const float* kj = k.data() + j * k.cols() + g * dims.d_head;
        float s = 0.0f;
        for (std::int64_t c = 0; c < dims.d_head; ++c) s += qh[c] * kj[c];
        s *= scale;

        if (!any) {
          m = s;
          l = 1.0f;
          const float* vj = v.data() + j * v.cols() + g * dims.d_head;
          for (std::int64_t c = 0; c < dims.d_head; ++c) acc[static_cast<std::size_t>(c)] = vj[c];
          any = true;
          continue;
        }
        const float m_new = s > m ? s : m;
        const float rescale = std::exp(m - m_new);
        const float p = std::exp(s - m_new);
        l = l * rescale + p;
        const float* vj = v.data() + j * v.cols() + g * dims.d_head;
        for (std::int64_t c = 0; c < dims.d_head; ++c) {
          acc[static_cast<std::size_t>(c)] =
              acc[static_cast<std::size_t>(c)] * rescale + p * vj[c];
        }
        m = m_new;
      }
      if (!any) continue;

      float* oh = out.data() + i * out.cols() + h * dims.d_head;
      const float inv_l = 1.0f / l;
      for (std::int64_t c = 0; c < dims.d_head; ++c) oh[c] = acc[static_cast<std::size_t>(c)] * inv_l;
    }
  }
  return out;
}

}  // namespace ttlm
