#include "ttlm/selfcheck.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <sstream>
#include <vector>

#include "ttlm/attention.hpp"
#include "ttlm/dataset.hpp"
#include "ttlm/decode.hpp"
#include "ttlm/errors.hpp"
#include "ttlm/evaluate.hpp"
#include "ttlm/lora.hpp"
#include "ttlm/metrics.hpp"
#include "ttlm/model.hpp"
#include "ttlm/ops.hpp"
#include "ttlm/prompts.hpp"
#include "ttlm/report.hpp"
#include "ttlm/serialize.hpp"
#include "ttlm/tokenizer.hpp"
#include "ttlm/train.hpp"

#ifndef TTLM_DATA_DIR
#define TTLM_DATA_DIR "data"
#endif

namespace ttlm::check {

namespace {

// ---------------------------------------------------------------------------
// small utilities
// ---------------------------------------------------------------------------

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::int64_t i = 0; i < a.numel(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(a(i)) - static_cast<double>(b(i))));
  }
  return worst;
}

bool bit_identical(std::span<const float> a, std::span<const float> b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

std::vector<std::int64_t> random_ids(SeededRng& rng, std::int64_t n, std::int64_t vocab) {
  std::vector<std::int64_t> ids(static_cast<std::size_t>(n));
  for (auto& id : ids) {
    id = kByteOffset + static_cast<std::int64_t>(rng.next_u64() %
                                                 static_cast<std::uint64_t>(vocab - kByteOffset));
  }
  return ids;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

CheckResult pass(const std::string& name, const std::string& detail) {
  return {name, true, detail};
}
CheckResult fail(const std::string& name, const std::string& detail) {
  return {name, false, detail};
}

// ---------------------------------------------------------------------------
// Independent reference forward: plain per-position scalar code with
// materialised score rows. Handles the two kv-sharing endpoints only
// (per-head keys, or one key set shared by every head) so it cannot borrow
// the engine's general grouping rule.
// ---------------------------------------------------------------------------

void ref_rotate_row(float* row, std::int64_t n_heads, std::int64_t d_head, std::int64_t pos,
                    float base) {
  for (std::int64_t h = 0; h < n_heads; ++h) {
    for (std::int64_t i = 0; i < d_head / 2; ++i) {
      const float freq =
          std::pow(base, -2.0f * static_cast<float>(i) / static_cast<float>(d_head));
      const float a = static_cast<float>(pos) * freq;
      const float c = std::cos(a), s = std::sin(a);
      float& x0 = row[h * d_head + 2 * i];
      float& x1 = row[h * d_head + 2 * i + 1];
      const float r0 = x0 * c - x1 * s;
      const float r1 = x0 * s + x1 * c;
      x0 = r0;
      x1 = r1;
    }
  }
}

std::vector<float> ref_norm_row(const float* x, const Tensor& gain, std::int64_t d, float eps) {
  double ss = 0.0;
  for (std::int64_t k = 0; k < d; ++k) ss += static_cast<double>(x[k]) * x[k];
  const float inv = 1.0f / std::sqrt(static_cast<float>(ss / static_cast<double>(d)) + eps);
  std::vector<float> out(static_cast<std::size_t>(d));
  for (std::int64_t k = 0; k < d; ++k) out[static_cast<std::size_t>(k)] = x[k] * inv * gain(k);
  return out;
}

std::vector<float> ref_matvec(const Tensor& w, const std::vector<float>& x) {
  std::vector<float> y(static_cast<std::size_t>(w.dim(0)), 0.0f);
  for (std::int64_t o = 0; o < w.dim(0); ++o) {
    float acc = 0.0f;
    for (std::int64_t k = 0; k < w.dim(1); ++k) acc += w(o, k) * x[static_cast<std::size_t>(k)];
    y[static_cast<std::size_t>(o)] = acc;
  }
  return y;
}

// shared_kv: every head reads key/value set 0 (the one-group endpoint);
// otherwise head h reads key/value set h (the per-head endpoint).
Tensor reference_logits(const Model& m, std::span<const std::int64_t> ids, bool shared_kv) {
  const ModelConfig& cfg = m.config;
  const std::int64_t t_len = static_cast<std::int64_t>(ids.size());
  const std::int64_t dh = cfg.d_head();

  std::vector<std::vector<float>> x(static_cast<std::size_t>(t_len));
  for (std::int64_t i = 0; i < t_len; ++i) {
    const float* e = m.token_embedding.data() + ids[static_cast<std::size_t>(i)] * cfg.d_model;
    x[static_cast<std::size_t>(i)].assign(e, e + cfg.d_model);
  }

  for (std::int64_t li = 0; li < cfg.n_layers; ++li) {
    const LayerWeights& l = m.layers[static_cast<std::size_t>(li)];
    std::vector<std::vector<float>> n1(static_cast<std::size_t>(t_len));
    std::vector<std::vector<float>> q(static_cast<std::size_t>(t_len));
    std::vector<std::vector<float>> k(static_cast<std::size_t>(t_len));
    std::vector<std::vector<float>> v(static_cast<std::size_t>(t_len));
    for (std::int64_t i = 0; i < t_len; ++i) {
      auto& xi = x[static_cast<std::size_t>(i)];
      n1[static_cast<std::size_t>(i)] = ref_norm_row(xi.data(), l.attn_norm_gain, cfg.d_model,
                                                     cfg.norm_eps);
      q[static_cast<std::size_t>(i)] = ref_matvec(l.wq, n1[static_cast<std::size_t>(i)]);
      k[static_cast<std::size_t>(i)] = ref_matvec(l.wk, n1[static_cast<std::size_t>(i)]);
      v[static_cast<std::size_t>(i)] = ref_matvec(l.wv, n1[static_cast<std::size_t>(i)]);
      ref_rotate_row(q[static_cast<std::size_t>(i)].data(), cfg.n_heads, dh, i, cfg.rope_base);
      ref_rotate_row(k[static_cast<std::size_t>(i)].data(), shared_kv ? 1 : cfg.n_heads, dh, i,
                     cfg.rope_base);
    }

    for (std::int64_t i = 0; i < t_len; ++i) {
      std::vector<float> mixed(static_cast<std::size_t>(cfg.n_heads * dh), 0.0f);
      for (std::int64_t h = 0; h < cfg.n_heads; ++h) {
        const std::int64_t kv = shared_kv ? 0 : h;
        const float* qh = q[static_cast<std::size_t>(i)].data() + h * dh;
        std::vector<float> scores(static_cast<std::size_t>(i + 1));
        float mx = -std::numeric_limits<float>::infinity();
        for (std::int64_t j = 0; j <= i; ++j) {
          if (cfg.window > 0 && j < i - cfg.window + 1) {
            scores[static_cast<std::size_t>(j)] = -std::numeric_limits<float>::infinity();
            continue;
          }
          const float* kj = k[static_cast<std::size_t>(j)].data() + kv * dh;
          float s = 0.0f;
          for (std::int64_t c = 0; c < dh; ++c) s += qh[c] * kj[c];
          s /= std::sqrt(static_cast<float>(dh));
          scores[static_cast<std::size_t>(j)] = s;
          mx = std::max(mx, s);
        }
        float denom = 0.0f;
        for (std::int64_t j = 0; j <= i; ++j) {
          float& s = scores[static_cast<std::size_t>(j)];
          if (s == -std::numeric_limits<float>::infinity()) {
            s = 0.0f;
            continue;
          }
          s = std::exp(s - mx);
          denom += s;
        }
        for (std::int64_t j = 0; j <= i; ++j) {
          const float p = scores[static_cast<std::size_t>(j)] / denom;
          if (p == 0.0f) continue;
          const float* vj = v[static_cast<std::size_t>(j)].data() + kv * dh;
          for (std::int64_t c = 0; c < dh; ++c) mixed[static_cast<std::size_t>(h * dh + c)] += p * vj[c];
        }
      }
      const std::vector<float> attn_out = ref_matvec(l.wo, mixed);

      auto& xi = x[static_cast<std::size_t>(i)];
      if (cfg.block_style == BlockStyle::kParallel) {
        const std::vector<float>& n = n1[static_cast<std::size_t>(i)];
        const std::vector<float> gate = ref_matvec(l.w_gate, n);
        const std::vector<float> up = ref_matvec(l.w_up, n);
        std::vector<float> prod(gate.size());
        for (std::size_t f = 0; f < gate.size(); ++f) {
          const float sig = 1.0f / (1.0f + std::exp(-gate[f]));
          prod[f] = gate[f] * sig * up[f];
        }
        const std::vector<float> down = ref_matvec(l.w_down, prod);
        for (std::int64_t c = 0; c < cfg.d_model; ++c) {
          xi[static_cast<std::size_t>(c)] += attn_out[static_cast<std::size_t>(c)] +
                                             down[static_cast<std::size_t>(c)];
        }
      } else {
        std::vector<float> h_row(xi.size());
        for (std::size_t c = 0; c < xi.size(); ++c) h_row[c] = xi[c] + attn_out[c];
        const std::vector<float> n2 = ref_norm_row(h_row.data(), l.mlp_norm_gain, cfg.d_model,
                                                   cfg.norm_eps);
        const std::vector<float> gate = ref_matvec(l.w_gate, n2);
        const std::vector<float> up = ref_matvec(l.w_up, n2);
        std::vector<float> prod(gate.size());
        for (std::size_t f = 0; f < gate.size(); ++f) {
          const float sig = 1.0f / (1.0f + std::exp(-gate[f]));
          prod[f] = gate[f] * sig * up[f];
        }
        const std::vector<float> down = ref_matvec(l.w_down, prod);
        for (std::size_t c = 0; c < xi.size(); ++c) xi[c] = h_row[c] + down[c];
      }
    }
  }

  Tensor logits({t_len, cfg.vocab_size});
  for (std::int64_t i = 0; i < t_len; ++i) {
    const std::vector<float> hidden = ref_norm_row(x[static_cast<std::size_t>(i)].data(),
                                                   m.final_norm_gain, cfg.d_model, cfg.norm_eps);
    const std::vector<float> row = ref_matvec(m.output_proj, hidden);
    std::memcpy(logits.data() + i * cfg.vocab_size, row.data(), sizeof(float) * row.size());
  }
  return logits;
}

// ---------------------------------------------------------------------------
// Double-precision replica of the adapted forward + masked loss, used as the
// finite-difference oracle. Everything below runs in float64 on copies of
// the float32 weights.
// ---------------------------------------------------------------------------

using DMat = std::vector<std::vector<double>>;

DMat to_dmat(const Tensor& t) {
  DMat m(static_cast<std::size_t>(t.rows()),
         std::vector<double>(static_cast<std::size_t>(t.cols())));
  for (std::int64_t r = 0; r < t.rows(); ++r) {
    for (std::int64_t c = 0; c < t.cols(); ++c) {
      m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = t(r, c);
    }
  }
  return m;
}

std::vector<double> to_dvec(const Tensor& t) {
  std::vector<double> v(static_cast<std::size_t>(t.numel()));
  for (std::int64_t i = 0; i < t.numel(); ++i) v[static_cast<std::size_t>(i)] = t(i);
  return v;
}

// y = x W^T (+ s (x A^T) B^T when an adapter is present)
DMat d_project(const DMat& x, const DMat& w, const DMat* a, const DMat* b, double s) {
  const std::size_t t_len = x.size();
  const std::size_t d_out = w.size();
  DMat y(t_len, std::vector<double>(d_out, 0.0));
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t o = 0; o < d_out; ++o) {
      double acc = 0.0;
      for (std::size_t k = 0; k < w[o].size(); ++k) acc += x[t][k] * w[o][k];
      y[t][o] = acc;
    }
  }
  if (a != nullptr && b != nullptr) {
    const std::size_t rank = a->size();
    for (std::size_t t = 0; t < t_len; ++t) {
      std::vector<double> u(rank, 0.0);
      for (std::size_t ri = 0; ri < rank; ++ri) {
        double acc = 0.0;
        for (std::size_t k = 0; k < (*a)[ri].size(); ++k) acc += x[t][k] * (*a)[ri][k];
        u[ri] = acc;
      }
      for (std::size_t o = 0; o < d_out; ++o) {
        double acc = 0.0;
        for (std::size_t ri = 0; ri < rank; ++ri) acc += u[ri] * (*b)[o][ri];
        y[t][o] += s * acc;
      }
    }
  }
  return y;
}

std::vector<double> d_norm_row(const std::vector<double>& x, const std::vector<double>& gain,
                               double eps) {
  double ss = 0.0;
  for (double v : x) ss += v * v;
  const double inv = 1.0 / std::sqrt(ss / static_cast<double>(x.size()) + eps);
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] * inv * gain[k];
  return out;
}

void d_rotate(std::vector<double>& row, std::int64_t n_heads, std::int64_t pos, double base) {
  const std::int64_t dh = static_cast<std::int64_t>(row.size()) / n_heads;
  for (std::int64_t h = 0; h < n_heads; ++h) {
    for (std::int64_t i = 0; i < dh / 2; ++i) {
      const double freq = std::pow(base, -2.0 * static_cast<double>(i) / static_cast<double>(dh));
      const double a = static_cast<double>(pos) * freq;
      const double c = std::cos(a), s = std::sin(a);
      double& x0 = row[static_cast<std::size_t>(h * dh + 2 * i)];
      double& x1 = row[static_cast<std::size_t>(h * dh + 2 * i + 1)];
      const double r0 = x0 * c - x1 * s;
      const double r1 = x0 * s + x1 * c;
      x0 = r0;
      x1 = r1;
    }
  }
}

struct ReplicaAdapters {
  // aligned with set.adapters; doubles so elements can be nudged
  std::vector<DMat> a;
  std::vector<DMat> b;
};

ReplicaAdapters replica_adapters(const LoraSet& set) {
  ReplicaAdapters r;
  for (const LoraAdapter& ad : set.adapters) {
    r.a.push_back(to_dmat(ad.a));
    r.b.push_back(to_dmat(ad.b));
  }
  return r;
}

double replica_loss(const Model& m, const LoraSet& set, const ReplicaAdapters& ra,
                    std::span<const TokenizedExample> batch) {
  const ModelConfig& cfg = m.config;
  const double s = set.scaling();

  // weights to double once per call
  const DMat emb = to_dmat(m.token_embedding);
  const DMat out_proj = to_dmat(m.output_proj);
  const std::vector<double> final_gain = to_dvec(m.final_norm_gain);
  struct DLayer {
    DMat wq, wk, wv, wo, w_gate, w_up, w_down;
    std::vector<double> g1, g2;
  };
  std::vector<DLayer> layers;
  for (const LayerWeights& l : m.layers) {
    DLayer dl{to_dmat(l.wq),     to_dmat(l.wk),   to_dmat(l.wv),    to_dmat(l.wo),
              to_dmat(l.w_gate), to_dmat(l.w_up), to_dmat(l.w_down), to_dvec(l.attn_norm_gain),
              {}};
    if (cfg.block_style != BlockStyle::kParallel) dl.g2 = to_dvec(l.mlp_norm_gain);
    layers.push_back(std::move(dl));
  }

  auto adapter_for = [&](const std::string& name, const DMat** a, const DMat** b) {
    *a = nullptr;
    *b = nullptr;
    for (std::size_t i = 0; i < set.adapters.size(); ++i) {
      if (set.adapters[i].target == name) {
        *a = &ra.a[i];
        *b = &ra.b[i];
        return;
      }
    }
  };

  double loss_sum = 0.0;
  std::int64_t mask_total = 0;
  for (const TokenizedExample& ex : batch) {
    const std::int64_t t_len = static_cast<std::int64_t>(ex.ids.size());
    DMat x(static_cast<std::size_t>(t_len));
    for (std::int64_t i = 0; i < t_len; ++i) {
      x[static_cast<std::size_t>(i)] = emb[static_cast<std::size_t>(ex.ids[static_cast<std::size_t>(i)])];
    }

    for (std::int64_t li = 0; li < cfg.n_layers; ++li) {
      const DLayer& dl = layers[static_cast<std::size_t>(li)];
      const std::string prefix = "layers." + std::to_string(li) + ".";
      DMat n1(static_cast<std::size_t>(t_len));
      for (std::int64_t i = 0; i < t_len; ++i) {
        n1[static_cast<std::size_t>(i)] = d_norm_row(x[static_cast<std::size_t>(i)], dl.g1,
                                                     cfg.norm_eps);
      }
      const DMat* a;
      const DMat* b;
      adapter_for(prefix + "wq", &a, &b);
      DMat q = d_project(n1, dl.wq, a, b, s);
      adapter_for(prefix + "wk", &a, &b);
      DMat k = d_project(n1, dl.wk, a, b, s);
      adapter_for(prefix + "wv", &a, &b);
      DMat v = d_project(n1, dl.wv, a, b, s);
      for (std::int64_t i = 0; i < t_len; ++i) {
        d_rotate(q[static_cast<std::size_t>(i)], cfg.n_heads, i, cfg.rope_base);
        d_rotate(k[static_cast<std::size_t>(i)], cfg.n_kv_heads, i, cfg.rope_base);
      }

      const std::int64_t dh = cfg.d_head();
      DMat mixed(static_cast<std::size_t>(t_len),
                 std::vector<double>(static_cast<std::size_t>(cfg.n_heads * dh), 0.0));
      for (std::int64_t h = 0; h < cfg.n_heads; ++h) {
        const std::int64_t g = h * cfg.n_kv_heads / cfg.n_heads;
        for (std::int64_t i = 0; i < t_len; ++i) {
          std::vector<double> scores;
          std::vector<std::int64_t> js;
          double mx = -std::numeric_limits<double>::infinity();
          for (std::int64_t j = 0; j <= i; ++j) {
            if (cfg.window > 0 && j < i - cfg.window + 1) continue;
            double sc = 0.0;
            for (std::int64_t c = 0; c < dh; ++c) {
              sc += q[static_cast<std::size_t>(i)][static_cast<std::size_t>(h * dh + c)] *
                    k[static_cast<std::size_t>(j)][static_cast<std::size_t>(g * dh + c)];
            }
            sc /= std::sqrt(static_cast<double>(dh));
            scores.push_back(sc);
            js.push_back(j);
            mx = std::max(mx, sc);
          }
          double denom = 0.0;
          for (double& sc : scores) {
            sc = std::exp(sc - mx);
            denom += sc;
          }
          for (std::size_t idx = 0; idx < js.size(); ++idx) {
            const double p = scores[idx] / denom;
            for (std::int64_t c = 0; c < dh; ++c) {
              mixed[static_cast<std::size_t>(i)][static_cast<std::size_t>(h * dh + c)] +=
                  p * v[static_cast<std::size_t>(js[idx])][static_cast<std::size_t>(g * dh + c)];
            }
          }
        }
      }
      adapter_for(prefix + "wo", &a, &b);
      const DMat attn_out = d_project(mixed, dl.wo, a, b, s);

      if (cfg.block_style == BlockStyle::kParallel) {
        const DMat gate = d_project(n1, dl.w_gate, nullptr, nullptr, 0.0);
        const DMat up = d_project(n1, dl.w_up, nullptr, nullptr, 0.0);
        DMat prod = gate;
        for (std::size_t i = 0; i < prod.size(); ++i) {
          for (std::size_t f = 0; f < prod[i].size(); ++f) {
            const double sig = 1.0 / (1.0 + std::exp(-gate[i][f]));
            prod[i][f] = gate[i][f] * sig * up[i][f];
          }
        }
        const DMat down = d_project(prod, dl.w_down, nullptr, nullptr, 0.0);
        for (std::size_t i = 0; i < x.size(); ++i) {
          for (std::size_t c = 0; c < x[i].size(); ++c) x[i][c] += attn_out[i][c] + down[i][c];
        }
      } else {
        DMat h_rows = x;
        for (std::size_t i = 0; i < x.size(); ++i) {
          for (std::size_t c = 0; c < x[i].size(); ++c) h_rows[i][c] = x[i][c] + attn_out[i][c];
        }
        DMat n2(h_rows.size());
        for (std::size_t i = 0; i < h_rows.size(); ++i) {
          n2[i] = d_norm_row(h_rows[i], dl.g2, cfg.norm_eps);
        }
        const DMat gate = d_project(n2, dl.w_gate, nullptr, nullptr, 0.0);
        const DMat up = d_project(n2, dl.w_up, nullptr, nullptr, 0.0);
        DMat prod = gate;
        for (std::size_t i = 0; i < prod.size(); ++i) {
          for (std::size_t f = 0; f < prod[i].size(); ++f) {
            const double sig = 1.0 / (1.0 + std::exp(-gate[i][f]));
            prod[i][f] = gate[i][f] * sig * up[i][f];
          }
        }
        const DMat down = d_project(prod, dl.w_down, nullptr, nullptr, 0.0);
        for (std::size_t i = 0; i < x.size(); ++i) {
          for (std::size_t c = 0; c < x[i].size(); ++c) x[i][c] = h_rows[i][c] + down[i][c];
        }
      }
    }

    for (std::int64_t i = 0; i + 1 < t_len; ++i) {
      if (!ex.target_mask[static_cast<std::size_t>(i)]) continue;
      const std::vector<double> hidden = d_norm_row(x[static_cast<std::size_t>(i)], final_gain,
                                                    cfg.norm_eps);
      std::vector<double> logits(static_cast<std::size_t>(cfg.vocab_size), 0.0);
      for (std::int64_t o = 0; o < cfg.vocab_size; ++o) {
        double acc = 0.0;
        for (std::size_t c = 0; c < hidden.size(); ++c) acc += hidden[c] * out_proj[static_cast<std::size_t>(o)][c];
        logits[static_cast<std::size_t>(o)] = acc;
      }
      double mx = logits[0];
      for (double lv : logits) mx = std::max(mx, lv);
      double sum = 0.0;
      for (double lv : logits) sum += std::exp(lv - mx);
      const std::int64_t target = ex.ids[static_cast<std::size_t>(i + 1)];
      loss_sum += std::log(sum) + mx - logits[static_cast<std::size_t>(target)];
      ++mask_total;
    }
  }
  return loss_sum / static_cast<double>(mask_total);
}

// ---------------------------------------------------------------------------
// individual checks
// ---------------------------------------------------------------------------

ModelConfig small_config(std::int64_t n_kv_heads, std::int64_t window, BlockStyle style,
                         std::uint64_t seed) {
  ModelConfig cfg;
  cfg.d_model = 32;
  cfg.n_layers = 2;
  cfg.n_heads = 4;
  cfg.n_kv_heads = n_kv_heads;
  cfg.d_ff = 48;
  cfg.vocab_size = 64;
  cfg.window = window;
  cfg.block_style = style;
  cfg.seed = seed;
  return cfg;
}

CheckResult check_gqa_endpoints(const std::string&) {
  SeededRng rng(101);
  double worst_mha = 0.0, worst_mqa = 0.0;
  {
    const Model m = init_model(small_config(4, 0, BlockStyle::kSequential, 2024));
    const auto ids = random_ids(rng, 12, m.config.vocab_size);
    DecodeSession session(m);
    const Tensor engine = session.forward(ids).logits;
    const Tensor ref = reference_logits(m, ids, /*shared_kv=*/false);
    worst_mha = max_abs_diff(engine, ref);
  }
  {
    const Model m = init_model(small_config(1, 0, BlockStyle::kParallel, 2025));
    const auto ids = random_ids(rng, 12, m.config.vocab_size);
    DecodeSession session(m);
    const Tensor engine = session.forward(ids).logits;
    const Tensor ref = reference_logits(m, ids, /*shared_kv=*/true);
    worst_mqa = max_abs_diff(engine, ref);
  }
  const bool ok = worst_mha <= 1e-6 && worst_mqa <= 1e-6;
  return {.name = "gqa-endpoints",
          .passed = ok,
          .detail = "per-head-kv diff " + fmt(worst_mha) + ", shared-kv diff " + fmt(worst_mqa) +
                    " (tol 1e-6)"};
}

CheckResult check_window_degeneracy(const std::string&) {
  ModelConfig with_window = small_config(2, 16, BlockStyle::kSequential, 31);
  ModelConfig no_window = with_window;
  no_window.window = 0;
  const Model a = init_model(with_window);
  const Model b = init_model(no_window);
  SeededRng rng(7);
  const auto ids = random_ids(rng, 16, a.config.vocab_size);
  DecodeSession sa(a), sb(b);
  const double diff = max_abs_diff(sa.forward(ids).logits, sb.forward(ids).logits);
  return {.name = "window-degeneracy",
          .passed = diff <= 1e-6,
          .detail = "window=16 vs full causal on 16 tokens, logits diff " + fmt(diff) +
                    " (tol 1e-6)"};
}

CheckResult check_rolling_cache(const std::string&) {
  const Model m = init_model(small_config(2, 8, BlockStyle::kSequential, 77));
  SeededRng rng(13);
  const auto prompt = random_ids(rng, 5, m.config.vocab_size);
  GenerateOptions opts;
  opts.max_new = 29;
  opts.stop_at_eos = false;
  opts.session.rolling = true;
  const GenerateResult ring = greedy_decode(m, prompt, opts);
  opts.session.rolling = false;
  const GenerateResult masked = greedy_decode(m, prompt, opts);
  const bool tokens_equal = ring.tokens == masked.tokens;
  const double diff = max_abs_diff(ring.step_logits, masked.step_logits);
  return {.name = "rolling-cache",
          .passed = tokens_equal && diff <= 1e-5,
          .detail = std::string("29 decoded tokens ") + (tokens_equal ? "match" : "DIVERGE") +
                    ", step-logits diff " + fmt(diff) + " (tol 1e-5)"};
}

CheckResult check_receptive_field(const std::string&) {
  int far_clean = 0, near_changed = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    ModelConfig cfg;
    cfg.d_model = 16;
    cfg.n_layers = 3;
    cfg.n_heads = 2;
    cfg.n_kv_heads = 2;
    cfg.d_ff = 24;
    cfg.vocab_size = 64;
    cfg.window = 2;
    cfg.seed = 500 + static_cast<std::uint64_t>(s);
    const Model m = init_model(cfg);
    SeededRng rng(900 + static_cast<std::uint64_t>(s));
    auto ids = random_ids(rng, 10, cfg.vocab_size);
    const std::int64_t probe = 9;

    auto hidden_at_probe = [&](const std::vector<std::int64_t>& seq) {
      DecodeSession session(m);
      const Tensor hidden = session.forward(seq).hidden;
      std::vector<float> row(hidden.row(probe).begin(), hidden.row(probe).end());
      return row;
    };
    const std::vector<float> base = hidden_at_probe(ids);

    auto flip = [&](std::size_t pos) {
      auto seq = ids;
      seq[pos] = kByteOffset + (seq[pos] - kByteOffset + 1) %
                                   (cfg.vocab_size - kByteOffset);
      return seq;
    };
    // three layers of window 2 reach back 3 positions; probe-6 is far outside
    const std::vector<float> far = hidden_at_probe(flip(static_cast<std::size_t>(probe - 6)));
    const std::vector<float> near = hidden_at_probe(flip(static_cast<std::size_t>(probe - 1)));
    if (bit_identical(base, far)) ++far_clean;
    if (!bit_identical(base, near)) ++near_changed;
  }
  const bool ok = far_clean == seeds && near_changed == seeds;
  return {.name = "receptive-field",
          .passed = ok,
          .detail = "far perturbation bit-identical " + std::to_string(far_clean) + "/20, "
                    "adjacent perturbation changed " + std::to_string(near_changed) + "/20"};
}

CheckResult check_online_softmax(const std::string&) {
  SeededRng rng(424242);
  double worst = 0.0;
  const std::int64_t head_options[] = {1, 2, 4, 8};
  const std::int64_t dh_options[] = {2, 4, 8, 16};
  for (int iter = 0; iter < 100; ++iter) {
    const std::int64_t n_heads = head_options[rng.next_u64() % 4];
    std::int64_t n_kv = n_heads;
    while (n_kv > 1 && (rng.next_u64() & 1)) n_kv /= 2;
    const std::int64_t dh = dh_options[rng.next_u64() % 4];
    const std::int64_t t_len = 1 + static_cast<std::int64_t>(rng.next_u64() % 24);
    const std::int64_t window = (rng.next_u64() & 1) ? 0 : 1 + static_cast<std::int64_t>(rng.next_u64() % 8);

    Tensor q = gaussian_fill(rng, {t_len, n_heads * dh}, 0.0f, 1.0f);
    Tensor k = gaussian_fill(rng, {t_len, n_kv * dh}, 0.0f, 1.0f);
    Tensor v = gaussian_fill(rng, {t_len, n_kv * dh}, 0.0f, 1.0f);
    if (iter == 0 && t_len >= 2) {
      // force a ~1e4 score gap between two visible keys
      for (std::int64_t c = 0; c < q.cols(); ++c) q(t_len - 1, c) = 36.0f;
      for (std::int64_t c = 0; c < k.cols(); ++c) {
        k(0, c) = 36.0f;
        k(t_len - 1, c) = -36.0f;
      }
    }
    std::vector<std::int64_t> pos(static_cast<std::size_t>(t_len));
    for (std::int64_t i = 0; i < t_len; ++i) pos[static_cast<std::size_t>(i)] = i;

    const Tensor ref = attention_ref(q, k, v, n_heads, n_kv, pos, pos, iter == 0 ? 0 : window);
    const Tensor online = attention_online(q, k, v, n_heads, n_kv, pos, pos, iter == 0 ? 0 : window);
    worst = std::max(worst, max_abs_diff(ref, online));
  }
  return {.name = "online-softmax",
          .passed = worst <= 1e-5,
          .detail = "100 random shapes incl. 1e4 score gap, max diff " + fmt(worst) +
                    " (tol 1e-5)"};
}

CheckResult check_chunked_prefill(const std::string&) {
  const Model m = init_model(small_config(2, 8, BlockStyle::kSequential, 55));
  SeededRng rng(99);
  const auto prompt = random_ids(rng, 20, m.config.vocab_size);  // 2.5x the window

  DecodeSession chunked(m);
  Tensor last_chunk_logits;
  std::size_t offset = 0;
  for (const std::int64_t size : chunk_sizes(20, m.config.window)) {
    last_chunk_logits = chunked
                            .forward(std::span<const std::int64_t>(prompt).subspan(
                                offset, static_cast<std::size_t>(size)))
                            .logits;
    offset += static_cast<std::size_t>(size);
  }
  DecodeSession whole(m);
  const Tensor full_logits = whole.forward(prompt).logits;

  // final-position logits
  double logit_diff = 0.0;
  {
    auto a = last_chunk_logits.row(last_chunk_logits.rows() - 1);
    auto b = full_logits.row(full_logits.rows() - 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
      logit_diff = std::max(logit_diff, std::abs(static_cast<double>(a[i]) - b[i]));
    }
  }
  // cache contents, layer by layer
  double cache_diff = 0.0;
  bool positions_equal = true;
  for (std::int64_t layer = 0; layer < m.config.n_layers; ++layer) {
    const auto a = chunked.cache().gather(layer);
    const auto b = whole.cache().gather(layer);
    positions_equal = positions_equal && a.positions == b.positions;
    cache_diff = std::max(cache_diff, max_abs_diff(a.k, b.k));
    cache_diff = std::max(cache_diff, max_abs_diff(a.v, b.v));
  }
  const bool ok = logit_diff <= 1e-6 && cache_diff <= 1e-6 && positions_equal;
  return {.name = "chunked-prefill",
          .passed = ok,
          .detail = "window-sized chunks vs one pass: final logits diff " + fmt(logit_diff) +
                    ", cache diff " + fmt(cache_diff) + (positions_equal ? "" : ", POSITIONS DIFFER") +
                    " (tol 1e-6)"};
}

CheckResult check_rope_relativity(const std::string&) {
  SeededRng rng(31415);
  const std::int64_t dh_options[] = {4, 8, 16};
  double worst_dot = 0.0, worst_norm = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    const std::int64_t dh = dh_options[rng.next_u64() % 3];
    const std::int64_t mpos = static_cast<std::int64_t>(rng.next_u64() % 256);
    const std::int64_t npos = static_cast<std::int64_t>(rng.next_u64() % 256);
    const std::int64_t shift = 1 + static_cast<std::int64_t>(rng.next_u64() % 128);
    const float inv_sqrt = 1.0f / std::sqrt(static_cast<float>(dh));
    Tensor q = gaussian_fill(rng, {1, dh}, 0.0f, inv_sqrt);
    Tensor k = gaussian_fill(rng, {1, dh}, 0.0f, inv_sqrt);

    auto rotated = [&](const Tensor& t, std::int64_t pos) {
      Tensor copy = t;
      rope_apply_row(copy.row(0), 1, pos, 10000.0f);
      return copy;
    };
    auto dot = [&](const Tensor& a, const Tensor& b) {
      double acc = 0.0;
      for (std::int64_t i = 0; i < dh; ++i) acc += static_cast<double>(a(0, i)) * b(0, i);
      return acc;
    };
    const double d1 = dot(rotated(q, mpos), rotated(k, npos));
    const double d2 = dot(rotated(q, mpos + shift), rotated(k, npos + shift));
    worst_dot = std::max(worst_dot, std::abs(d1 - d2));

    const Tensor qr = rotated(q, mpos);
    const double n0 = std::sqrt(dot(q, q));
    const double n1 = std::sqrt(dot(qr, qr));
    worst_norm = std::max(worst_norm, std::abs(n1 - n0) / std::max(n0, 1e-30));
  }
  const bool ok = worst_dot <= 1e-5 && worst_norm <= 1e-6;
  return {.name = "rope-relativity",
          .passed = ok,
          .detail = "100 triples: shift-invariance diff " + fmt(worst_dot) +
                    " (tol 1e-5), norm drift " + fmt(worst_norm) + " (tol 1e-6)"};
}

CheckResult check_lora_neutrality_merge(const std::string&) {
  SeededRng rng(606);
  int neutral_ok = 0, merge_ok = 0;
  const int configs = 20;
  double worst_merge = 0.0;
  for (int it = 0; it < configs; ++it) {
    ModelConfig cfg;
    cfg.d_model = (it % 2 == 0) ? 16 : 32;
    cfg.n_layers = 1 + (it % 2);
    cfg.n_heads = 4;
    cfg.n_kv_heads = (it % 3 == 0) ? 1 : ((it % 3 == 1) ? 2 : 4);
    cfg.d_ff = 40;
    cfg.vocab_size = 64;
    cfg.window = 0;
    cfg.block_style = (it % 4 == 0) ? BlockStyle::kParallel : BlockStyle::kSequential;
    cfg.seed = 3000 + static_cast<std::uint64_t>(it);
    const Model m = init_model(cfg);

    LoraConfig lc;
    lc.rank = 1 << (it % 4);  // 1, 2, 4, 8
    lc.alpha = 32.0f;
    lc.dropout = 0.05f;
    lc.targets = (it % 2 == 0) ? default_target_kinds()
                               : std::vector<std::string>{"wq", "wk", "wv", "wo"};
    lc.seed = 4000 + static_cast<std::uint64_t>(it);
    LoraSet set = init_lora(m, lc);

    const auto ids = random_ids(rng, 9, cfg.vocab_size);
    DecodeSession base_session(m);
    const Tensor base_logits = base_session.forward(ids).logits;

    SessionOptions with_adapters;
    with_adapters.adapters = &set;
    DecodeSession fresh_session(m, with_adapters);
    const Tensor fresh_logits = fresh_session.forward(ids).logits;
    if (bit_identical(base_logits.values(), fresh_logits.values())) ++neutral_ok;

    // non-trivial adapters: randomise B away from zero, then fold in
    for (LoraAdapter& ad : set.adapters) {
      ad.b = gaussian_fill(rng, ad.b.shape(), 0.0f, 0.02f);
    }
    DecodeSession adapted_session(m, with_adapters);
    const Tensor adapted_logits = adapted_session.forward(ids).logits;
    const Model merged = merge_lora(m, set);
    DecodeSession merged_session(merged);
    const Tensor merged_logits = merged_session.forward(ids).logits;
    const double diff = max_abs_diff(adapted_logits, merged_logits);
    worst_merge = std::max(worst_merge, diff);
    if (diff <= 1e-5) ++merge_ok;
  }
  const bool ok = neutral_ok == configs && merge_ok == configs;
  return {.name = "lora-neutrality-merge",
          .passed = ok,
          .detail = "fresh adapters bit-identical " + std::to_string(neutral_ok) + "/20, "
                    "merged vs adapted max diff " + fmt(worst_merge) + " (tol 1e-5)"};
}

CheckResult check_lora_gradients(const std::string&) {
  const auto start = std::chrono::steady_clock::now();
  ModelConfig cfg;
  cfg.d_model = 16;
  cfg.n_layers = 2;
  cfg.n_heads = 4;
  cfg.n_kv_heads = 2;
  cfg.d_ff = 24;
  cfg.vocab_size = kVocabSize;
  cfg.window = 0;
  cfg.seed = 11;

  std::vector<TokenizedExample> batch;
  batch.push_back(build_training_sequence({"ab", "cde"}));
  batch.push_back(build_training_sequence({"fg", "hi"}));

  const double h = 1e-3;
  const double tol = 1e-3;
  const double floor = 1e-3;
  // Evaluation point: N(0, 0.02), the adapters' own init scale. rank=1 runs
  // at scaling 32, and the cubic term of the loss grows with scaling^3, so a
  // larger point makes the central-difference oracle (truncation ~ h^2 f''')
  // unreliable long before the analytic gradient is at fault.
  const double point_std = 0.02;
  double worst_rel = 0.0;
  std::int64_t checked = 0;

  const std::vector<std::vector<std::string>> target_sets = {
      default_target_kinds(), {"wq", "wk", "wv", "wo"}};
  struct Setup {
    std::int64_t rank;
    std::size_t targets;
    BlockStyle style;
  };
  const std::vector<Setup> setups = {{1, 0, BlockStyle::kSequential},
                                     {2, 0, BlockStyle::kSequential},
                                     {4, 0, BlockStyle::kSequential},
                                     {1, 1, BlockStyle::kSequential},
                                     {2, 1, BlockStyle::kSequential},
                                     {4, 1, BlockStyle::kSequential},
                                     {2, 1, BlockStyle::kParallel}};
  for (const Setup& setup : setups) {
    ModelConfig mc = cfg;
    mc.block_style = setup.style;
    const Model m = init_model(mc);

    LoraConfig lc;
    lc.rank = setup.rank;
    lc.alpha = 32.0f;
    lc.dropout = 0.0f;
    lc.targets = target_sets[setup.targets];
    lc.seed = 17 + static_cast<std::uint64_t>(setup.rank);
    LoraSet set = init_lora(m, lc);
    SeededRng prng(400 + static_cast<std::uint64_t>(setup.rank));
    for (LoraAdapter& ad : set.adapters) {
      ad.a = gaussian_fill(prng, ad.a.shape(), 0.0f, static_cast<float>(point_std));
      ad.b = gaussian_fill(prng, ad.b.shape(), 0.0f, static_cast<float>(point_std));
    }

    const LossGrads lg = lora_loss_and_grads(m, set, batch, nullptr);
    ReplicaAdapters ra = replica_adapters(set);

    auto fd_check = [&](DMat& mat, const Tensor& grad) {
      for (std::size_t r = 0; r < mat.size(); ++r) {
        for (std::size_t c = 0; c < mat[r].size(); ++c) {
          const double saved = mat[r][c];
          mat[r][c] = saved + h;
          const double lp = replica_loss(m, set, ra, batch);
          mat[r][c] = saved - h;
          const double lm = replica_loss(m, set, ra, batch);
          mat[r][c] = saved;
          const double fd = (lp - lm) / (2.0 * h);
          const double g = grad(static_cast<std::int64_t>(r), static_cast<std::int64_t>(c));
          const double rel = std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), floor});
          worst_rel = std::max(worst_rel, rel);
          ++checked;
        }
      }
    };
    for (std::size_t i = 0; i < set.adapters.size(); ++i) {
      fd_check(ra.a[i], lg.d_a[i]);
      fd_check(ra.b[i], lg.d_b[i]);
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = worst_rel <= tol && secs < 30.0;
  return {.name = "lora-gradients",
          .passed = ok,
          .detail = std::to_string(checked) + " params h=1e-3, worst rel err " + fmt(worst_rel) +
                    " (tol 1e-3), " + fmt(secs) + "s (budget 30s)"};
}

CheckResult check_finetune_copytask(const std::string& data_dir) {
  const auto start = std::chrono::steady_clock::now();
  const auto examples = load_instruction_jsonl(data_dir + "/copytask.jsonl");

  ModelConfig cfg;
  cfg.d_model = 32;
  cfg.n_layers = 2;
  cfg.n_heads = 4;
  cfg.n_kv_heads = 2;
  cfg.d_ff = 64;
  cfg.vocab_size = kVocabSize;
  cfg.window = 0;
  cfg.seed = 7;
  Model m = init_model(cfg);
  // Adapters never touch the readout, and the stock 0.02-scale init caps the
  // spread of the frozen output projection's logits near zero; no adapter
  // configuration could halve the loss through it. Redraw the readout at a
  // usable scale so the frozen base has headroom for adaptation.
  SeededRng readout_rng(29);
  m.output_proj = gaussian_fill(readout_rng, {cfg.vocab_size, cfg.d_model}, 0.0f, 0.5f);
  const std::uint64_t digest_before = model_fingerprint(m);

  LoraConfig lc;
  lc.rank = 8;
  lc.alpha = 32.0f;
  lc.dropout = 0.05f;
  lc.targets = {"wq", "wk", "wv", "wo"};
  lc.seed = 11;

  TrainConfig tc;
  tc.steps = 200;
  tc.batch_size = 8;
  tc.lr = 1e-2f;
  tc.seed = 23;

  const FinetuneResult result = finetune(m, examples, lc, tc);
  const std::uint64_t digest_after = model_fingerprint(m);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const bool halved = result.final_loss <= 0.5 * result.initial_loss;
  const bool frozen = digest_before == digest_after;
  const bool fast = secs < 120.0;
  return {.name = "finetune-copytask",
          .passed = halved && frozen && fast,
          .detail = "loss " + fmt(result.initial_loss) + " -> " + fmt(result.final_loss) +
                    " (need <= 50%), base digest " + (frozen ? "unchanged" : "CHANGED") + ", " +
                    fmt(secs) + "s (budget 120s)"};
}

CheckResult check_metrics_oracle(const std::string&) {
  SeededRng rng(246810);
  int agree = 0;
  const int iters = 1000;
  for (int it = 0; it < iters; ++it) {
    const std::size_t c = 1 + rng.next_u64() % 6;
    const bool extra_col = (rng.next_u64() & 1) != 0;
    const std::size_t cols = c + (extra_col ? 1 : 0);
    const std::size_t n = 1 + rng.next_u64() % 60;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // gold, predicted column
    for (std::size_t s = 0; s < n; ++s) {
      pairs.emplace_back(rng.next_u64() % c, rng.next_u64() % cols);
    }
    std::vector<std::vector<std::int64_t>> counts(c, std::vector<std::int64_t>(cols, 0));
    for (const auto& [g, p] : pairs) counts[g][p]++;

    const MetricsSummary got = metrics_from_confusion(counts);

    // counting oracle straight from the pair list
    std::int64_t correct = 0;
    bool all_fields_agree = true;
    for (const auto& [g, p] : pairs) {
      if (g == p) ++correct;
    }
    const double oracle_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    if (got.accuracy != oracle_accuracy) all_fields_agree = false;
    double macro_p = 0.0, macro_r = 0.0, macro_f = 0.0;
    for (std::size_t cls = 0; cls < c; ++cls) {
      std::int64_t tp = 0, gold_n = 0, pred_n = 0;
      for (const auto& [g, p] : pairs) {
        if (g == cls && p == cls) ++tp;
        if (g == cls) ++gold_n;
        if (p == cls) ++pred_n;
      }
      const double prec = pred_n == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(pred_n);
      const double rec = gold_n == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(gold_n);
      const double f1 = (prec + rec) == 0.0 ? 0.0 : 2.0 * prec * rec / (prec + rec);
      const ClassMetrics& cm = got.per_class[cls];
      if (cm.precision != prec || cm.recall != rec || cm.f1 != f1 || cm.support != gold_n) {
        all_fields_agree = false;
      }
      macro_p += prec;
      macro_r += rec;
      macro_f += f1;
    }
    if (got.macro_precision != macro_p / static_cast<double>(c) ||
        got.macro_recall != macro_r / static_cast<double>(c) ||
        got.macro_f1 != macro_f / static_cast<double>(c)) {
      all_fields_agree = false;
    }
    if (all_fields_agree) ++agree;
  }

  const MetricsSummary quarter = metrics_from_confusion({{1, 1}, {0, 2}});
  const bool quarter_ok = quarter.accuracy == 0.75;
  const MetricsSummary constant = metrics_from_confusion({{5, 0}, {5, 0}});
  const bool third_ok = constant.macro_f1 == 1.0 / 3.0;

  const bool ok = agree == iters && quarter_ok && third_ok;
  return {.name = "metrics-oracle",
          .passed = ok,
          .detail = std::to_string(agree) + "/1000 random matrices exact, accuracy([[1,1],[0,2]])=" +
                    std::to_string(quarter.accuracy) + ", constant-predictor macro-F1=" +
                    std::to_string(constant.macro_f1)};
}

CheckResult check_e2e_determinism(const std::string& data_dir) {
  const auto samples = load_labeled_jsonl(data_dir + "/tweetsent3_fixture.jsonl");
  GoldEchoBackend backend;
  EvalConfig config;
  config.template_name = "tweetsent3";
  config.parallelism = 4;
  config.seed = 42;

  const EvalResult r1 = evaluate(samples, backend, config);
  const EvalResult r2 = evaluate(samples, backend, config);
  const std::string j1 = report_json(r1);
  const std::string j2 = report_json(r2);

  EvalConfig serial = config;
  serial.parallelism = 1;
  const EvalResult r3 = evaluate(samples, backend, serial);
  bool schedule_invariant = r1.confusion == r3.confusion &&
                            r1.metrics.accuracy == r3.metrics.accuracy &&
                            r1.outcomes.size() == r3.outcomes.size();
  for (std::size_t i = 0; schedule_invariant && i < r1.outcomes.size(); ++i) {
    schedule_invariant = r1.outcomes[i].predicted == r3.outcomes[i].predicted &&
                         r1.outcomes[i].completion == r3.outcomes[i].completion;
  }

  const bool digests_ok =
      template_checksum(find_template("tweetsent3")) == kTweetSentiment3Checksum &&
      template_checksum(find_template("agnews4")) == kNewsTopic4Checksum;

  const bool ok = r1.metrics.accuracy == 1.0 && j1 == j2 && schedule_invariant && digests_ok;
  return {.name = "e2e-determinism",
          .passed = ok,
          .detail = "gold-echo accuracy " + std::to_string(r1.metrics.accuracy) +
                    ", repeat report " + (j1 == j2 ? "byte-identical" : "DIFFERS") +
                    ", parallel==serial " + (schedule_invariant ? "yes" : "NO") +
                    ", template digests " + (digests_ok ? "match" : "MISMATCH")};
}

}  // namespace

const std::vector<Check>& registry() {
  static const std::vector<Check> checks = {
      {"gqa-endpoints",
       "engine grouped-attention logits vs independent per-head and shared-kv references",
       check_gqa_endpoints},
      {"window-degeneracy", "window covering the whole sequence equals full causal attention",
       check_window_degeneracy},
      {"rolling-cache", "ring-buffer decoding equals keep-everything decoding under the mask",
       check_rolling_cache},
      {"receptive-field", "tokens beyond the layered window reach cannot move the probe state",
       check_receptive_field},
      {"online-softmax", "streaming attention equals two-pass attention, extreme scores included",
       check_online_softmax},
      {"chunked-prefill", "window-sized prefill chunks equal one unchunked pass",
       check_chunked_prefill},
      {"rope-relativity", "rotary scores depend only on relative offset; rotation keeps norms",
       check_rope_relativity},
      {"lora-neutrality-merge", "fresh adapters change nothing; folded adapters match live ones",
       check_lora_neutrality_merge},
      {"lora-gradients", "adapter gradients vs float64 central differences",
       check_lora_gradients},
      {"finetune-copytask", "200 seeded steps halve the copy-task loss with base weights frozen",
       check_finetune_copytask},
      {"metrics-oracle", "confusion-matrix metrics vs direct counting over raw pairs",
       check_metrics_oracle},
      {"e2e-determinism", "gold-echo evaluation is exact, repeatable, and schedule-invariant",
       check_e2e_determinism},
  };
  return checks;
}

std::string default_data_dir() { return TTLM_DATA_DIR; }

CheckResult run_check(const std::string& name, const std::string& data_dir) {
  const std::string dir = data_dir.empty() ? default_data_dir() : data_dir;
  for (const Check& c : registry()) {
    if (c.name == name) return c.run(dir);
  }
  throw UsageError("unknown check '" + name + "'");
}

std::vector<CheckResult> run_all(const std::string& data_dir) {
  std::vector<CheckResult> results;
  for (const Check& c : registry()) {
    results.push_back(run_check(c.name, data_dir));
  }
  return results;
}

}  // namespace ttlm::check
