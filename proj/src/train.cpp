#include "ttlm/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "ttlm/errors.hpp"
#include "ttlm/ops.hpp"
#include "ttlm/tokenizer.hpp"

namespace ttlm {

TokenizedExample build_training_sequence(const InstructionExample& ex) {
  TokenizedExample out;
  out.ids.push_back(kBosId);
  for (std::int64_t id : tokenize(ex.instruction + kResponseSeparator)) out.ids.push_back(id);
  const std::size_t response_start = out.ids.size();
  for (std::int64_t id : tokenize(ex.response)) out.ids.push_back(id);
  out.ids.push_back(kEosId);
  // target_mask[i] covers the prediction of ids[i+1].
  out.target_mask.assign(out.ids.size() - 1, 0);
  for (std::size_t i = response_start - 1; i + 1 < out.ids.size(); ++i) {
    out.target_mask[i] = 1;
  }
  return out;
}

namespace {

// ---- traced forward ----------------------------------------------------

struct ProjTrace {
  std::int64_t adapter_idx = -1;  // into set.adapters; -1 = plain projection
  Tensor mask;                    // scaled dropout mask, empty when inactive
  Tensor xd;                      // adapter input after dropout
  Tensor u;                       // xd A^T  [T, rank]
};

struct LayerTrace {
  Tensor x_in;              // [T, d_model]
  std::vector<float> inv1;  // rms_norm 1/sqrt(mean+eps) per row
  Tensor normed1;
  ProjTrace pq, pk, pv, po;
  Tensor q_rot;              // [T, n_heads * d_head]
  Tensor k_rot;              // [T, kv_width]
  Tensor v;                  // [T, kv_width]
  std::vector<Tensor> probs; // per query head, [T, T], zero where masked
  Tensor mixed;              // [T, n_heads * d_head]
  // sequential style only:
  Tensor h;  // x_in + attention output
  std::vector<float> inv2;
  Tensor normed2;
  Tensor gate_pre, up, prod;  // [T, d_ff]
};

struct Trace {
  std::vector<LayerTrace> layers;
  Tensor x_top;  // last block output
  std::vector<float> inv_final;
  Tensor hidden;
  Tensor logits;
};

Tensor norm_traced(const Tensor& x, const Tensor& gain, float eps, std::vector<float>& inv_out) {
  const std::int64_t d = x.cols();
  Tensor out(x.shape());
  inv_out.resize(static_cast<std::size_t>(x.rows()));
  for (std::int64_t r = 0; r < x.rows(); ++r) {
    double ss = 0.0;
    for (std::int64_t k = 0; k < d; ++k) {
      const double v = x(r, k);
      ss += v * v;
    }
    const float inv = 1.0f / std::sqrt(static_cast<float>(ss / static_cast<double>(d)) + eps);
    inv_out[static_cast<std::size_t>(r)] = inv;
    for (std::int64_t k = 0; k < d; ++k) out(r, k) = x(r, k) * inv * gain(k);
  }
  return out;
}

std::int64_t adapter_index(const LoraSet& set, const std::string& name) {
  for (std::size_t i = 0; i < set.adapters.size(); ++i) {
    if (set.adapters[i].target == name) return static_cast<std::int64_t>(i);
  }
  return -1;
}

Tensor project_traced(const Tensor& x, const Tensor& w, const LoraSet& set, std::int64_t idx,
                      SeededRng* dropout_rng, ProjTrace& tr) {
  tr.adapter_idx = idx;
  Tensor y = linear(x, w);
  if (idx < 0) return y;
  const LoraAdapter& ad = set.adapters[static_cast<std::size_t>(idx)];
  const float p = set.config.dropout;
  if (dropout_rng != nullptr && p > 0.0f) {
    tr.mask = Tensor(x.shape());
    const float keep_scale = 1.0f / (1.0f - p);
    for (std::int64_t i = 0; i < tr.mask.numel(); ++i) {
      tr.mask(i) = (dropout_rng->next_unit() >= static_cast<double>(p)) ? keep_scale : 0.0f;
    }
    tr.xd = mul(x, tr.mask);
  } else {
    tr.xd = x;
  }
  tr.u = linear(tr.xd, ad.a);
  return add(y, scale(linear(tr.u, ad.b), set.scaling()));
}

void attention_traced(const ModelConfig& cfg, LayerTrace& lt) {
  const std::int64_t t_len = lt.q_rot.rows();
  const std::int64_t dh = cfg.d_head();
  const float scl = 1.0f / std::sqrt(static_cast<float>(dh));
  lt.mixed = Tensor({t_len, cfg.n_heads * dh});
  lt.probs.clear();
  lt.probs.reserve(static_cast<std::size_t>(cfg.n_heads));
  for (std::int64_t h = 0; h < cfg.n_heads; ++h) {
    const std::int64_t g = kv_group_index(h, cfg.n_heads, cfg.n_kv_heads);
    Tensor p({t_len, t_len});
    for (std::int64_t i = 0; i < t_len; ++i) {
      const float* qh = lt.q_rot.data() + i * lt.q_rot.cols() + h * dh;
      float mx = -std::numeric_limits<float>::infinity();
      for (std::int64_t j = 0; j <= i; ++j) {
        if (!swa_allowed(i, j, cfg.window)) continue;
        const float* kj = lt.k_rot.data() + j * lt.k_rot.cols() + g * dh;
        float s = 0.0f;
        for (std::int64_t c = 0; c < dh; ++c) s += qh[c] * kj[c];
        s *= scl;
        p(i, j) = s;
        if (s > mx) mx = s;
      }
      float denom = 0.0f;
      for (std::int64_t j = 0; j <= i; ++j) {
        if (!swa_allowed(i, j, cfg.window)) continue;
        p(i, j) = std::exp(p(i, j) - mx);
        denom += p(i, j);
      }
      float* oh = lt.mixed.data() + i * lt.mixed.cols() + h * dh;
      for (std::int64_t j = 0; j <= i; ++j) {
        if (!swa_allowed(i, j, cfg.window)) continue;
        p(i, j) /= denom;
        const float* vj = lt.v.data() + j * lt.v.cols() + g * dh;
        for (std::int64_t c = 0; c < dh; ++c) oh[c] += p(i, j) * vj[c];
      }
    }
    lt.probs.push_back(std::move(p));
  }
}

Trace forward_traced(const Model& m, const LoraSet& set, std::span<const std::int64_t> ids,
                     SeededRng* dropout_rng) {
  const ModelConfig& cfg = m.config;
  const std::int64_t t_len = static_cast<std::int64_t>(ids.size());
  Trace tr;
  Tensor x({t_len, cfg.d_model});
  for (std::int64_t i = 0; i < t_len; ++i) {
    const std::int64_t id = ids[static_cast<std::size_t>(i)];
    if (id < 0 || id >= cfg.vocab_size) {
      throw DataError("token id " + std::to_string(id) + " outside vocabulary of " +
                      std::to_string(cfg.vocab_size));
    }
    std::memcpy(x.data() + i * cfg.d_model, m.token_embedding.data() + id * cfg.d_model,
                sizeof(float) * static_cast<std::size_t>(cfg.d_model));
  }

  tr.layers.resize(static_cast<std::size_t>(cfg.n_layers));
  for (std::int64_t li = 0; li < cfg.n_layers; ++li) {
    LayerTrace& lt = tr.layers[static_cast<std::size_t>(li)];
    const LayerWeights& l = m.layers[static_cast<std::size_t>(li)];
    const std::string prefix = "layers." + std::to_string(li) + ".";
    lt.x_in = x;
    lt.normed1 = norm_traced(lt.x_in, l.attn_norm_gain, cfg.norm_eps, lt.inv1);

    lt.q_rot = project_traced(lt.normed1, l.wq, set, adapter_index(set, prefix + "wq"),
                              dropout_rng, lt.pq);
    lt.k_rot = project_traced(lt.normed1, l.wk, set, adapter_index(set, prefix + "wk"),
                              dropout_rng, lt.pk);
    lt.v = project_traced(lt.normed1, l.wv, set, adapter_index(set, prefix + "wv"), dropout_rng,
                          lt.pv);
    for (std::int64_t r = 0; r < t_len; ++r) {
      rope_apply_row(lt.q_rot.row(r), cfg.n_heads, r, cfg.rope_base);
      rope_apply_row(lt.k_rot.row(r), cfg.n_kv_heads, r, cfg.rope_base);
    }
    attention_traced(cfg, lt);
    const Tensor attn_out = project_traced(lt.mixed, l.wo, set,
                                           adapter_index(set, prefix + "wo"), dropout_rng, lt.po);

    if (cfg.block_style == BlockStyle::kParallel) {
      lt.gate_pre = linear(lt.normed1, l.w_gate);
      lt.up = linear(lt.normed1, l.w_up);
      lt.prod = mul(silu(lt.gate_pre), lt.up);
      x = add(add(lt.x_in, attn_out), linear(lt.prod, l.w_down));
    } else {
      lt.h = add(lt.x_in, attn_out);
      lt.normed2 = norm_traced(lt.h, l.mlp_norm_gain, cfg.norm_eps, lt.inv2);
      lt.gate_pre = linear(lt.normed2, l.w_gate);
      lt.up = linear(lt.normed2, l.w_up);
      lt.prod = mul(silu(lt.gate_pre), lt.up);
      x = add(lt.h, linear(lt.prod, l.w_down));
    }
  }
  tr.x_top = x;
  tr.hidden = norm_traced(tr.x_top, m.final_norm_gain, cfg.norm_eps, tr.inv_final);
  tr.logits = linear(tr.hidden, m.output_proj);
  return tr;
}

// ---- hand-derived backward ----------------------------------------------

// dx_k += inv * g_k * dy_k - inv^3 / n * x_k * sum_i(dy_i * g_i * x_i)
void rmsnorm_backward(const Tensor& x, const Tensor& gain, const std::vector<float>& inv,
                      const Tensor& dy, Tensor& dx) {
  const std::int64_t d = x.cols();
  for (std::int64_t r = 0; r < x.rows(); ++r) {
    float dot = 0.0f;
    for (std::int64_t k = 0; k < d; ++k) dot += dy(r, k) * gain(k) * x(r, k);
    const float iv = inv[static_cast<std::size_t>(r)];
    const float coeff = iv * iv * iv * dot / static_cast<float>(d);
    for (std::int64_t k = 0; k < d; ++k) {
      dx(r, k) += iv * gain(k) * dy(r, k) - coeff * x(r, k);
    }
  }
}

// y = x W^T  =>  dx += dy W
void linear_backward_input(const Tensor& dy, const Tensor& w, Tensor& dx) {
  const std::int64_t t_len = dy.rows();
  const std::int64_t d_out = w.dim(0);
  const std::int64_t d_in = w.dim(1);
  for (std::int64_t t = 0; t < t_len; ++t) {
    for (std::int64_t i = 0; i < d_in; ++i) {
      float acc = 0.0f;
      for (std::int64_t o = 0; o < d_out; ++o) acc += dy(t, o) * w(o, i);
      dx(t, i) += acc;
    }
  }
}

// Backward of project_traced; accumulates adapter grads and dx.
void proj_backward(const Tensor& dy, const Tensor& w, const LoraSet& set, const ProjTrace& tr,
                   std::vector<Tensor>& d_a, std::vector<Tensor>& d_b, Tensor& dx) {
  linear_backward_input(dy, w, dx);
  if (tr.adapter_idx < 0) return;
  const auto idx = static_cast<std::size_t>(tr.adapter_idx);
  const LoraAdapter& ad = set.adapters[idx];
  const float s = set.scaling();
  const std::int64_t t_len = dy.rows();
  const std::int64_t rank = ad.a.dim(0);
  const std::int64_t d_in = ad.a.dim(1);
  const std::int64_t d_out = ad.b.dim(0);

  // du = s * dy B  [T, rank]
  Tensor du({t_len, rank});
  for (std::int64_t t = 0; t < t_len; ++t) {
    for (std::int64_t ri = 0; ri < rank; ++ri) {
      float acc = 0.0f;
      for (std::int64_t o = 0; o < d_out; ++o) acc += dy(t, o) * ad.b(o, ri);
      du(t, ri) = s * acc;
    }
  }
  // dB += s * dy^T u
  for (std::int64_t o = 0; o < d_out; ++o) {
    for (std::int64_t ri = 0; ri < rank; ++ri) {
      float acc = 0.0f;
      for (std::int64_t t = 0; t < t_len; ++t) acc += dy(t, o) * tr.u(t, ri);
      d_b[idx](o, ri) += s * acc;
    }
  }
  // dA += du^T xd
  for (std::int64_t ri = 0; ri < rank; ++ri) {
    for (std::int64_t i = 0; i < d_in; ++i) {
      float acc = 0.0f;
      for (std::int64_t t = 0; t < t_len; ++t) acc += du(t, ri) * tr.xd(t, i);
      d_a[idx](ri, i) += acc;
    }
  }
  // dx += mask .* (du A)
  for (std::int64_t t = 0; t < t_len; ++t) {
    for (std::int64_t i = 0; i < d_in; ++i) {
      float acc = 0.0f;
      for (std::int64_t ri = 0; ri < rank; ++ri) acc += du(t, ri) * ad.a(ri, i);
      if (!tr.mask.empty()) acc *= tr.mask(t, i);
      dx(t, i) += acc;
    }
  }
}

void attention_backward(const ModelConfig& cfg, const LayerTrace& lt, const Tensor& d_mixed,
                        Tensor& dq_rot, Tensor& dk_rot, Tensor& dv) {
  const std::int64_t t_len = lt.q_rot.rows();
  const std::int64_t dh = cfg.d_head();
  const float scl = 1.0f / std::sqrt(static_cast<float>(dh));
  std::vector<float> dp(static_cast<std::size_t>(t_len));
  for (std::int64_t h = 0; h < cfg.n_heads; ++h) {
    const std::int64_t g = kv_group_index(h, cfg.n_heads, cfg.n_kv_heads);
    const Tensor& p = lt.probs[static_cast<std::size_t>(h)];
    for (std::int64_t i = 0; i < t_len; ++i) {
      const float* doi = d_mixed.data() + i * d_mixed.cols() + h * dh;
      // dp_ij = do_i . v_j; dv_j += p_ij do_i
      float p_dot_dp = 0.0f;
      for (std::int64_t j = 0; j <= i; ++j) {
        const float pij = p(i, j);
        if (pij == 0.0f) {
          dp[static_cast<std::size_t>(j)] = 0.0f;
          continue;
        }
        const float* vj = lt.v.data() + j * lt.v.cols() + g * dh;
        float d = 0.0f;
        for (std::int64_t c = 0; c < dh; ++c) d += doi[c] * vj[c];
        dp[static_cast<std::size_t>(j)] = d;
        p_dot_dp += pij * d;
        float* dvj = dv.data() + j * dv.cols() + g * dh;
        for (std::int64_t c = 0; c < dh; ++c) dvj[c] += pij * doi[c];
      }
      // ds_ij = p_ij (dp_ij - sum p dp); dq += ds * scale * k_j; dk_j += ds * scale * q_i
      const float* qh = lt.q_rot.data() + i * lt.q_rot.cols() + h * dh;
      float* dqh = dq_rot.data() + i * dq_rot.cols() + h * dh;
      for (std::int64_t j = 0; j <= i; ++j) {
        const float pij = p(i, j);
        if (pij == 0.0f) continue;
        const float ds = pij * (dp[static_cast<std::size_t>(j)] - p_dot_dp) * scl;
        const float* kj = lt.k_rot.data() + j * lt.k_rot.cols() + g * dh;
        float* dkj = dk_rot.data() + j * dk_rot.cols() + g * dh;
        for (std::int64_t c = 0; c < dh; ++c) {
          dqh[c] += ds * kj[c];
          dkj[c] += ds * qh[c];
        }
      }
    }
  }
}

// silu'(x) = sig(x) (1 + x (1 - sig(x)))
float silu_grad(float x) {
  const float sig = 1.0f / (1.0f + std::exp(-x));
  return sig * (1.0f + x * (1.0f - sig));
}

void mlp_backward(const LayerWeights& l, const LayerTrace& lt, const Tensor& dy, Tensor& dn) {
  Tensor dprod(lt.prod.shape());
  linear_backward_input(dy, l.w_down, dprod);
  Tensor dgate_pre(lt.gate_pre.shape());
  Tensor dup(lt.up.shape());
  for (std::int64_t i = 0; i < dprod.numel(); ++i) {
    const float gp = lt.gate_pre(i);
    const float silu_gp = gp / (1.0f + std::exp(-gp));
    dup(i) = dprod(i) * silu_gp;
    dgate_pre(i) = dprod(i) * lt.up(i) * silu_grad(gp);
  }
  linear_backward_input(dgate_pre, l.w_gate, dn);
  linear_backward_input(dup, l.w_up, dn);
}

}  // namespace

LossGrads lora_loss_and_grads(const Model& model, const LoraSet& set,
                              std::span<const TokenizedExample> batch, SeededRng* dropout_rng) {
  const ModelConfig& cfg = model.config;
  LossGrads out;
  out.d_a.reserve(set.adapters.size());
  out.d_b.reserve(set.adapters.size());
  for (const LoraAdapter& ad : set.adapters) {
    out.d_a.emplace_back(ad.a.shape());
    out.d_b.emplace_back(ad.b.shape());
  }

  double loss_sum = 0.0;
  std::int64_t mask_total = 0;
  for (const TokenizedExample& ex : batch) {
    if (ex.ids.size() < 2) throw DataError("training sequence needs at least two tokens");
    if (ex.target_mask.size() != ex.ids.size() - 1) {
      throw DataError("target mask length does not match sequence");
    }
    const Trace tr = forward_traced(model, set, ex.ids, dropout_rng);
    const std::int64_t t_len = static_cast<std::int64_t>(ex.ids.size());

    // Masked cross-entropy and unscaled dlogits = softmax - onehot.
    Tensor dlogits(tr.logits.shape());
    for (std::int64_t i = 0; i + 1 < t_len; ++i) {
      if (!ex.target_mask[static_cast<std::size_t>(i)]) continue;
      const std::int64_t target = ex.ids[static_cast<std::size_t>(i + 1)];
      auto row = tr.logits.row(i);
      float mx = row[0];
      for (float v : row) mx = std::max(mx, v);
      double sum = 0.0;
      for (float v : row) sum += std::exp(static_cast<double>(v - mx));
      loss_sum += std::log(sum) + static_cast<double>(mx) - tr.logits(i, target);
      ++mask_total;
      for (std::int64_t c = 0; c < cfg.vocab_size; ++c) {
        dlogits(i, c) = static_cast<float>(std::exp(static_cast<double>(tr.logits(i, c) - mx)) / sum);
      }
      dlogits(i, target) -= 1.0f;
    }

    Tensor d_hidden(tr.hidden.shape());
    linear_backward_input(dlogits, model.output_proj, d_hidden);
    Tensor dx(tr.x_top.shape());
    rmsnorm_backward(tr.x_top, model.final_norm_gain, tr.inv_final, d_hidden, dx);

    for (std::int64_t li = cfg.n_layers - 1; li >= 0; --li) {
      const LayerTrace& lt = tr.layers[static_cast<std::size_t>(li)];
      const LayerWeights& l = model.layers[static_cast<std::size_t>(li)];

      Tensor d_n1(lt.normed1.shape());
      Tensor d_mixed(lt.mixed.shape());
      Tensor dx_next(lt.x_in.shape());

      if (cfg.block_style == BlockStyle::kParallel) {
        mlp_backward(l, lt, dx, d_n1);
        proj_backward(dx, l.wo, set, lt.po, out.d_a, out.d_b, d_mixed);
        dx_next = dx;  // residual
      } else {
        Tensor d_h = dx;  // residual into h
        Tensor d_n2(lt.normed2.shape());
        mlp_backward(l, lt, dx, d_n2);
        rmsnorm_backward(lt.h, l.mlp_norm_gain, lt.inv2, d_n2, d_h);
        proj_backward(d_h, l.wo, set, lt.po, out.d_a, out.d_b, d_mixed);
        dx_next = d_h;  // residual into x
      }

      Tensor dq_rot(lt.q_rot.shape());
      Tensor dk_rot(lt.k_rot.shape());
      Tensor dv(lt.v.shape());
      attention_backward(cfg, lt, d_mixed, dq_rot, dk_rot, dv);
      for (std::int64_t r = 0; r < dq_rot.rows(); ++r) {
        rope_apply_row(dq_rot.row(r), cfg.n_heads, -r, cfg.rope_base);
        rope_apply_row(dk_rot.row(r), cfg.n_kv_heads, -r, cfg.rope_base);
      }
      proj_backward(dq_rot, l.wq, set, lt.pq, out.d_a, out.d_b, d_n1);
      proj_backward(dk_rot, l.wk, set, lt.pk, out.d_a, out.d_b, d_n1);
      proj_backward(dv, l.wv, set, lt.pv, out.d_a, out.d_b, d_n1);

      rmsnorm_backward(lt.x_in, l.attn_norm_gain, lt.inv1, d_n1, dx_next);
      dx = std::move(dx_next);
    }
  }

  if (mask_total == 0) throw DataError("batch has no masked target positions");
  const float inv_mass = 1.0f / static_cast<float>(mask_total);
  for (Tensor& g : out.d_a) {
    for (std::int64_t i = 0; i < g.numel(); ++i) g(i) *= inv_mass;
  }
  for (Tensor& g : out.d_b) {
    for (std::int64_t i = 0; i < g.numel(); ++i) g(i) *= inv_mass;
  }
  out.loss = loss_sum / static_cast<double>(mask_total);
  out.masked_positions = mask_total;
  return out;
}

double corpus_loss(const Model& model, const LoraSet& set,
                   std::span<const InstructionExample> examples) {
  if (examples.empty()) throw DataError("corpus is empty");
  std::vector<TokenizedExample> tokenized;
  tokenized.reserve(examples.size());
  for (const InstructionExample& ex : examples) tokenized.push_back(build_training_sequence(ex));
  return lora_loss_and_grads(model, set, tokenized, nullptr).loss;
}

FinetuneResult finetune(const Model& model, std::span<const InstructionExample> examples,
                        const LoraConfig& lora_config, const TrainConfig& train_config) {
  model.check_shapes();
  lora_config.validate();
  if (examples.empty()) throw DataError("training corpus is empty");
  if (train_config.steps <= 0) throw ConfigError("step count must be positive");
  if (train_config.batch_size <= 0) throw ConfigError("batch size must be positive");
  if (!(train_config.lr > 0.0f)) throw ConfigError("learning rate must be positive");

  std::vector<TokenizedExample> tokenized;
  tokenized.reserve(examples.size());
  for (const InstructionExample& ex : examples) tokenized.push_back(build_training_sequence(ex));

  FinetuneResult result;
  result.adapters = init_lora(model, lora_config);
  LoraSet& set = result.adapters;
  result.initial_loss = corpus_loss(model, set, examples);

  std::vector<Tensor> m_a, v_a, m_b, v_b;
  for (const LoraAdapter& ad : set.adapters) {
    m_a.emplace_back(ad.a.shape());
    v_a.emplace_back(ad.a.shape());
    m_b.emplace_back(ad.b.shape());
    v_b.emplace_back(ad.b.shape());
  }

  SeededRng dropout_rng(train_config.seed);
  const std::size_t n = tokenized.size();
  for (std::int64_t step = 0; step < train_config.steps; ++step) {
    std::vector<TokenizedExample> batch;
    batch.reserve(static_cast<std::size_t>(train_config.batch_size));
    for (std::int64_t k = 0; k < train_config.batch_size; ++k) {
      const std::size_t idx =
          (static_cast<std::size_t>(step) * static_cast<std::size_t>(train_config.batch_size) +
           static_cast<std::size_t>(k)) %
          n;
      batch.push_back(tokenized[idx]);
    }
    LossGrads lg = lora_loss_and_grads(model, set, batch, &dropout_rng);
    result.step_losses.push_back(lg.loss);

    const double t = static_cast<double>(step + 1);
    const double bc1 = 1.0 - std::pow(static_cast<double>(train_config.beta1), t);
    const double bc2 = 1.0 - std::pow(static_cast<double>(train_config.beta2), t);
    auto adam_update = [&](Tensor& w, Tensor& m, Tensor& v, const Tensor& g) {
      for (std::int64_t i = 0; i < w.numel(); ++i) {
        m(i) = train_config.beta1 * m(i) + (1.0f - train_config.beta1) * g(i);
        v(i) = train_config.beta2 * v(i) + (1.0f - train_config.beta2) * g(i) * g(i);
        const float m_hat = static_cast<float>(m(i) / bc1);
        const float v_hat = static_cast<float>(v(i) / bc2);
        w(i) -= train_config.lr * m_hat / (std::sqrt(v_hat) + train_config.adam_eps);
      }
    };
    for (std::size_t i = 0; i < set.adapters.size(); ++i) {
      adam_update(set.adapters[i].a, m_a[i], v_a[i], lg.d_a[i]);
      adam_update(set.adapters[i].b, m_b[i], v_b[i], lg.d_b[i]);
    }
  }
  result.final_loss = corpus_loss(model, set, examples);
  return result;
}

}  // namespace ttlm
