#include "ttlm/decode.hpp"

#include <algorithm>
#include <cstring>

#include "ttlm/attention.hpp"
#include "ttlm/errors.hpp"
#include "ttlm/ops.hpp"
#include "ttlm/tokenizer.hpp"

namespace ttlm {

namespace {

Tensor embed_tokens(const Model& m, std::span<const std::int64_t> ids) {
  Tensor x({static_cast<std::int64_t>(ids.size()), m.config.d_model});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::int64_t id = ids[i];
    if (id < 0 || id >= m.config.vocab_size) {
      throw DataError("token id " + std::to_string(id) + " outside vocabulary of " +
                      std::to_string(m.config.vocab_size));
    }
    std::memcpy(x.data() + static_cast<std::int64_t>(i) * m.config.d_model,
                m.token_embedding.data() + id * m.config.d_model,
                sizeof(float) * static_cast<std::size_t>(m.config.d_model));
  }
  return x;
}

Tensor project(const Tensor& x, const Tensor& w, const LoraSet* set, const std::string& name) {
  if (set != nullptr) {
    if (const LoraAdapter* ad = set->find(name)) {
      return lora_linear(x, w, *ad, set->scaling());
    }
  }
  return linear(x, w);
}

// One block over a chunk of rows at absolute positions `q_pos`, attending
// over the cache's held range plus the chunk itself, then committing the
// chunk's keys/values.
Tensor block_forward(const Model& m, std::int64_t layer_idx, const Tensor& x,
                     std::span<const std::int64_t> q_pos, KVCache& cache, const LoraSet* adapters) {
  const ModelConfig& cfg = m.config;
  const LayerWeights& l = m.layers[static_cast<std::size_t>(layer_idx)];
  const std::string prefix = "layers." + std::to_string(layer_idx) + ".";

  const Tensor normed = rms_norm(x, l.attn_norm_gain, cfg.norm_eps);

  Tensor q = project(normed, l.wq, adapters, prefix + "wq");
  Tensor k = project(normed, l.wk, adapters, prefix + "wk");
  Tensor v = project(normed, l.wv, adapters, prefix + "wv");
  for (std::int64_t r = 0; r < q.rows(); ++r) {
    rope_apply_row(q.row(r), cfg.n_heads, q_pos[static_cast<std::size_t>(r)], cfg.rope_base);
    rope_apply_row(k.row(r), cfg.n_kv_heads, q_pos[static_cast<std::size_t>(r)], cfg.rope_base);
  }

  // Dense key/value run: held cache rows (ascending position) then the chunk.
  const KVCache::View held = cache.gather(layer_idx);
  const std::int64_t held_rows = static_cast<std::int64_t>(held.positions.size());
  const std::int64_t total_rows = held_rows + k.rows();
  Tensor k_all({total_rows, cfg.kv_width()});
  Tensor v_all({total_rows, cfg.kv_width()});
  std::vector<std::int64_t> k_pos;
  k_pos.reserve(static_cast<std::size_t>(total_rows));
  if (held_rows > 0) {
    std::memcpy(k_all.data(), held.k.data(), sizeof(float) * held.k.numel());
    std::memcpy(v_all.data(), held.v.data(), sizeof(float) * held.v.numel());
    k_pos.insert(k_pos.end(), held.positions.begin(), held.positions.end());
  }
  std::memcpy(k_all.data() + held_rows * cfg.kv_width(), k.data(), sizeof(float) * k.numel());
  std::memcpy(v_all.data() + held_rows * cfg.kv_width(), v.data(), sizeof(float) * v.numel());
  k_pos.insert(k_pos.end(), q_pos.begin(), q_pos.end());

  const Tensor attn = attention_online(q, k_all, v_all, cfg.n_heads, cfg.n_kv_heads, q_pos,
                                       k_pos, cfg.window);
  const Tensor attn_out = project(attn, l.wo, adapters, prefix + "wo");

  for (std::int64_t r = 0; r < k.rows(); ++r) {
    cache.write(layer_idx, q_pos[static_cast<std::size_t>(r)], k.row(r), v.row(r));
  }

  if (cfg.block_style == BlockStyle::kParallel) {
    const Tensor mlp = swiglu_mlp(normed, l.w_gate, l.w_up, l.w_down);
    return add(add(x, attn_out), mlp);
  }
  const Tensor h = add(x, attn_out);
  const Tensor mlp = swiglu_mlp(rms_norm(h, l.mlp_norm_gain, cfg.norm_eps), l.w_gate, l.w_up,
                                l.w_down);
  return add(h, mlp);
}

}  // namespace

DecodeSession::DecodeSession(const Model& model, SessionOptions options)
    : model_(model),
      options_(options),
      cache_(model.config.n_layers, model.config.kv_width(),
             options.rolling ? model.config.window : 0) {
  model_.check_shapes();
}

ForwardResult DecodeSession::forward(std::span<const std::int64_t> ids) {
  if (ids.empty()) throw UsageError("forward called with no tokens");
  std::vector<std::int64_t> positions(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    positions[i] = position_ + static_cast<std::int64_t>(i);
  }

  Tensor x = embed_tokens(model_, ids);
  for (std::int64_t layer = 0; layer < model_.config.n_layers; ++layer) {
    x = block_forward(model_, layer, x, positions, cache_, options_.adapters);
  }
  position_ += static_cast<std::int64_t>(ids.size());

  ForwardResult result;
  result.hidden = rms_norm(x, model_.final_norm_gain, model_.config.norm_eps);
  result.logits = linear(result.hidden, model_.output_proj);
  return result;
}

std::vector<std::int64_t> chunk_sizes(std::int64_t total, std::int64_t chunk) {
  if (total < 0 || chunk < 0) throw UsageError("chunk_sizes arguments must be >= 0");
  std::vector<std::int64_t> sizes;
  if (total == 0) return sizes;
  if (chunk == 0) {
    sizes.push_back(total);
    return sizes;
  }
  for (std::int64_t done = 0; done < total; done += chunk) {
    sizes.push_back(std::min(chunk, total - done));
  }
  return sizes;
}

GenerateResult greedy_decode(const Model& model, std::span<const std::int64_t> prompt,
                             const GenerateOptions& options) {
  if (prompt.empty()) throw UsageError("greedy decode needs a non-empty prompt");
  if (options.max_new < 0) throw UsageError("max_new must be >= 0");

  DecodeSession session(model, options.session);
  ForwardResult last;
  std::size_t offset = 0;
  for (std::int64_t size : chunk_sizes(static_cast<std::int64_t>(prompt.size()),
                                       model.config.window)) {
    last = session.forward(prompt.subspan(offset, static_cast<std::size_t>(size)));
    offset += static_cast<std::size_t>(size);
  }

  GenerateResult result;
  if (options.max_new == 0) return result;
  result.step_logits = Tensor({options.max_new, model.config.vocab_size});
  std::int64_t steps = 0;
  for (; steps < options.max_new; ++steps) {
    std::memcpy(result.step_logits.data() + steps * model.config.vocab_size,
                last.logits.row(last.logits.rows() - 1).data(),
                sizeof(float) * static_cast<std::size_t>(model.config.vocab_size));
    const std::int64_t next = argmax_last(last.logits);
    result.tokens.push_back(next);
    if (options.stop_at_eos && next == kEosId) {
      ++steps;
      break;
    }
    if (steps + 1 < options.max_new) {
      const std::int64_t ids[1] = {next};
      last = session.forward(ids);
    }
  }
  if (steps < options.max_new) {
    Tensor trimmed({steps, model.config.vocab_size});
    std::memcpy(trimmed.data(), result.step_logits.data(),
                sizeof(float) * static_cast<std::size_t>(trimmed.numel()));
    result.step_logits = std::move(trimmed);
  }
  return result;
}

std::string generate_text(const Model& model, const std::string& prompt,
                          const GenerateOptions& options) {
  std::vector<std::int64_t> ids;
  ids.push_back(kBosId);
  for (std::int64_t id : tokenize(prompt)) ids.push_back(id);
  const GenerateResult result = greedy_decode(model, ids, options);
  return detokenize(result.tokens);
}

}  // namespace ttlm
