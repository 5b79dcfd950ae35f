#include "ttlm/model.hpp"

#include <cstring>

#include "ttlm/errors.hpp"

namespace ttlm {

void ModelConfig::validate() const {
  if (d_model <= 0) throw ConfigError("d_model must be positive");
  if (n_layers <= 0) throw ConfigError("n_layers must be positive");
  if (n_heads <= 0) throw ConfigError("n_heads must be positive");
  if (n_kv_heads <= 0 || n_heads % n_kv_heads != 0) {
    throw ConfigError("n_kv_heads " + std::to_string(n_kv_heads) + " must divide n_heads " +
                      std::to_string(n_heads));
  }
  if (d_model % n_heads != 0) {
    throw ConfigError("d_model " + std::to_string(d_model) + " must be divisible by n_heads " +
                      std::to_string(n_heads));
  }
  if (d_head() % 2 != 0) {
    throw ConfigError("head dim " + std::to_string(d_head()) +
                      " must be even for pairwise rotation");
  }
  if (d_ff <= 0) throw ConfigError("d_ff must be positive");
  if (vocab_size <= 0) throw ConfigError("vocab_size must be positive");
  if (window < 0) throw ConfigError("window must be >= 0");
  if (!(rope_base > 0.0f)) throw ConfigError("rope_base must be positive");
  if (!(norm_eps > 0.0f)) throw ConfigError("norm_eps must be positive");
}

namespace {

void check_tensor(const Tensor& t, const std::vector<std::int64_t>& want, const std::string& name) {
  if (t.shape() != want) {
    throw DimensionError(name + " has shape " + shape_str(t.shape()) + ", expected " +
                         shape_str(want));
  }
}

}  // namespace

void Model::check_shapes() const {
  config.validate();
  const std::int64_t dm = config.d_model;
  const std::int64_t kvw = config.kv_width();
  check_tensor(token_embedding, {config.vocab_size, dm}, "token_embedding");
  if (static_cast<std::int64_t>(layers.size()) != config.n_layers) {
    throw DimensionError("layer count " + std::to_string(layers.size()) + " != n_layers " +
                         std::to_string(config.n_layers));
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerWeights& l = layers[i];
    const std::string p = "layers." + std::to_string(i) + ".";
    check_tensor(l.wq, {dm, dm}, p + "wq");
    check_tensor(l.wk, {kvw, dm}, p + "wk");
    check_tensor(l.wv, {kvw, dm}, p + "wv");
    check_tensor(l.wo, {dm, dm}, p + "wo");
    check_tensor(l.w_gate, {config.d_ff, dm}, p + "w_gate");
    check_tensor(l.w_up, {config.d_ff, dm}, p + "w_up");
    check_tensor(l.w_down, {dm, config.d_ff}, p + "w_down");
    check_tensor(l.attn_norm_gain, {dm}, p + "attn_norm");
    if (config.block_style == BlockStyle::kParallel) {
      if (!l.mlp_norm_gain.empty()) {
        throw DimensionError(p + "mlp_norm must be absent in a parallel block");
      }
    } else {
      check_tensor(l.mlp_norm_gain, {dm}, p + "mlp_norm");
    }
  }
  check_tensor(final_norm_gain, {dm}, "final_norm");
  check_tensor(output_proj, {config.vocab_size, dm}, "output_proj");
}

Model init_model(const ModelConfig& config) {
  config.validate();
  Model m;
  m.config = config;
  SeededRng rng(config.seed);
  const float sd = 0.02f;
  const std::int64_t dm = config.d_model;
  const std::int64_t kvw = config.kv_width();

  m.token_embedding = gaussian_fill(rng, {config.vocab_size, dm}, 0.0f, sd);
  m.layers.resize(static_cast<std::size_t>(config.n_layers));
  for (LayerWeights& l : m.layers) {
    l.wq = gaussian_fill(rng, {dm, dm}, 0.0f, sd);
    l.wk = gaussian_fill(rng, {kvw, dm}, 0.0f, sd);
    l.wv = gaussian_fill(rng, {kvw, dm}, 0.0f, sd);
    l.wo = gaussian_fill(rng, {dm, dm}, 0.0f, sd);
    l.w_gate = gaussian_fill(rng, {config.d_ff, dm}, 0.0f, sd);
    l.w_up = gaussian_fill(rng, {config.d_ff, dm}, 0.0f, sd);
    l.w_down = gaussian_fill(rng, {dm, config.d_ff}, 0.0f, sd);
    l.attn_norm_gain = Tensor::full({dm}, 1.0f);
    if (config.block_style == BlockStyle::kSequential) {
      l.mlp_norm_gain = Tensor::full({dm}, 1.0f);
    }
  }
  m.final_norm_gain = Tensor::full({dm}, 1.0f);
  m.output_proj = gaussian_fill(rng, {config.vocab_size, dm}, 0.0f, sd);
  m.check_shapes();
  return m;
}

namespace {

template <typename ModelT, typename TensorPtr>
std::vector<std::pair<std::string, TensorPtr>> enumerate_tensors(ModelT& m) {
  std::vector<std::pair<std::string, TensorPtr>> out;
  out.emplace_back("token_embedding", &m.token_embedding);
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    auto& l = m.layers[i];
    const std::string p = "layers." + std::to_string(i) + ".";
    out.emplace_back(p + "wq", &l.wq);
    out.emplace_back(p + "wk", &l.wk);
    out.emplace_back(p + "wv", &l.wv);
    out.emplace_back(p + "wo", &l.wo);
    out.emplace_back(p + "w_gate", &l.w_gate);
    out.emplace_back(p + "w_up", &l.w_up);
    out.emplace_back(p + "w_down", &l.w_down);
    out.emplace_back(p + "attn_norm", &l.attn_norm_gain);
    if (m.config.block_style != BlockStyle::kParallel) {
      out.emplace_back(p + "mlp_norm", &l.mlp_norm_gain);
    }
  }
  out.emplace_back("final_norm", &m.final_norm_gain);
  out.emplace_back("output_proj", &m.output_proj);
  return out;
}

}  // namespace

std::vector<std::pair<std::string, const Tensor*>> named_tensors(const Model& m) {
  return enumerate_tensors<const Model, const Tensor*>(m);
}

std::vector<std::pair<std::string, Tensor*>> named_tensors(Model& m) {
  return enumerate_tensors<Model, Tensor*>(m);
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view s) {
  return fnv1a64(std::span<const unsigned char>(
      reinterpret_cast<const unsigned char*>(s.data()), s.size()));
}

namespace {

std::uint64_t fnv1a64_continue(std::uint64_t h, const void* data, std::size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t model_fingerprint(const Model& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [name, tensor] : named_tensors(m)) {
    h = fnv1a64_continue(h, name.data(), name.size());
    h = fnv1a64_continue(h, tensor->data(), sizeof(float) * static_cast<std::size_t>(tensor->numel()));
  }
  return h;
}

}  // namespace ttlm
