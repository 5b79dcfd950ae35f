#include "ttlm/lora.hpp"

#include <algorithm>

#include "ttlm/errors.hpp"
#include "ttlm/ops.hpp"

namespace ttlm {

void LoraConfig::validate() const {
  if (rank <= 0) throw ConfigError("adapter rank must be positive (no default)");
  if (!(alpha > 0.0f)) throw ConfigError("adapter alpha must be positive");
  if (dropout < 0.0f || dropout >= 1.0f) {
    throw ConfigError("adapter dropout must be in [0, 1)");
  }
  if (targets.empty()) throw ConfigError("adapter target list must not be empty");
}

const LoraAdapter* LoraSet::find(const std::string& target) const {
  for (const LoraAdapter& ad : adapters) {
    if (ad.target == target) return &ad;
  }
  return nullptr;
}

std::int64_t LoraSet::trainable_params() const {
  std::int64_t n = 0;
  for (const LoraAdapter& ad : adapters) n += ad.a.numel() + ad.b.numel();
  return n;
}

std::vector<std::string> default_target_kinds() { return {"wq", "wv"}; }

std::vector<std::string> expand_targets(const ModelConfig& config,
                                        const std::vector<std::string>& kinds) {
  static const std::vector<std::string> known = {"wq", "wk", "wv", "wo"};
  for (const std::string& kind : kinds) {
    if (std::find(known.begin(), known.end(), kind) == known.end()) {
      throw ConfigError("unknown adapter target kind '" + kind +
                        "' (expected wq, wk, wv, or wo)");
    }
  }
  std::vector<std::string> names;
  for (std::int64_t i = 0; i < config.n_layers; ++i) {
    for (const std::string& kind : known) {
      if (std::find(kinds.begin(), kinds.end(), kind) != kinds.end()) {
        names.push_back("layers." + std::to_string(i) + "." + kind);
      }
    }
  }
  return names;
}

LoraSet init_lora(const Model& model, const LoraConfig& config) {
  config.validate();
  LoraSet set;
  set.config = config;
  SeededRng rng(config.seed);
  for (const std::string& name : expand_targets(model.config, config.targets)) {
    const Tensor* base = nullptr;
    for (const auto& [tname, tensor] : named_tensors(model)) {
      if (tname == name) {
        base = tensor;
        break;
      }
    }
    if (base == nullptr) throw ConfigError("adapter target '" + name + "' not found in model");
    const std::int64_t d_out = base->dim(0);
    const std::int64_t d_in = base->dim(1);
    LoraAdapter ad;
    ad.target = name;
    ad.a = gaussian_fill(rng, {config.rank, d_in}, 0.0f, 0.02f);
    ad.b = Tensor({d_out, config.rank});
    set.adapters.push_back(std::move(ad));
  }
  return set;
}

Tensor lora_linear(const Tensor& x, const Tensor& w, const LoraAdapter& ad, float scaling) {
  Tensor y = linear(x, w);
  Tensor u = linear(x, ad.a);      // [T, rank]
  Tensor delta = linear(u, ad.b);  // [T, d_out]
  return add(y, scale(delta, scaling));
}

Model merge_lora(const Model& model, const LoraSet& set) {
  set.config.validate();
  Model merged = model;
  for (const LoraAdapter& ad : set.adapters) {
    Tensor* base = nullptr;
    for (auto& [tname, tensor] : named_tensors(merged)) {
      if (tname == ad.target) {
        base = tensor;
        break;
      }
    }
    if (base == nullptr) throw ConfigError("adapter target '" + ad.target + "' not found in model");
    if (ad.b.dim(0) != base->dim(0) || ad.a.dim(1) != base->dim(1) ||
        ad.a.dim(0) != ad.b.dim(1)) {
      throw DimensionError("adapter shapes " + shape_str(ad.b.shape()) + " x " +
                           shape_str(ad.a.shape()) + " do not match target " +
                           shape_str(base->shape()));
    }
    Tensor delta = matmul(ad.b, ad.a);  // [d_out, d_in]
    *base = add(*base, scale(delta, set.scaling()));
  }
  merged.check_shapes();
  return merged;
}

}  // namespace ttlm
