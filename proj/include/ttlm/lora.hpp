#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ttlm/model.hpp"
#include "ttlm/tensor.hpp"

namespace ttlm {

// Low-rank update pair for one frozen projection W [d_out, d_in]:
// effective weight is W + (alpha / rank) * B A with A [rank, d_in],
// B [d_out, rank]. A starts N(0, 0.02) seeded, B starts zero, so a fresh
// adapter is exactly neutral.
struct LoraConfig {
  std::int64_t rank = 0;  // required, no default
  float alpha = 32.0f;
  float dropout = 0.05f;            // applied to the adapter input, training only
  std::vector<std::string> targets;  // projection kinds: "wq", "wk", "wv", "wo"
  std::uint64_t seed = 0;

  float scaling() const { return alpha / static_cast<float>(rank); }
  void validate() const;
};

struct LoraAdapter {
  std::string target;  // canonical tensor name, e.g. "layers.3.wq"
  Tensor a;            // [rank, d_in]
  Tensor b;            // [d_out, rank]
};

struct LoraSet {
  LoraConfig config;
  std::vector<LoraAdapter> adapters;  // canonical model-tensor order

  const LoraAdapter* find(const std::string& target) const;
  std::int64_t trainable_params() const;
  float scaling() const { return config.scaling(); }
};

// Expands projection kinds to per-layer tensor names in canonical order.
// Unknown kinds (anything but wq/wk/wv/wo) raise ConfigError.
std::vector<std::string> expand_targets(const ModelConfig& config,
                                        const std::vector<std::string>& kinds);

// Default target set: attention query and value projections.
std::vector<std::string> default_target_kinds();

LoraSet init_lora(const Model& model, const LoraConfig& config);

// y = x W^T + scaling * (x A^T) B^T. Inference path: no dropout.
Tensor lora_linear(const Tensor& x, const Tensor& w, const LoraAdapter& ad, float scaling);

// Folds every adapter into its base weight: W' = W + scaling * B A.
Model merge_lora(const Model& model, const LoraSet& set);

}  // namespace ttlm
