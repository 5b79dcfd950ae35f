#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ttlm/tensor.hpp"

namespace ttlm {

// Residual wiring of one block: sequential applies attention then MLP with a
// norm before each; parallel computes both off one shared norm and adds both
// into the residual stream.
enum class BlockStyle : std::uint8_t { kSequential = 0, kParallel = 1 };

struct ModelConfig {
  std::int64_t d_model = 0;
  std::int64_t n_layers = 0;
  std::int64_t n_heads = 0;
  std::int64_t n_kv_heads = 0;
  std::int64_t d_ff = 0;
  std::int64_t vocab_size = 0;
  std::int64_t window = 0;  // sliding-window width; 0 = full causal
  float rope_base = 10000.0f;
  float norm_eps = 1e-5f;
  BlockStyle block_style = BlockStyle::kSequential;
  std::uint64_t seed = 0;

  std::int64_t d_head() const { return d_model / n_heads; }
  std::int64_t kv_width() const { return n_kv_heads * d_head(); }

  void validate() const;  // throws ConfigError on any inconsistency
};

// Projections are stored [d_out, d_in] and applied as y = x * W^T.
struct LayerWeights {
  Tensor wq;              // [n_heads * d_head, d_model]
  Tensor wk;              // [n_kv_heads * d_head, d_model]
  Tensor wv;              // [n_kv_heads * d_head, d_model]
  Tensor wo;              // [d_model, n_heads * d_head]
  Tensor w_gate;          // [d_ff, d_model]
  Tensor w_up;            // [d_ff, d_model]
  Tensor w_down;          // [d_model, d_ff]
  Tensor attn_norm_gain;  // [d_model]; the only norm in a parallel block
  Tensor mlp_norm_gain;   // [d_model]; empty under BlockStyle::kParallel
};

struct Model {
  ModelConfig config;
  Tensor token_embedding;  // [vocab_size, d_model]
  std::vector<LayerWeights> layers;
  Tensor final_norm_gain;  // [d_model]
  Tensor output_proj;      // [vocab_size, d_model]

  // Full shape audit against config; throws DimensionError naming the tensor.
  void check_shapes() const;
};

// Seeded N(0, 0.02) projections and embeddings, norm gains at 1. The draw
// order is the canonical tensor order, so one seed fixes every value.
Model init_model(const ModelConfig& config);

// Canonical (name, tensor) enumeration: token_embedding, each layer's
// wq wk wv wo w_gate w_up w_down attn_norm [mlp_norm], final_norm,
// output_proj. Serialization, hashing, and adapter targets all key off it.
std::vector<std::pair<std::string, const Tensor*>> named_tensors(const Model& m);
std::vector<std::pair<std::string, Tensor*>> named_tensors(Model& m);

// FNV-1a 64-bit.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes);
std::uint64_t fnv1a64(std::string_view s);

// Order-sensitive digest over tensor names and float payloads; any weight
// change moves it.
std::uint64_t model_fingerprint(const Model& m);

}  // namespace ttlm
