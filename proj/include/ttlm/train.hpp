#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ttlm/lora.hpp"
#include "ttlm/model.hpp"
#include "ttlm/tensor.hpp"

namespace ttlm {

struct InstructionExample {
  std::string instruction;
  std::string response;
};

// Marks the instruction/response boundary inside a training sequence.
inline constexpr const char* kResponseSeparator = "\n### Resposta:\n";

// BOS + instruction + separator + response + EOS. target_mask[i] says whether
// the prediction of ids[i+1] counts toward the loss (response and EOS only).
struct TokenizedExample {
  std::vector<std::int64_t> ids;
  std::vector<std::uint8_t> target_mask;  // length ids.size() - 1
};

TokenizedExample build_training_sequence(const InstructionExample& ex);

// Mean masked cross-entropy over the batch plus gradients for every adapter
// pair, aligned index-for-index with set.adapters. Base weights receive no
// gradient. dropout_rng == nullptr (or dropout == 0) disables dropout;
// otherwise each adapted projection's input gets an independent inverted
// dropout mask per example, drawn in canonical order.
struct LossGrads {
  double loss = 0.0;
  std::int64_t masked_positions = 0;
  std::vector<Tensor> d_a;
  std::vector<Tensor> d_b;
};

LossGrads lora_loss_and_grads(const Model& model, const LoraSet& set,
                              std::span<const TokenizedExample> batch,
                              SeededRng* dropout_rng = nullptr);

// Mean masked cross-entropy over a whole corpus, dropout off, no gradients.
double corpus_loss(const Model& model, const LoraSet& set,
                   std::span<const InstructionExample> examples);

struct TrainConfig {
  std::int64_t steps = 200;
  std::int64_t batch_size = 8;
  float lr = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float adam_eps = 1e-8f;
  std::uint64_t seed = 0;  // dropout stream
};

struct FinetuneResult {
  LoraSet adapters;
  std::vector<double> step_losses;  // batch loss before each update
  double initial_loss = 0.0;        // corpus loss with fresh (neutral) adapters
  double final_loss = 0.0;          // corpus loss after the last step
};

// Adam over adapter pairs only; batches walk the corpus in order, wrapping.
FinetuneResult finetune(const Model& model, std::span<const InstructionExample> examples,
                        const LoraConfig& lora_config, const TrainConfig& train_config);

}  // namespace ttlm
