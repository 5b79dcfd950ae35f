#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ttlm/kv_cache.hpp"
#include "ttlm/lora.hpp"
#include "ttlm/model.hpp"
#include "ttlm/tensor.hpp"

namespace ttlm {

struct ForwardResult {
  Tensor hidden;  // [T, d_model], after the final norm
  Tensor logits;  // [T, vocab_size]
};

struct SessionOptions {
  // true: keys older than the window are physically dropped (ring buffer).
  // false: every key is kept and the window is enforced by the mask alone.
  // Identical outputs either way; the ring just bounds memory.
  bool rolling = true;
  const LoraSet* adapters = nullptr;
};

// Incremental decoding state over one model: feed token chunks in order,
// every call attends over held cache rows plus the chunk itself, then the
// chunk's keys/values enter the cache.
class DecodeSession {
 public:
  explicit DecodeSession(const Model& model, SessionOptions options = {});

  ForwardResult forward(std::span<const std::int64_t> ids);

  std::int64_t position() const { return position_; }
  const KVCache& cache() const { return cache_; }

 private:
  const Model& model_;
  SessionOptions options_;
  KVCache cache_;
  std::int64_t position_ = 0;
};

// Splits a prefill of `total` tokens into window-sized chunks (final chunk
// may be short). chunk == 0 means one undivided chunk.
std::vector<std::int64_t> chunk_sizes(std::int64_t total, std::int64_t chunk);

struct GenerateOptions {
  std::int64_t max_new = 64;
  bool stop_at_eos = true;
  SessionOptions session;
};

struct GenerateResult {
  std::vector<std::int64_t> tokens;  // generated ids (eos included when hit)
  Tensor step_logits;                // [steps, vocab_size], logits behind each pick
};

// Prefills the prompt in window-sized chunks, then picks argmax one token at
// a time. Prompt must be non-empty.
GenerateResult greedy_decode(const Model& model, std::span<const std::int64_t> prompt,
                             const GenerateOptions& options = {});

// BOS + prompt bytes in, generated bytes out (specials dropped).
std::string generate_text(const Model& model, const std::string& prompt,
                          const GenerateOptions& options = {});

}  // namespace ttlm
