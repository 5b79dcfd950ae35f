#pragma once

#include <cstdint>
#include <string>

#include "ttlm/lora.hpp"
#include "ttlm/model.hpp"

namespace ttlm {

// Binary container, little-endian throughout:
//   magic[4] ("TTLM" weights / "TTLA" adapters), u32 version, u32 tensor
//   count, then per tensor u32 name length, name bytes, u8 rank, u64 extents,
//   float32 row-major payload, then a trailing config block.
// Weights config block: u64 d_model, n_layers, n_heads, n_kv_heads, d_ff,
//   vocab_size, window; f32 rope_base, norm_eps; u8 block_style; u64 seed.
// Adapter config block: u64 rank; f32 alpha, dropout; u32 kind count, each
//   kind as u32 length + bytes; u64 seed.
// Unknown magic or version is rejected; truncated input raises ParseError.

inline constexpr std::uint32_t kContainerVersion = 1;

void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

void save_adapters(const LoraSet& set, const std::string& path);
LoraSet load_adapters(const std::string& path);

}  // namespace ttlm
