#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ttlm/tensor.hpp"

namespace ttlm {

// Per-layer key/value store for incremental decoding. With window == 0 every
// written row is kept; with window == W only the last W positions are held,
// in a fixed ring of W slots indexed by pos % W (no data movement on evict).
class KVCache {
 public:
  KVCache(std::int64_t n_layers, std::int64_t kv_width, std::int64_t window);

  // Rows must arrive in position order per layer: pos == next_pos(layer).
  void write(std::int64_t layer, std::int64_t pos, std::span<const float> k,
             std::span<const float> v);

  // Number of positions written so far (== next position to write).
  std::int64_t next_pos(std::int64_t layer) const;
  // Oldest absolute position still held.
  std::int64_t held_begin(std::int64_t layer) const;
  std::int64_t held_count(std::int64_t layer) const;

  // Dense copy of the held range in ascending absolute position, plus the
  // absolute position of each row.
  struct View {
    Tensor k;
    Tensor v;
    std::vector<std::int64_t> positions;
  };
  View gather(std::int64_t layer) const;

  std::int64_t n_layers() const { return static_cast<std::int64_t>(layers_.size()); }
  std::int64_t kv_width() const { return kv_width_; }
  std::int64_t window() const { return window_; }

 private:
  struct Layer {
    std::vector<float> k;
    std::vector<float> v;
    std::int64_t next = 0;
  };

  const Layer& layer_at(std::int64_t layer) const;
  Layer& layer_at(std::int64_t layer);

  std::vector<Layer> layers_;
  std::int64_t kv_width_;
  std::int64_t window_;
};

}  // namespace ttlm
