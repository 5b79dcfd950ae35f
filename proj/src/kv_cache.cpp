#include "ttlm/kv_cache.hpp"

#include <algorithm>
#include <cstring>

#include "ttlm/errors.hpp"

namespace ttlm {

KVCache::KVCache(std::int64_t n_layers, std::int64_t kv_width, std::int64_t window)
    : kv_width_(kv_width), window_(window) {
  if (n_layers <= 0) throw ConfigError("kv cache: layer count must be positive");
  if (kv_width <= 0) throw ConfigError("kv cache: kv width must be positive");
  if (window < 0) throw ConfigError("kv cache: window must be >= 0");
  layers_.resize(static_cast<std::size_t>(n_layers));
  if (window_ > 0) {
    for (Layer& l : layers_) {
      l.k.resize(static_cast<std::size_t>(window_ * kv_width_), 0.0f);
      l.v.resize(static_cast<std::size_t>(window_ * kv_width_), 0.0f);
    }
  }
}

const KVCache::Layer& KVCache::layer_at(std::int64_t layer) const {
  if (layer < 0 || layer >= n_layers()) {
    throw UsageError("kv cache: layer " + std::to_string(layer) + " out of range");
  }
  return layers_[static_cast<std::size_t>(layer)];
}

KVCache::Layer& KVCache::layer_at(std::int64_t layer) {
  return const_cast<Layer&>(static_cast<const KVCache*>(this)->layer_at(layer));
}

void KVCache::write(std::int64_t layer, std::int64_t pos, std::span<const float> k,
                    std::span<const float> v) {
  Layer& l = layer_at(layer);
  if (pos != l.next) {
    throw UsageError("kv cache: out-of-order write at position " + std::to_string(pos) +
                     ", expected " + std::to_string(l.next));
  }
  if (static_cast<std::int64_t>(k.size()) != kv_width_ ||
      static_cast<std::int64_t>(v.size()) != kv_width_) {
    throw DimensionError("kv cache: row width must be " + std::to_string(kv_width_));
  }
  if (window_ == 0) {
    l.k.insert(l.k.end(), k.begin(), k.end());
    l.v.insert(l.v.end(), v.begin(), v.end());
  } else {
    const std::int64_t slot = pos % window_;
    std::copy(k.begin(), k.end(), l.k.begin() + slot * kv_width_);
    std::copy(v.begin(), v.end(), l.v.begin() + slot * kv_width_);
  }
  l.next = pos + 1;
}

std::int64_t KVCache::next_pos(std::int64_t layer) const { return layer_at(layer).next; }

std::int64_t KVCache::held_begin(std::int64_t layer) const {
  const Layer& l = layer_at(layer);
  if (window_ == 0) return 0;
  return std::max<std::int64_t>(0, l.next - window_);
}

std::int64_t KVCache::held_count(std::int64_t layer) const {
  return layer_at(layer).next - held_begin(layer);
}

KVCache::View KVCache::gather(std::int64_t layer) const {
  const Layer& l = layer_at(layer);
  const std::int64_t begin = held_begin(layer);
  const std::int64_t count = l.next - begin;
  View view{Tensor({std::max<std::int64_t>(count, 1), kv_width_}),
            Tensor({std::max<std::int64_t>(count, 1), kv_width_}),
            {}};
  if (count == 0) {
    view.k = Tensor();
    view.v = Tensor();
    return view;
  }
  view.positions.reserve(static_cast<std::size_t>(count));
  for (std::int64_t pos = begin; pos < l.next; ++pos) {
    const std::int64_t src = (window_ == 0 ? pos : pos % window_) * kv_width_;
    const std::int64_t dst = (pos - begin) * kv_width_;
    std::memcpy(view.k.data() + dst, l.k.data() + src, sizeof(float) * kv_width_);
    std::memcpy(view.v.data() + dst, l.v.data() + src, sizeof(float) * kv_width_);
    view.positions.push_back(pos);
  }
  return view;
}

}  // namespace ttlm
