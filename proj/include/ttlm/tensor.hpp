#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ttlm/errors.hpp"

namespace ttlm {

// Dense row-major float32 array with an explicit shape. Values are finite
// after every operation in this module; data.size() == product(shape) always.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::int64_t> shape);  // zero-filled
  Tensor(std::vector<std::int64_t> shape, std::vector<float> data);

  static Tensor zeros(std::vector<std::int64_t> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<std::int64_t> shape, float value);

  const std::vector<std::int64_t>& shape() const { return shape_; }
  std::int64_t rank() const { return static_cast<std::int64_t>(shape_.size()); }
  std::int64_t dim(std::int64_t i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  // Rank-2 view helpers: leading dims collapsed, last dim = cols.
  std::int64_t cols() const;
  std::int64_t rows() const;                       // numel / cols
  std::span<float> row(std::int64_t r);
  std::span<const float> row(std::int64_t r) const;

  float& operator()(std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  float operator()(std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }
  float& operator()(std::int64_t i, std::int64_t j) {
    return data_[static_cast<std::size_t>(i * cols() + j)];
  }
  float operator()(std::int64_t i, std::int64_t j) const {
    return data_[static_cast<std::size_t>(i * cols() + j)];
  }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

 private:
  std::vector<std::int64_t> shape_;
  std::vector<float> data_;
};

// SplitMix64 stream feeding Box-Muller. Identical seeds give identical
// streams; single-owner, not shareable across threads.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double next_unit();      // uniform [0, 1)
  double next_gaussian();  // standard normal

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// a[m,k] * b[k,n] -> [m,n]; accumulation fixed row-major, ascending k.
Tensor matmul(const Tensor& a, const Tensor& b);

// Row-wise exp(x - rowmax) / sum; rows sum to 1 for any finite input.
Tensor softmax_rows(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, float s);

Tensor gaussian_fill(SeededRng& rng, std::vector<std::int64_t> shape, float mean, float stddev);

// Index of the maximum, lowest index on ties.
std::int64_t argmax(std::span<const float> v);

// Argmax over the final axis at the last leading position (the greedy
// decoding selector: for [T, vocab] logits this reads row T-1).
std::int64_t argmax_last(const Tensor& x);

}  // namespace ttlm
