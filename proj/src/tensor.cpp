#include "ttlm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ttlm {

std::string shape_str(const std::vector<std::int64_t>& shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

namespace {

std::int64_t checked_numel(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (std::int64_t e : shape) {
    if (e <= 0) throw DimensionError("tensor extent must be positive, got shape " + shape_str(shape));
    n *= e;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::int64_t> shape) : shape_(std::move(shape)) {
  data_.assign(static_cast<std::size_t>(checked_numel(shape_)), 0.0f);
}

Tensor::Tensor(std::vector<std::int64_t> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_numel(shape_) != static_cast<std::int64_t>(data_.size())) {
    throw DimensionError("data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str(shape_));
  }
}

Tensor Tensor::full(std::vector<std::int64_t> shape, float value) {
  Tensor t(std::move(shape));
  for (float& v : t.data_) v = value;
  return t;
}

std::int64_t Tensor::cols() const {
  if (shape_.empty()) throw UsageError("cols() on rank-0 tensor");
  return shape_.back();
}

std::int64_t Tensor::rows() const { return numel() / cols(); }

std::span<float> Tensor::row(std::int64_t r) {
  return std::span<float>(data_).subspan(static_cast<std::size_t>(r * cols()),
                                         static_cast<std::size_t>(cols()));
}

std::span<const float> Tensor::row(std::int64_t r) const {
  return std::span<const float>(data_).subspan(static_cast<std::size_t>(r * cols()),
                                               static_cast<std::size_t>(cols()));
}

std::uint64_t SeededRng::next_u64() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SeededRng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0,1] so the log is finite.
  double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  double u2 = next_unit();
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul shape mismatch: " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  }
  const std::int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  for (std::int64_t i = 0; i < m; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      float acc = 0.0f;
      for (std::int64_t p = 0; p < k; ++p) acc += a(i, p) * b(p, j);
      out(i, j) = acc;
    }
  }
  return out;
}

Tensor softmax_rows(const Tensor& x) {
  Tensor out(x.shape());
  const std::int64_t n = x.cols();
  for (std::int64_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto o = out.row(r);
    float mx = in[0];
    for (float v : in) mx = std::max(mx, v);
    float sum = 0.0f;
    for (std::int64_t j = 0; j < n; ++j) {
      o[static_cast<std::size_t>(j)] = std::exp(in[static_cast<std::size_t>(j)] - mx);
      sum += o[static_cast<std::size_t>(j)];
    }
    for (std::int64_t j = 0; j < n; ++j) o[static_cast<std::size_t>(j)] /= sum;
  }
  return out;
}

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + " shape mismatch: " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  for (std::int64_t i = 0; i < a.numel(); ++i) out(i) = a(i) + b(i);
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out(a.shape());
  for (std::int64_t i = 0; i < a.numel(); ++i) out(i) = a(i) * b(i);
  return out;
}

Tensor scale(const Tensor& a, float s) {
  Tensor out(a.shape());
  for (std::int64_t i = 0; i < a.numel(); ++i) out(i) = a(i) * s;
  return out;
}

Tensor gaussian_fill(SeededRng& rng, std::vector<std::int64_t> shape, float mean, float stddev) {
  if (stddev < 0.0f) throw UsageError("gaussian_fill stddev must be >= 0");
  Tensor out(std::move(shape));
  for (std::int64_t i = 0; i < out.numel(); ++i) {
    out(i) = static_cast<float>(mean + stddev * rng.next_gaussian());
  }
  return out;
}

std::int64_t argmax(std::span<const float> v) {
  if (v.empty()) throw UsageError("argmax over empty axis");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return static_cast<std::int64_t>(best);
}

std::int64_t argmax_last(const Tensor& x) {
  if (x.rank() < 1 || x.numel() == 0) throw UsageError("argmax_last over empty tensor");
  return argmax(x.row(x.rows() - 1));
}

}  // namespace ttlm
