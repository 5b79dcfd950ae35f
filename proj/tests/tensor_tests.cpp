#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <vector>

#include "ttlm/errors.hpp"
#include "ttlm/ops.hpp"
#include "ttlm/tensor.hpp"
#include "ttlm/tokenizer.hpp"

using namespace ttlm;

TEST_CASE("tensor shape bookkeeping") {
  Tensor t({2, 3});
  CHECK(t.rank() == 2);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t.numel() == 6);
  for (std::int64_t i = 0; i < t.numel(); ++i) CHECK(t(i) == 0.0f);

  t(1, 2) = 5.0f;
  CHECK(t(5) == 5.0f);
  CHECK(t.row(1)[2] == 5.0f);

  const Tensor f = Tensor::full({4}, 2.5f);
  for (float v : f.values()) CHECK(v == 2.5f);

  CHECK_THROWS_AS(Tensor({2, -1}), DimensionError);
  CHECK_THROWS_AS(Tensor({2, 3}, {1.0f}), DimensionError);
}

TEST_CASE("matmul matches a scalar triple loop bit for bit") {
  SeededRng rng(1);
  const Tensor a = gaussian_fill(rng, {5, 7}, 0.0f, 1.0f);
  const Tensor b = gaussian_fill(rng, {7, 4}, 0.0f, 1.0f);
  const Tensor c = matmul(a, b);
  REQUIRE(c.rows() == 5);
  REQUIRE(c.cols() == 4);
  for (std::int64_t i = 0; i < 5; ++i) {
    for (std::int64_t j = 0; j < 4; ++j) {
      float acc = 0.0f;
      for (std::int64_t k = 0; k < 7; ++k) acc += a(i, k) * b(k, j);
      CHECK(c(i, j) == acc);  // identical accumulation order => identical bits
    }
  }
  CHECK_THROWS_AS(matmul(a, a), DimensionError);
}

TEST_CASE("linear applies the transposed weight") {
  SeededRng rng(2);
  const Tensor x = gaussian_fill(rng, {3, 6}, 0.0f, 1.0f);
  const Tensor w = gaussian_fill(rng, {4, 6}, 0.0f, 1.0f);  // [d_out, d_in]
  const Tensor y = linear(x, w);
  REQUIRE(y.rows() == 3);
  REQUIRE(y.cols() == 4);
  for (std::int64_t i = 0; i < 3; ++i) {
    for (std::int64_t o = 0; o < 4; ++o) {
      float acc = 0.0f;
      for (std::int64_t k = 0; k < 6; ++k) acc += x(i, k) * w(o, k);
      CHECK(y(i, o) == acc);
    }
  }
  CHECK_THROWS_AS(linear(x, gaussian_fill(rng, {4, 5}, 0.0f, 1.0f)), DimensionError);
}

TEST_CASE("softmax rows sum to one and survive huge scores") {
  Tensor x({2, 3}, {1.0f, 2.0f, 3.0f, 10000.0f, 0.0f, -10000.0f});
  const Tensor p = softmax_rows(x);
  for (std::int64_t r = 0; r < 2; ++r) {
    double sum = 0.0;
    for (std::int64_t c = 0; c < 3; ++c) {
      CHECK(std::isfinite(p(r, c)));
      sum += p(r, c);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
  // the dominated entries vanish, the max takes everything
  CHECK(p(1, 0) == doctest::Approx(1.0));
  CHECK(p(1, 1) == 0.0f);
  // manual check of an ordinary row
  const double e1 = std::exp(1.0f - 3.0f), e2 = std::exp(2.0f - 3.0f), e3 = 1.0;
  CHECK(p(0, 0) == doctest::Approx(e1 / (e1 + e2 + e3)).epsilon(1e-6));
}

TEST_CASE("seeded rng is reproducible and well behaved") {
  SeededRng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  CHECK(a.next_u64() != c.next_u64());

  SeededRng u(7);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.next_unit();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }

  SeededRng g(11);
  double mean = 0.0, m2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = g.next_gaussian();
    mean += x;
    m2 += x * x;
  }
  mean /= n;
  const double var = m2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("gaussian_fill is seed-deterministic") {
  SeededRng r1(5), r2(5);
  const Tensor t1 = gaussian_fill(r1, {3, 3}, 0.0f, 0.02f);
  const Tensor t2 = gaussian_fill(r2, {3, 3}, 0.0f, 0.02f);
  CHECK(std::memcmp(t1.data(), t2.data(), sizeof(float) * 9) == 0);
  SeededRng r3(6);
  const Tensor t3 = gaussian_fill(r3, {3, 3}, 0.0f, 0.02f);
  CHECK(std::memcmp(t1.data(), t3.data(), sizeof(float) * 9) != 0);
}

TEST_CASE("argmax picks the lowest index on ties") {
  const std::vector<float> v = {1.0f, 3.0f, 3.0f, 2.0f};
  CHECK(argmax(v) == 1);
  CHECK_THROWS_AS(argmax(std::span<const float>{}), UsageError);

  Tensor logits({2, 3}, {9.0f, 0.0f, 0.0f, 0.0f, 0.0f, 4.0f});
  CHECK(argmax_last(logits) == 2);  // reads the final row only
}

TEST_CASE("elementwise helpers check shapes") {
  Tensor a({2, 2}, {1, 2, 3, 4});
  Tensor b({2, 2}, {5, 6, 7, 8});
  const Tensor s = add(a, b);
  CHECK(s(3) == 12.0f);
  const Tensor m = mul(a, b);
  CHECK(m(2) == 21.0f);
  const Tensor sc = scale(a, 0.5f);
  CHECK(sc(1) == 1.0f);
  CHECK_THROWS_AS(add(a, Tensor({4})), DimensionError);
}

TEST_CASE("rms_norm matches a per-row oracle") {
  SeededRng rng(3);
  const Tensor x = gaussian_fill(rng, {4, 8}, 0.0f, 1.0f);
  Tensor gain({8});
  for (std::int64_t i = 0; i < 8; ++i) gain(i) = 0.5f + 0.1f * static_cast<float>(i);
  const float eps = 1e-5f;
  const Tensor y = rms_norm(x, gain, eps);
  for (std::int64_t r = 0; r < 4; ++r) {
    double ss = 0.0;
    for (std::int64_t c = 0; c < 8; ++c) ss += static_cast<double>(x(r, c)) * x(r, c);
    const float inv = 1.0f / std::sqrt(static_cast<float>(ss / 8.0) + eps);
    for (std::int64_t c = 0; c < 8; ++c) {
      CHECK(y(r, c) == doctest::Approx(x(r, c) * inv * gain(c)).epsilon(1e-7));
    }
  }
  CHECK_THROWS_AS(rms_norm(x, Tensor({4}), eps), DimensionError);
}

TEST_CASE("rms_norm call counter advances per invocation") {
  const std::uint64_t before = rms_norm_call_count();
  const Tensor x = Tensor::full({1, 4}, 1.0f);
  const Tensor g = Tensor::full({4}, 1.0f);
  rms_norm(x, g, 1e-5f);
  rms_norm(x, g, 1e-5f);
  CHECK(rms_norm_call_count() == before + 2);
}

TEST_CASE("silu matches its closed form") {
  Tensor x({1, 5}, {-20.0f, -1.0f, 0.0f, 1.0f, 20.0f});
  const Tensor y = silu(x);
  CHECK(y(0, 2) == 0.0f);
  for (std::int64_t i = 0; i < 5; ++i) {
    const float v = x(0, i);
    const float sig = 1.0f / (1.0f + std::exp(-v));
    CHECK(y(0, i) == doctest::Approx(v * sig).epsilon(1e-6));
  }
  CHECK(y(0, 4) == doctest::Approx(20.0f).epsilon(1e-6));   // ~identity for large x
  CHECK(std::abs(y(0, 0)) < 1e-6f);                         // ~zero for very negative x
}

TEST_CASE("swiglu composes gate, value, and down projections") {
  SeededRng rng(4);
  const Tensor x = gaussian_fill(rng, {2, 4}, 0.0f, 1.0f);
  const Tensor w_gate = gaussian_fill(rng, {6, 4}, 0.0f, 0.5f);
  const Tensor w_up = gaussian_fill(rng, {6, 4}, 0.0f, 0.5f);
  const Tensor w_down = gaussian_fill(rng, {4, 6}, 0.0f, 0.5f);
  const Tensor y = swiglu_mlp(x, w_gate, w_up, w_down);
  const Tensor expect = linear(mul(silu(linear(x, w_gate)), linear(x, w_up)), w_down);
  REQUIRE(y.same_shape(expect));
  for (std::int64_t i = 0; i < y.numel(); ++i) CHECK(y(i) == expect(i));
}

TEST_CASE("rotary rotation is a plain 2d rotation for one pair") {
  // with d_head == 2 the single frequency is base^0 == 1, angle == position
  Tensor x({1, 2}, {1.0f, 0.0f});
  rope_apply_row(x.row(0), 1, 3, 10000.0f);
  CHECK(x(0, 0) == doctest::Approx(std::cos(3.0f)).epsilon(1e-6));
  CHECK(x(0, 1) == doctest::Approx(std::sin(3.0f)).epsilon(1e-6));
}

TEST_CASE("rotary rotation is invertible by the negative position") {
  SeededRng rng(9);
  Tensor x = gaussian_fill(rng, {1, 16}, 0.0f, 1.0f);
  const Tensor original = x;
  rope_apply_row(x.row(0), 2, 57, 10000.0f);
  rope_apply_row(x.row(0), 2, -57, 10000.0f);
  for (std::int64_t i = 0; i < 16; ++i) {
    CHECK(x(0, i) == doctest::Approx(original(0, i)).epsilon(1e-5));
  }
}

TEST_CASE("rotary rotation applies per head and rejects odd head width") {
  // two heads of width 2: both pairs rotate by the same angle independently
  Tensor x({1, 4}, {1.0f, 0.0f, 0.0f, 1.0f});
  rope_apply_row(x.row(0), 2, 1, 10000.0f);
  CHECK(x(0, 0) == doctest::Approx(std::cos(1.0f)).epsilon(1e-6));
  CHECK(x(0, 1) == doctest::Approx(std::sin(1.0f)).epsilon(1e-6));
  CHECK(x(0, 2) == doctest::Approx(-std::sin(1.0f)).epsilon(1e-6));
  CHECK(x(0, 3) == doctest::Approx(std::cos(1.0f)).epsilon(1e-6));

  Tensor odd({1, 3});
  CHECK_THROWS_AS(rope_apply_row(odd.row(0), 1, 0, 10000.0f), DimensionError);

  // the whole-tensor form rotates every row at the same position
  Tensor m({2, 4}, {1, 0, 0, 1, 0, 1, 1, 0});
  const Tensor rotated = rope_apply(m, 2, 5, 10000.0f);
  Tensor row0({1, 4}, {1, 0, 0, 1});
  rope_apply_row(row0.row(0), 2, 5, 10000.0f);
  for (std::int64_t c = 0; c < 4; ++c) CHECK(rotated(0, c) == row0(0, c));
}

TEST_CASE("kv group index maps contiguous query-head groups") {
  // 8 query heads over 2 kv heads: first four share kv 0, last four kv 1
  for (std::int64_t h = 0; h < 4; ++h) CHECK(kv_group_index(h, 8, 2) == 0);
  for (std::int64_t h = 4; h < 8; ++h) CHECK(kv_group_index(h, 8, 2) == 1);
  // endpoints
  for (std::int64_t h = 0; h < 4; ++h) CHECK(kv_group_index(h, 4, 4) == h);
  for (std::int64_t h = 0; h < 4; ++h) CHECK(kv_group_index(h, 4, 1) == 0);
  CHECK_THROWS_AS(kv_group_index(0, 4, 3), ConfigError);
}

TEST_CASE("window visibility rule") {
  // window 0: plain causal
  CHECK(swa_allowed(5, 0, 0));
  CHECK(swa_allowed(5, 5, 0));
  CHECK_FALSE(swa_allowed(5, 6, 0));
  // window 1: self only
  CHECK(swa_allowed(5, 5, 1));
  CHECK_FALSE(swa_allowed(5, 4, 1));
  // window 3 at query 5: keys 3, 4, 5
  CHECK_FALSE(swa_allowed(5, 2, 3));
  CHECK(swa_allowed(5, 3, 3));
  CHECK(swa_allowed(5, 5, 3));
  CHECK_FALSE(swa_allowed(5, 6, 3));
  // early positions clamp at zero
  CHECK(swa_allowed(1, 0, 3));
}

TEST_CASE("byte tokenizer round trip") {
  const std::string text = "Olá, você!";  // multi-byte utf-8 passes through as raw bytes
  const auto ids = tokenize(text);
  CHECK(ids.size() == text.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    CHECK(ids[i] == static_cast<std::int64_t>(static_cast<unsigned char>(text[i])) + kByteOffset);
  }
  CHECK(detokenize(ids) == text);

  CHECK(tokenize("").empty());
  CHECK(tokenize("a")[0] == 100);  // 'a' == 97

  // specials are skipped on the way out
  const std::vector<std::int64_t> with_specials = {kBosId, 100, kPadId, 101, kEosId};
  CHECK(detokenize(with_specials) == "ab");

  const std::vector<std::int64_t> bad = {259};
  CHECK_THROWS_AS(detokenize(bad), DataError);
  const std::vector<std::int64_t> negative = {-1};
  CHECK_THROWS_AS(detokenize(negative), DataError);
}

TEST_CASE("every byte value survives the round trip") {
  std::string all;
  for (int b = 0; b < 256; ++b) all.push_back(static_cast<char>(b));
  CHECK(detokenize(tokenize(all)) == all);
}
