#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "ttlm/errors.hpp"
#include "ttlm/lora.hpp"
#include "ttlm/model.hpp"
#include "ttlm/ops.hpp"
#include "ttlm/serialize.hpp"
#include "ttlm/tensor.hpp"
#include "ttlm/tokenizer.hpp"
#include "ttlm/train.hpp"

using namespace ttlm;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.d_model = 16;
  cfg.n_layers = 2;
  cfg.n_heads = 4;
  cfg.n_kv_heads = 2;
  cfg.d_ff = 24;
  cfg.vocab_size = kVocabSize;
  cfg.seed = 3;
  return cfg;
}

LoraConfig tiny_lora(std::int64_t rank) {
  LoraConfig lc;
  lc.rank = rank;
  lc.alpha = 32.0f;
  lc.dropout = 0.0f;
  lc.targets = default_target_kinds();
  lc.seed = 5;
  return lc;
}

}  // namespace

TEST_CASE("target expansion walks layers in canonical kind order") {
  ModelConfig cfg = tiny_config();
  const auto names = expand_targets(cfg, {"wv", "wq"});  // input order does not matter
  const std::vector<std::string> want = {"layers.0.wq", "layers.0.wv", "layers.1.wq",
                                         "layers.1.wv"};
  CHECK(names == want);

  const auto all = expand_targets(cfg, {"wq", "wk", "wv", "wo"});
  CHECK(all.size() == 8);
  CHECK(all[0] == "layers.0.wq");
  CHECK(all[3] == "layers.0.wo");

  CHECK_THROWS_AS(expand_targets(cfg, {"w_gate"}), ConfigError);
  CHECK(default_target_kinds() == std::vector<std::string>({"wq", "wv"}));
}

TEST_CASE("lora config validation") {
  LoraConfig lc = tiny_lora(4);
  lc.validate();
  lc.rank = 0;
  CHECK_THROWS_AS(lc.validate(), ConfigError);
  lc = tiny_lora(4);
  lc.dropout = 1.0f;
  CHECK_THROWS_AS(lc.validate(), ConfigError);
  lc = tiny_lora(4);
  lc.targets = {};
  CHECK_THROWS_AS(lc.validate(), ConfigError);
  CHECK(tiny_lora(8).scaling() == 4.0f);  // 32 / 8
}

TEST_CASE("fresh adapters have seeded A and zero B") {
  const Model m = init_model(tiny_config());
  const LoraSet s1 = init_lora(m, tiny_lora(4));
  const LoraSet s2 = init_lora(m, tiny_lora(4));
  REQUIRE(s1.adapters.size() == 4);  // 2 layers x {wq, wv}
  CHECK(s1.adapters[0].target == "layers.0.wq");
  CHECK(s1.adapters[1].target == "layers.0.wv");

  for (std::size_t i = 0; i < s1.adapters.size(); ++i) {
    const LoraAdapter& ad = s1.adapters[i];
    // wq spans [d_model, d_model]; wv spans [kv_width, d_model] = [8, 16]
    const std::int64_t d_out = ad.target.ends_with("wq") ? 16 : 8;
    CHECK(ad.a.dim(0) == 4);
    CHECK(ad.a.dim(1) == 16);
    CHECK(ad.b.dim(0) == d_out);
    CHECK(ad.b.dim(1) == 4);
    for (float v : ad.b.values()) CHECK(v == 0.0f);
    bool any_nonzero = false;
    for (float v : ad.a.values()) any_nonzero = any_nonzero || v != 0.0f;
    CHECK(any_nonzero);
    // same seed, same values
    CHECK(std::memcmp(ad.a.data(), s2.adapters[i].a.data(),
                      sizeof(float) * static_cast<std::size_t>(ad.a.numel())) == 0);
  }
  // per layer: wq adapter 4*16 + 16*4, wv adapter 4*16 + 8*4
  CHECK(s1.trainable_params() == 2 * ((64 + 64) + (64 + 32)));
  CHECK(s1.find("layers.1.wq") != nullptr);
  CHECK(s1.find("layers.1.wo") == nullptr);
}

TEST_CASE("lora_linear equals the explicit low-rank expansion") {
  SeededRng rng(8);
  const Tensor x = gaussian_fill(rng, {3, 6}, 0.0f, 1.0f);
  const Tensor w = gaussian_fill(rng, {5, 6}, 0.0f, 1.0f);
  LoraAdapter ad;
  ad.target = "t";
  ad.a = gaussian_fill(rng, {2, 6}, 0.0f, 0.5f);
  ad.b = gaussian_fill(rng, {5, 2}, 0.0f, 0.5f);
  const float s = 16.0f;

  const Tensor y = lora_linear(x, w, ad, s);
  for (std::int64_t i = 0; i < 3; ++i) {
    for (std::int64_t o = 0; o < 5; ++o) {
      double base = 0.0;
      for (std::int64_t k = 0; k < 6; ++k) base += static_cast<double>(x(i, k)) * w(o, k);
      double delta = 0.0;
      for (std::int64_t r = 0; r < 2; ++r) {
        double u = 0.0;
        for (std::int64_t k = 0; k < 6; ++k) u += static_cast<double>(x(i, k)) * ad.a(r, k);
        delta += u * ad.b(o, r);
      }
      CHECK(y(i, o) == doctest::Approx(base + s * delta).epsilon(1e-5));
    }
  }
}

TEST_CASE("merging folds the update into the base weight") {
  const Model m = init_model(tiny_config());
  LoraConfig lc = tiny_lora(2);
  lc.targets = {"wq", "wk", "wv", "wo"};
  LoraSet set = init_lora(m, lc);
  SeededRng rng(21);
  for (LoraAdapter& ad : set.adapters) {
    ad.b = gaussian_fill(rng, ad.b.shape(), 0.0f, 0.1f);
  }

  const Model merged = merge_lora(m, set);
  CHECK(model_fingerprint(merged) != model_fingerprint(m));

  // merged weight equals W + s * B A elementwise
  const LoraAdapter& ad = set.adapters[0];  // layers.0.wq
  const Tensor& w = m.layers[0].wq;
  const Tensor& w2 = merged.layers[0].wq;
  const float s = set.scaling();
  for (std::int64_t o = 0; o < w.dim(0); ++o) {
    for (std::int64_t k = 0; k < w.dim(1); ++k) {
      double delta = 0.0;
      for (std::int64_t r = 0; r < 2; ++r) {
        delta += static_cast<double>(ad.b(o, r)) * ad.a(r, k);
      }
      CHECK(w2(o, k) == doctest::Approx(w(o, k) + s * delta).epsilon(1e-5));
    }
  }
  // untouched tensors stay identical
  CHECK(std::memcmp(merged.layers[0].w_gate.data(), m.layers[0].w_gate.data(),
                    sizeof(float) * static_cast<std::size_t>(m.layers[0].w_gate.numel())) == 0);
}

TEST_CASE("adapters round-trip through the container") {
  const Model m = init_model(tiny_config());
  LoraConfig lc = tiny_lora(4);
  lc.dropout = 0.05f;
  LoraSet set = init_lora(m, lc);
  SeededRng rng(31);
  for (LoraAdapter& ad : set.adapters) ad.b = gaussian_fill(rng, ad.b.shape(), 0.0f, 0.1f);

  const std::string path =
      (std::filesystem::temp_directory_path() / "ttlm_test_adapter.bin").string();
  save_adapters(set, path);
  const LoraSet back = load_adapters(path);
  std::filesystem::remove(path);

  CHECK(back.config.rank == 4);
  CHECK(back.config.alpha == 32.0f);
  CHECK(back.config.dropout == 0.05f);
  CHECK(back.config.targets == lc.targets);
  CHECK(back.config.seed == lc.seed);
  REQUIRE(back.adapters.size() == set.adapters.size());
  for (std::size_t i = 0; i < set.adapters.size(); ++i) {
    CHECK(back.adapters[i].target == set.adapters[i].target);
    CHECK(std::memcmp(back.adapters[i].a.data(), set.adapters[i].a.data(),
                      sizeof(float) * static_cast<std::size_t>(set.adapters[i].a.numel())) == 0);
    CHECK(std::memcmp(back.adapters[i].b.data(), set.adapters[i].b.data(),
                      sizeof(float) * static_cast<std::size_t>(set.adapters[i].b.numel())) == 0);
  }
}

TEST_CASE("training sequences mask the instruction and score the response") {
  const TokenizedExample ex = build_training_sequence({"ab", "xyz"});
  // BOS + "ab" + separator + "xyz" + EOS
  const std::string sep = kResponseSeparator;
  CHECK(ex.ids.size() == 1 + 2 + sep.size() + 3 + 1);
  CHECK(ex.ids.front() == kBosId);
  CHECK(ex.ids.back() == kEosId);
  REQUIRE(ex.target_mask.size() == ex.ids.size() - 1);

  // scored predictions: the 3 response bytes and the EOS
  std::int64_t scored = 0;
  for (std::uint8_t b : ex.target_mask) scored += b;
  CHECK(scored == 4);
  // the mask is one contiguous run at the tail
  const std::size_t run_start = ex.target_mask.size() - 4;
  for (std::size_t i = 0; i < ex.target_mask.size(); ++i) {
    CHECK(ex.target_mask[i] == (i >= run_start ? 1 : 0));
  }
  // the scored targets are exactly "xyz" + EOS
  CHECK(ex.ids[run_start + 1] == 'x' + kByteOffset);
  CHECK(ex.ids[run_start + 3] == 'z' + kByteOffset);
}

TEST_CASE("an untrained model scores near the uniform-guess loss") {
  const Model m = init_model(tiny_config());
  const LoraSet set = init_lora(m, tiny_lora(2));
  const std::vector<InstructionExample> examples = {{"abc", "def"}, {"ghi", "jk"}};
  const double loss = corpus_loss(m, set, examples);
  const double uniform = std::log(static_cast<double>(kVocabSize));
  CHECK(std::abs(loss - uniform) < 0.5);  // 0.02-scale init leaves logits near flat
}

TEST_CASE("loss gradients are deterministic given the dropout stream") {
  const Model m = init_model(tiny_config());
  LoraConfig lc = tiny_lora(2);
  lc.dropout = 0.5f;
  LoraSet set = init_lora(m, lc);
  SeededRng r(40);
  for (LoraAdapter& ad : set.adapters) ad.b = gaussian_fill(r, ad.b.shape(), 0.0f, 0.05f);

  std::vector<TokenizedExample> batch = {build_training_sequence({"ab", "cd"})};

  SeededRng d1(9), d2(9), d3(10);
  const LossGrads g1 = lora_loss_and_grads(m, set, batch, &d1);
  const LossGrads g2 = lora_loss_and_grads(m, set, batch, &d2);
  const LossGrads g3 = lora_loss_and_grads(m, set, batch, &d3);
  CHECK(g1.loss == g2.loss);
  CHECK(g1.loss != g3.loss);  // different masks, different loss
  for (std::size_t i = 0; i < g1.d_a.size(); ++i) {
    CHECK(std::memcmp(g1.d_a[i].data(), g2.d_a[i].data(),
                      sizeof(float) * static_cast<std::size_t>(g1.d_a[i].numel())) == 0);
  }

  // no rng: dropout off, matches an explicit zero-dropout config
  const LossGrads plain = lora_loss_and_grads(m, set, batch, nullptr);
  LoraSet no_drop = set;
  no_drop.config.dropout = 0.0f;
  SeededRng unused(1);
  const LossGrads same = lora_loss_and_grads(m, no_drop, batch, &unused);
  CHECK(plain.loss == same.loss);
}

TEST_CASE("gradients vanish nowhere they should flow") {
  // with B zero, dB must still be nonzero (it sees dy u^T); dA flows through B
  const Model m = init_model(tiny_config());
  LoraSet set = init_lora(m, tiny_lora(2));
  std::vector<TokenizedExample> batch = {build_training_sequence({"ab", "cd"})};
  const LossGrads g = lora_loss_and_grads(m, set, batch, nullptr);
  CHECK(g.masked_positions > 0);
  bool db_nonzero = false, da_all_zero = true;
  for (const Tensor& t : g.d_b) {
    for (float v : t.values()) db_nonzero = db_nonzero || v != 0.0f;
  }
  for (const Tensor& t : g.d_a) {
    for (float v : t.values()) da_all_zero = da_all_zero && v == 0.0f;
  }
  CHECK(db_nonzero);
  CHECK(da_all_zero);  // dA = B^T-path, and B == 0 at init
}

TEST_CASE("a few optimiser steps reduce the batch loss without touching the base") {
  const Model m = init_model(tiny_config());
  const std::uint64_t digest = model_fingerprint(m);
  const std::vector<InstructionExample> examples = {
      {"Copie: aa", "aa"}, {"Copie: bb", "bb"}, {"Copie: ab", "ab"}, {"Copie: ba", "ba"}};
  LoraConfig lc = tiny_lora(4);
  TrainConfig tc;
  tc.steps = 12;
  tc.batch_size = 4;
  tc.lr = 5e-3f;
  tc.seed = 2;
  const FinetuneResult r = finetune(m, examples, lc, tc);
  CHECK(r.step_losses.size() == 12);
  CHECK(r.final_loss < r.initial_loss);
  CHECK(model_fingerprint(m) == digest);
  // the trained adapters are no longer neutral
  bool b_nonzero = false;
  for (const LoraAdapter& ad : r.adapters.adapters) {
    for (float v : ad.b.values()) b_nonzero = b_nonzero || v != 0.0f;
  }
  CHECK(b_nonzero);
}
