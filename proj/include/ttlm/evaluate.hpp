#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ttlm/dataset.hpp"
#include "ttlm/decode.hpp"
#include "ttlm/metrics.hpp"
#include "ttlm/model.hpp"
#include "ttlm/prompts.hpp"

namespace ttlm {

// Produces the completion for one rendered prompt. Implementations must be
// safe to call from several threads at once.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const std::string& prompt, const LabeledSample& sample) = 0;
  virtual std::string name() const = 0;
};

// Echoes the sample's gold label; wires up the harness without a model.
class GoldEchoBackend : public Backend {
 public:
  std::string complete(const std::string& prompt, const LabeledSample& sample) override;
  std::string name() const override { return "gold-echo"; }
};

// Greedy decoding against a local model.
class EngineBackend : public Backend {
 public:
  EngineBackend(const Model& model, const LoraSet* adapters, std::int64_t max_new_tokens);
  std::string complete(const std::string& prompt, const LabeledSample& sample) override;
  std::string name() const override { return "engine"; }

 private:
  const Model& model_;
  const LoraSet* adapters_;
  std::int64_t max_new_tokens_;
};

// POST {base_url}/complete with {"prompt": ...}, expects {"completion": ...}.
// An optional bearer token rides in the Authorization header.
class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(std::string base_url, std::string token = "");
  std::string complete(const std::string& prompt, const LabeledSample& sample) override;
  std::string name() const override { return "remote"; }

 private:
  std::string base_url_;
  std::string token_;
};

struct EvalConfig {
  std::string template_name;
  bool fold_accents = false;       // accent-insensitive label matching
  bool weighted_averages = false;  // headline averages weighted by support
  std::int64_t parallelism = 1;
  std::int64_t max_failures = 0;  // backend error budget before aborting
  std::uint64_t seed = 0;         // provenance echo only
};

struct SampleOutcome {
  std::string gold;
  std::string completion;
  std::string predicted;  // canonical label, empty when unparseable
  bool backend_failed = false;
};

struct EvalResult {
  PromptTemplate tmpl;
  EvalConfig config;
  std::string backend_name;
  std::vector<SampleOutcome> outcomes;  // sample order, schedule-independent
  // classes x (classes + 1); the last column collects unparseable
  // completions and failed calls, so each row sums to its gold support.
  std::vector<std::vector<std::int64_t>> confusion;
  MetricsSummary metrics;
  std::int64_t correct = 0;
  std::int64_t errors = 0;       // parseable but wrong label
  std::int64_t unparseable = 0;  // no label extracted (failures included)
  std::int64_t failures = 0;     // backend exceptions, within budget
  std::uint64_t template_digest = 0;
};

// Renders every sample through the template, queries the backend (up to
// `parallelism` samples in flight), and reduces outcomes in sample order so
// the result is identical for any schedule. Gold labels must belong to the
// template's label set. More than max_failures backend errors aborts.
EvalResult evaluate(std::span<const LabeledSample> samples, Backend& backend,
                    const EvalConfig& config);

}  // namespace ttlm
