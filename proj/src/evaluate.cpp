#include "ttlm/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ttlm/errors.hpp"
#include "ttlm/tokenizer.hpp"

namespace ttlm {

std::string GoldEchoBackend::complete(const std::string& /*prompt*/,
                                      const LabeledSample& sample) {
  return " " + sample.label;
}

EngineBackend::EngineBackend(const Model& model, const LoraSet* adapters,
                             std::int64_t max_new_tokens)
    : model_(model), adapters_(adapters), max_new_tokens_(max_new_tokens) {
  model_.check_shapes();
  if (max_new_tokens_ <= 0) throw ConfigError("engine backend needs max_new_tokens > 0");
}

std::string EngineBackend::complete(const std::string& prompt, const LabeledSample& /*sample*/) {
  GenerateOptions options;
  options.max_new = max_new_tokens_;
  options.session.adapters = adapters_;
  return generate_text(model_, prompt, options);
}

RemoteBackend::RemoteBackend(std::string base_url, std::string token)
    : base_url_(std::move(base_url)), token_(std::move(token)) {
  if (base_url_.empty()) throw ConfigError("remote backend needs a base url");
}

std::string RemoteBackend::complete(const std::string& prompt, const LabeledSample& /*sample*/) {
  httplib::Client client(base_url_);
  client.set_connection_timeout(10, 0);
  client.set_read_timeout(30, 0);
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  nlohmann::json body;
  body["prompt"] = prompt;
  auto res = client.Post("/complete", headers, body.dump(), "application/json");
  if (!res) {
    throw IoError("remote backend unreachable at " + base_url_);
  }
  if (res->status != 200) {
    throw IoError("remote backend returned status " + std::to_string(res->status));
  }
  const nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.is_object() || !reply.contains("completion") ||
      !reply["completion"].is_string()) {
    throw ParseError("remote backend reply lacks a string 'completion' field");
  }
  return reply["completion"].get<std::string>();
}

EvalResult evaluate(std::span<const LabeledSample> samples, Backend& backend,
                    const EvalConfig& config) {
  if (samples.empty()) throw DataError("nothing to evaluate: sample list is empty");
  if (config.parallelism <= 0) throw ConfigError("parallelism must be positive");
  if (config.max_failures < 0) throw ConfigError("failure budget must be >= 0");

  EvalResult result;
  result.tmpl = find_template(config.template_name);
  result.config = config;
  result.backend_name = backend.name();
  result.template_digest = template_checksum(result.tmpl);
  const std::vector<std::string>& labels = result.tmpl.labels;

  auto label_index = [&labels](const std::string& label) -> std::int64_t {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) return static_cast<std::int64_t>(i);
    }
    return -1;
  };
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (label_index(samples[i].label) < 0) {
      throw DataError("sample " + std::to_string(i) + " has gold label '" + samples[i].label +
                      "' outside the template's label set");
    }
  }

  result.outcomes.resize(samples.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t idx = cursor.fetch_add(1);
      if (idx >= samples.size()) return;
      const LabeledSample& sample = samples[idx];
      SampleOutcome& outcome = result.outcomes[idx];
      outcome.gold = sample.label;
      try {
        outcome.completion = backend.complete(render_prompt(result.tmpl, sample.text), sample);
        const auto predicted = extract_label(outcome.completion, labels, config.fold_accents);
        if (predicted.has_value()) outcome.predicted = *predicted;
      } catch (const std::exception&) {
        outcome.backend_failed = true;
      }
    }
  };

  const std::size_t threads_wanted = std::min<std::size_t>(
      static_cast<std::size_t>(config.parallelism), samples.size());
  if (threads_wanted <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads_wanted);
    for (std::size_t i = 0; i < threads_wanted; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  // Ordered reduction: walk outcomes in sample order.
  const std::size_t c = labels.size();
  result.confusion.assign(c, std::vector<std::int64_t>(c + 1, 0));
  for (const SampleOutcome& outcome : result.outcomes) {
    if (outcome.backend_failed) ++result.failures;
    const std::int64_t g = label_index(outcome.gold);
    const std::int64_t p = outcome.predicted.empty() ? -1 : label_index(outcome.predicted);
    if (p < 0) {
      ++result.unparseable;
      ++result.confusion[static_cast<std::size_t>(g)][c];
    } else {
      if (p == g) {
        ++result.correct;
      } else {
        ++result.errors;
      }
      ++result.confusion[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)];
    }
  }
  if (result.failures > config.max_failures) {
    throw IoError("backend failed on " + std::to_string(result.failures) +
                  " samples, over the budget of " + std::to_string(config.max_failures));
  }
  result.metrics = metrics_from_confusion(result.confusion);
  return result;
}

}  // namespace ttlm
