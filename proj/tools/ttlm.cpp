#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ttlm/chart.hpp"
#include "ttlm/dataset.hpp"
#include "ttlm/decode.hpp"
#include "ttlm/errors.hpp"
#include "ttlm/evaluate.hpp"
#include "ttlm/lora.hpp"
#include "ttlm/model.hpp"
#include "ttlm/prompts.hpp"
#include "ttlm/report.hpp"
#include "ttlm/selfcheck.hpp"
#include "ttlm/serialize.hpp"
#include "ttlm/tokenizer.hpp"
#include "ttlm/train.hpp"

namespace {

using nlohmann::json;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    ttlm::write_text_file(out_path, text);
  }
}

int cmd_init_weights(const std::string& out, ttlm::ModelConfig cfg) {
  cfg.validate();
  const ttlm::Model model = ttlm::init_model(cfg);
  ttlm::save_model(model, out);
  std::cout << "wrote " << out << " (fingerprint " << std::hex << ttlm::model_fingerprint(model)
            << std::dec << ")\n";
  return 0;
}

int cmd_generate(const std::string& weights, const std::string& adapter,
                 const std::string& prompt, std::int64_t max_new, bool keep_going) {
  const ttlm::Model model = ttlm::load_model(weights);
  ttlm::LoraSet set;
  ttlm::GenerateOptions opts;
  opts.max_new = max_new;
  opts.stop_at_eos = !keep_going;
  if (!adapter.empty()) {
    set = ttlm::load_adapters(adapter);
    opts.session.adapters = &set;
  }
  std::cout << ttlm::generate_text(model, prompt, opts) << "\n";
  return 0;
}

int cmd_finetune(const std::string& weights, const std::string& data,
                 const std::string& out_adapter, ttlm::LoraConfig lora, ttlm::TrainConfig train) {
  const ttlm::Model model = ttlm::load_model(weights);
  const auto examples = ttlm::load_instruction_jsonl(data);
  const ttlm::FinetuneResult result = ttlm::finetune(model, examples, lora, train);
  ttlm::save_adapters(result.adapters, out_adapter);
  std::cout << "examples " << examples.size() << ", steps " << train.steps << ", loss "
            << result.initial_loss << " -> " << result.final_loss << "\n"
            << "wrote " << out_adapter << "\n";
  return 0;
}

int cmd_merge(const std::string& weights, const std::string& adapter, const std::string& out) {
  const ttlm::Model model = ttlm::load_model(weights);
  const ttlm::LoraSet set = ttlm::load_adapters(adapter);
  const ttlm::Model merged = ttlm::merge_lora(model, set);
  ttlm::save_model(merged, out);
  std::cout << "wrote " << out << " (fingerprint " << std::hex << ttlm::model_fingerprint(merged)
            << std::dec << ")\n";
  return 0;
}

int cmd_eval(const std::string& backend_name, const std::string& weights,
             const std::string& adapter, const std::string& url, const std::string& token,
             const std::string& dataset, std::int64_t max_new, const ttlm::EvalConfig& config,
             const std::string& format, const std::string& out) {
  const auto samples = ttlm::load_labeled_dataset(dataset);

  ttlm::Model model;
  ttlm::LoraSet set;
  std::unique_ptr<ttlm::Backend> backend;
  if (backend_name == "gold-echo") {
    backend = std::make_unique<ttlm::GoldEchoBackend>();
  } else if (backend_name == "engine") {
    if (weights.empty()) throw ttlm::UsageError("--weights is required for the engine backend");
    model = ttlm::load_model(weights);
    const ttlm::LoraSet* set_ptr = nullptr;
    if (!adapter.empty()) {
      set = ttlm::load_adapters(adapter);
      set_ptr = &set;
    }
    backend = std::make_unique<ttlm::EngineBackend>(model, set_ptr, max_new);
  } else if (backend_name == "remote") {
    if (url.empty()) throw ttlm::UsageError("--url (or BACKEND_URL) is required for the remote backend");
    backend = std::make_unique<ttlm::RemoteBackend>(url, token);
  } else {
    throw ttlm::UsageError("unknown backend '" + backend_name + "'");
  }

  const ttlm::EvalResult result = ttlm::evaluate(samples, *backend, config);
  emit(ttlm::render_report(result, format), out);
  return 0;
}

int cmd_chart(const std::vector<std::string>& reports, const std::vector<std::string>& metrics,
              const std::string& out) {
  auto metric_value = [](const json& j, const std::string& name) -> double {
    if (name == "accuracy") return j.at("metrics").at("accuracy").get<double>();
    for (const char* group : {"macro", "weighted"}) {
      for (const char* field : {"precision", "recall", "f1"}) {
        if (name == std::string(group) + "-" + field) {
          return j.at("metrics").at(group).at(field).get<double>();
        }
      }
    }
    throw ttlm::UsageError("unknown metric '" + name + "' (use accuracy, macro-*, weighted-*)");
  };

  std::vector<ttlm::ChartSeries> series;
  for (const std::string& path : reports) {
    const json j = json::parse(ttlm::read_text_file(path));
    ttlm::ChartSeries s;
    const std::size_t slash = path.find_last_of('/');
    const std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    const std::size_t dot = base.find_last_of('.');
    s.label = dot == std::string::npos ? base : base.substr(0, dot);
    for (const std::string& m : metrics) s.values.push_back(metric_value(j, m));
    series.push_back(std::move(s));
  }
  std::vector<std::string> names(metrics.begin(), metrics.end());
  emit(ttlm::chart_svg(names, series), out);
  return 0;
}

int cmd_selfcheck(const std::vector<std::string>& only, const std::string& data_dir) {
  std::vector<ttlm::check::CheckResult> results;
  if (only.empty()) {
    results = ttlm::check::run_all(data_dir);
  } else {
    for (const std::string& name : only) results.push_back(ttlm::check::run_check(name, data_dir));
  }
  bool all_ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << "\n";
    all_ok = all_ok && r.passed;
  }
  std::cout << (all_ok ? "all checks passed" : "CHECKS FAILED") << "\n";
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"byte-level transformer engine with low-rank adapters and a zero-shot eval harness"};
  app.require_subcommand(1);

  // init-weights
  auto* init = app.add_subcommand("init-weights", "create and save a randomly initialised model");
  ttlm::ModelConfig cfg;
  cfg.d_model = 64;
  cfg.n_layers = 2;
  cfg.n_heads = 4;
  cfg.n_kv_heads = 2;
  cfg.d_ff = 128;
  cfg.vocab_size = ttlm::kVocabSize;
  std::string style = "sequential";
  std::string init_out;
  init->add_option("--d-model", cfg.d_model, "embedding width");
  init->add_option("--layers", cfg.n_layers, "decoder blocks");
  init->add_option("--heads", cfg.n_heads, "query heads");
  init->add_option("--kv-heads", cfg.n_kv_heads, "key/value head groups");
  init->add_option("--d-ff", cfg.d_ff, "feed-forward width");
  init->add_option("--vocab", cfg.vocab_size, "vocabulary size");
  init->add_option("--window", cfg.window, "attention window (0 = unbounded)");
  init->add_option("--rope-base", cfg.rope_base, "rotary frequency base");
  init->add_option("--norm-eps", cfg.norm_eps, "normalisation epsilon");
  init->add_option("--style", style, "block wiring: sequential or parallel")
      ->check(CLI::IsMember({"sequential", "parallel"}));
  init->add_option("--seed", cfg.seed, "init seed");
  init->add_option("--out", init_out, "output weights file")->required();

  // generate
  auto* gen = app.add_subcommand("generate", "greedy-decode a continuation of a prompt");
  std::string gen_weights, gen_adapter, gen_prompt;
  std::int64_t gen_max_new = 64;
  bool gen_keep_going = false;
  gen->add_option("--weights", gen_weights, "weights file")->required();
  gen->add_option("--adapter", gen_adapter, "adapter file to apply unmerged");
  gen->add_option("--prompt", gen_prompt, "prompt text")->required();
  gen->add_option("--max-new", gen_max_new, "maximum new tokens");
  gen->add_flag("--ignore-eos", gen_keep_going, "do not stop at the end-of-text token");

  // finetune
  auto* ft = app.add_subcommand("finetune", "train low-rank adapters on instruction pairs");
  std::string ft_weights, ft_data, ft_out;
  ttlm::LoraConfig ft_lora;
  ft_lora.targets = ttlm::default_target_kinds();
  ttlm::TrainConfig ft_train;
  ft->add_option("--weights", ft_weights, "base weights file")->required();
  ft->add_option("--data", ft_data, "instruction/response jsonl")->required();
  ft->add_option("--rank", ft_lora.rank, "adapter rank")->required();
  ft->add_option("--alpha", ft_lora.alpha, "adapter scaling numerator");
  ft->add_option("--dropout", ft_lora.dropout, "adapter-input dropout probability");
  ft->add_option("--targets", ft_lora.targets, "projections to adapt (wq wk wv wo)");
  ft->add_option("--adapter-seed", ft_lora.seed, "adapter init seed");
  ft->add_option("--steps", ft_train.steps, "optimiser steps");
  ft->add_option("--batch", ft_train.batch_size, "examples per step");
  ft->add_option("--lr", ft_train.lr, "learning rate");
  ft->add_option("--seed", ft_train.seed, "training seed (dropout draws)");
  ft->add_option("--out-adapter", ft_out, "output adapter file")->required();

  // merge
  auto* mg = app.add_subcommand("merge", "fold adapters into the base weights");
  std::string mg_weights, mg_adapter, mg_out;
  mg->add_option("--weights", mg_weights, "base weights file")->required();
  mg->add_option("--adapter", mg_adapter, "adapter file")->required();
  mg->add_option("--out", mg_out, "output weights file")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "classify a labelled dataset via prompt templates");
  std::string ev_backend = "engine", ev_weights, ev_adapter, ev_url, ev_token;
  std::string ev_dataset, ev_format = "json", ev_out;
  std::int64_t ev_max_new = 16;
  ttlm::EvalConfig ev_config;
  ev->add_option("--backend", ev_backend, "gold-echo, engine, or remote")
      ->check(CLI::IsMember({"gold-echo", "engine", "remote"}));
  ev->add_option("--weights", ev_weights, "weights file (engine backend)");
  ev->add_option("--adapter", ev_adapter, "adapter file (engine backend)");
  ev->add_option("--url", ev_url, "completion service base url")->envname("BACKEND_URL");
  ev->add_option("--token", ev_token, "bearer token for the service")->envname("BACKEND_TOKEN");
  ev->add_option("--dataset", ev_dataset, "labelled dataset (.jsonl or .csv)")->required();
  ev->add_option("--template", ev_config.template_name, "prompt template name")->required();
  ev->add_option("--max-new", ev_max_new, "completion budget (engine backend)");
  ev->add_flag("--fold-accents", ev_config.fold_accents,
               "accept accent-stripped label spellings");
  ev->add_flag("--weighted", ev_config.weighted_averages,
               "headline averages weighted by class support");
  ev->add_option("--parallel", ev_config.parallelism, "worker threads");
  ev->add_option("--max-failures", ev_config.max_failures, "backend failures tolerated");
  ev->add_option("--seed", ev_config.seed, "run seed recorded in the report");
  ev->add_option("--format", ev_format, "json, markdown, or csv")
      ->check(CLI::IsMember({"json", "markdown", "md", "csv"}));
  ev->add_option("--out", ev_out, "write the report here instead of stdout");

  // chart
  auto* ch = app.add_subcommand("chart", "render metric bars from saved json reports");
  std::vector<std::string> ch_reports, ch_metrics = {"accuracy", "macro-f1"};
  std::string ch_out;
  ch->add_option("--report", ch_reports, "json report files")->required();
  ch->add_option("--metric", ch_metrics, "metrics to plot");
  ch->add_option("--out", ch_out, "output svg file");

  // selfcheck
  auto* sc = app.add_subcommand("selfcheck", "run the built-in verification suite");
  std::vector<std::string> sc_only;
  std::string sc_data_dir;
  sc->add_option("--only", sc_only, "run just these checks");
  sc->add_option("--data-dir", sc_data_dir, "override the bundled fixture directory");

  try {
    app.parse(argc, argv);
    if (init->parsed()) {
      cfg.block_style = style == "parallel" ? ttlm::BlockStyle::kParallel
                                            : ttlm::BlockStyle::kSequential;
      return cmd_init_weights(init_out, cfg);
    }
    if (gen->parsed()) {
      return cmd_generate(gen_weights, gen_adapter, gen_prompt, gen_max_new, gen_keep_going);
    }
    if (ft->parsed()) return cmd_finetune(ft_weights, ft_data, ft_out, ft_lora, ft_train);
    if (mg->parsed()) return cmd_merge(mg_weights, mg_adapter, mg_out);
    if (ev->parsed()) {
      return cmd_eval(ev_backend, ev_weights, ev_adapter, ev_url, ev_token, ev_dataset, ev_max_new,
                      ev_config, ev_format, ev_out);
    }
    if (ch->parsed()) return cmd_chart(ch_reports, ch_metrics, ch_out);
    if (sc->parsed()) return cmd_selfcheck(sc_only, sc_data_dir);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ttlm::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ttlm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
