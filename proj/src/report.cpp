#include "ttlm/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ttlm/errors.hpp"

namespace ttlm {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string report_json(const EvalResult& r) {
  ordered_json j;
  j["template"] = {{"name", r.tmpl.name},
                   {"checksum", hex64(r.template_digest)},
                   {"canonical", r.tmpl.canonical},
                   {"labels", r.tmpl.labels}};
  j["backend"] = r.backend_name;
  j["config"] = {{"fold_accents", r.config.fold_accents},
                 {"weighted_averages", r.config.weighted_averages},
                 {"parallelism", r.config.parallelism},
                 {"max_failures", r.config.max_failures},
                 {"seed", r.config.seed}};
  j["samples"] = {{"total", r.metrics.total},
                  {"correct", r.correct},
                  {"errors", r.errors},
                  {"unparseable", r.unparseable},
                  {"failures", r.failures}};

  ordered_json per_class = ordered_json::array();
  for (std::size_t i = 0; i < r.tmpl.labels.size(); ++i) {
    const ClassMetrics& m = r.metrics.per_class[i];
    per_class.push_back({{"label", r.tmpl.labels[i]},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"support", m.support}});
  }
  const bool weighted = r.config.weighted_averages;
  j["metrics"] = {
      {"accuracy", r.metrics.accuracy},
      {"averaging", weighted ? "weighted" : "macro"},
      {"precision", weighted ? r.metrics.weighted_precision : r.metrics.macro_precision},
      {"recall", weighted ? r.metrics.weighted_recall : r.metrics.macro_recall},
      {"f1", weighted ? r.metrics.weighted_f1 : r.metrics.macro_f1},
      {"macro",
       {{"precision", r.metrics.macro_precision},
        {"recall", r.metrics.macro_recall},
        {"f1", r.metrics.macro_f1}}},
      {"weighted",
       {{"precision", r.metrics.weighted_precision},
        {"recall", r.metrics.weighted_recall},
        {"f1", r.metrics.weighted_f1}}},
      {"per_class", per_class}};

  std::vector<std::string> columns = r.tmpl.labels;
  columns.push_back("unparseable");
  j["confusion"] = {{"rows", r.tmpl.labels}, {"columns", columns}, {"counts", r.confusion}};

  ordered_json outcomes = ordered_json::array();
  for (const SampleOutcome& o : r.outcomes) {
    outcomes.push_back({{"gold", o.gold},
                        {"predicted", o.predicted},
                        {"completion", o.completion},
                        {"failed", o.backend_failed}});
  }
  j["outcomes"] = outcomes;
  return j.dump(2) + "\n";
}

std::string report_markdown(const EvalResult& r) {
  std::ostringstream os;
  os << "# Evaluation report\n\n";
  os << "- template: `" << r.tmpl.name << "` (checksum " << hex64(r.template_digest) << ")\n";
  os << "- backend: " << r.backend_name << "\n";
  os << "- samples: " << r.metrics.total << " (correct " << r.correct << ", errors " << r.errors
     << ", unparseable " << r.unparseable << ", failures " << r.failures << ")\n";
  os << "- seed: " << r.config.seed << ", parallelism: " << r.config.parallelism << "\n\n";

  const bool weighted = r.config.weighted_averages;
  os << "## Metrics (" << (weighted ? "weighted" : "macro") << " averages)\n\n";
  os << "| metric | value |\n|---|---|\n";
  os << "| accuracy | " << fixed6(r.metrics.accuracy) << " |\n";
  os << "| precision | "
     << fixed6(weighted ? r.metrics.weighted_precision : r.metrics.macro_precision) << " |\n";
  os << "| recall | " << fixed6(weighted ? r.metrics.weighted_recall : r.metrics.macro_recall)
     << " |\n";
  os << "| f1 | " << fixed6(weighted ? r.metrics.weighted_f1 : r.metrics.macro_f1) << " |\n\n";

  os << "## Per-class\n\n";
  os << "| label | precision | recall | f1 | support |\n|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < r.tmpl.labels.size(); ++i) {
    const ClassMetrics& m = r.metrics.per_class[i];
    os << "| " << r.tmpl.labels[i] << " | " << fixed6(m.precision) << " | " << fixed6(m.recall)
       << " | " << fixed6(m.f1) << " | " << m.support << " |\n";
  }

  os << "\n## Confusion (rows = gold)\n\n|  |";
  for (const std::string& l : r.tmpl.labels) os << " " << l << " |";
  os << " unparseable |\n|---|";
  for (std::size_t i = 0; i <= r.tmpl.labels.size(); ++i) os << "---|";
  os << "\n";
  for (std::size_t g = 0; g < r.confusion.size(); ++g) {
    os << "| " << r.tmpl.labels[g] << " |";
    for (std::int64_t v : r.confusion[g]) os << " " << v << " |";
    os << "\n";
  }
  return os.str();
}

std::string report_csv(const EvalResult& r) {
  std::ostringstream os;
  os << "section,label,precision,recall,f1,support\n";
  for (std::size_t i = 0; i < r.tmpl.labels.size(); ++i) {
    const ClassMetrics& m = r.metrics.per_class[i];
    os << "class," << r.tmpl.labels[i] << "," << fixed6(m.precision) << "," << fixed6(m.recall)
       << "," << fixed6(m.f1) << "," << m.support << "\n";
  }
  os << "macro,," << fixed6(r.metrics.macro_precision) << "," << fixed6(r.metrics.macro_recall)
     << "," << fixed6(r.metrics.macro_f1) << "," << r.metrics.total << "\n";
  os << "weighted,," << fixed6(r.metrics.weighted_precision) << ","
     << fixed6(r.metrics.weighted_recall) << "," << fixed6(r.metrics.weighted_f1) << ","
     << r.metrics.total << "\n";
  os << "accuracy,," << fixed6(r.metrics.accuracy) << ",,," << r.metrics.total << "\n";
  return os.str();
}

std::string render_report(const EvalResult& r, const std::string& format) {
  if (format == "json") return report_json(r);
  if (format == "markdown" || format == "md") return report_markdown(r);
  if (format == "csv") return report_csv(r);
  throw UsageError("unknown report format '" + format + "' (json, markdown, csv)");
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace ttlm
