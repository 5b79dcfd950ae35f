#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "ttlm/chart.hpp"
#include "ttlm/dataset.hpp"
#include "ttlm/errors.hpp"
#include "ttlm/evaluate.hpp"
#include "ttlm/metrics.hpp"
#include "ttlm/prompts.hpp"
#include "ttlm/report.hpp"

using namespace ttlm;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

std::vector<LabeledSample> tiny_samples() {
  return {{"que dia bom", "Positivo"},
          {"não gostei nada", "Negativo"},
          {"lançamento de produto anunciado", "Neutro"},
          {"maravilhoso!", "Positivo"}};
}

// completion scripted per sample text; throws when told to
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::string fallback) : fallback_(std::move(fallback)) {}
  void script(const std::string& text, const std::string& completion) {
    scripted_[text] = completion;
  }
  void fail_on(const std::string& text) { failing_.insert(text); }

  std::string complete(const std::string&, const LabeledSample& sample) override {
    if (failing_.count(sample.text)) throw IoError("scripted failure");
    auto it = scripted_.find(sample.text);
    return it == scripted_.end() ? fallback_ : it->second;
  }
  std::string name() const override { return "scripted"; }

 private:
  std::string fallback_;
  std::map<std::string, std::string> scripted_;
  std::set<std::string> failing_;
};

}  // namespace

TEST_CASE("jsonl loaders read instruction and labeled records") {
  const std::string path = write_temp(
      "ttlm_test_inst.jsonl",
      "{\"instruction\": \"Copie: abc\", \"response\": \"abc\"}\n"
      "\n"
      "{\"instruction\": \"Copie: x\", \"response\": \"x\"}\n");
  const auto examples = load_instruction_jsonl(path);
  REQUIRE(examples.size() == 2);
  CHECK(examples[0].instruction == "Copie: abc");
  CHECK(examples[1].response == "x");
  std::filesystem::remove(path);

  const std::string lpath = write_temp(
      "ttlm_test_labeled.jsonl",
      "{\"text\": \"olá\", \"label\": \"Positivo\"}\n{\"text\": \"ruim\", \"label\": \"Negativo\"}\n");
  const auto samples = load_labeled_jsonl(lpath);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].text == "olá");
  CHECK(samples[1].label == "Negativo");
  std::filesystem::remove(lpath);
}

TEST_CASE("jsonl loaders reject malformed and empty input") {
  const std::string bad = write_temp("ttlm_test_bad.jsonl", "{\"instruction\": \"a\"\n");
  CHECK_THROWS_AS(load_instruction_jsonl(bad), ParseError);
  std::filesystem::remove(bad);

  const std::string missing = write_temp("ttlm_test_missing.jsonl", "{\"text\": \"a\"}\n");
  CHECK_THROWS_AS(load_labeled_jsonl(missing), ParseError);
  std::filesystem::remove(missing);

  const std::string empty = write_temp("ttlm_test_empty.jsonl", "\n\n");
  CHECK_THROWS_AS(load_labeled_jsonl(empty), DataError);
  std::filesystem::remove(empty);

  CHECK_THROWS_AS(load_labeled_jsonl("/nonexistent/nowhere.jsonl"), IoError);
}

TEST_CASE("csv loader handles quotes, escapes, and embedded separators") {
  const std::string path = write_temp(
      "ttlm_test.csv",
      "text,label\n"
      "plain words,Positivo\n"
      "\"uma vírgula, aqui\",Negativo\n"
      "\"aspas \"\"duplas\"\" internas\",Neutro\n"
      "\"quebra\nde linha\",Positivo\n");
  const auto samples = load_labeled_csv(path);
  REQUIRE(samples.size() == 4);
  CHECK(samples[0].text == "plain words");
  CHECK(samples[1].text == "uma vírgula, aqui");
  CHECK(samples[2].text == "aspas \"duplas\" internas");
  CHECK(samples[3].text == "quebra\nde linha");
  CHECK(samples[3].label == "Positivo");
  std::filesystem::remove(path);

  const std::string bad_header = write_temp("ttlm_test_hdr.csv", "a,b\nx,y\n");
  CHECK_THROWS_AS(load_labeled_csv(bad_header), ParseError);
  std::filesystem::remove(bad_header);

  const std::string unterminated = write_temp("ttlm_test_q.csv", "text,label\n\"open,Positivo\n");
  CHECK_THROWS_AS(load_labeled_csv(unterminated), ParseError);
  std::filesystem::remove(unterminated);
}

TEST_CASE("dataset dispatch keys off the extension") {
  const std::string csv = write_temp("ttlm_test_d.csv", "text,label\nabc,Positivo\n");
  CHECK(load_labeled_dataset(csv).size() == 1);
  std::filesystem::remove(csv);
  CHECK_THROWS_AS(load_labeled_dataset("samples.txt"), UsageError);
}

TEST_CASE("template registry serves the four tasks") {
  CHECK(prompt_registry().size() == 4);
  const PromptTemplate& t3 = find_template("tweetsent3");
  CHECK(t3.labels == std::vector<std::string>({"Positivo", "Neutro", "Negativo"}));
  CHECK(t3.canonical);
  const PromptTemplate& n4 = find_template("agnews4");
  CHECK(n4.labels.size() == 4);
  CHECK(n4.canonical);
  CHECK_FALSE(find_template("tweetsent2").canonical);
  CHECK_FALSE(find_template("fakenews2").canonical);
  CHECK_THROWS_AS(find_template("nope"), ConfigError);
}

TEST_CASE("canonical template wording stays frozen") {
  CHECK(template_checksum(find_template("tweetsent3")) == kTweetSentiment3Checksum);
  CHECK(template_checksum(find_template("agnews4")) == kNewsTopic4Checksum);

  // spot-check pinned wording, including its idiosyncrasies
  const std::string& tweet_body = find_template("tweetsent3").body;
  CHECK(tweet_body.find("3 tipos de sentimentos") != std::string::npos);
  CHECK(tweet_body.find("com sempre neutros") != std::string::npos);
  const std::string& news_body = find_template("agnews4").body;
  CHECK(news_body.find("TEEHRAN") != std::string::npos);
  CHECK(news_body.find("4 minutos 8,26 segundos") != std::string::npos);

  // any wording change moves the digest
  PromptTemplate altered = find_template("tweetsent3");
  altered.body += " ";
  CHECK(template_checksum(altered) != kTweetSentiment3Checksum);
}

TEST_CASE("prompt rendering is plain concatenation") {
  const PromptTemplate& t = find_template("tweetsent3");
  const std::string p = render_prompt(t, "hoje foi ótimo");
  CHECK(p == t.body + "\n\nTweet: hoje foi ótimo Resposta:");
}

TEST_CASE("case folding covers ascii and latin-1") {
  CHECK(fold_case("NEGATIVO") == "negativo");
  CHECK(fold_case("Negócios") == "negócios");
  CHECK(fold_case("ÀÉÎÕÜ") == "àéîõü");
  CHECK(fold_accents_and_case("Negócios") == "negocios");
  CHECK(fold_accents_and_case("Ciência") == "ciencia");
  CHECK(fold_accents_and_case("VOCÊ é ótimo") == "voce e otimo");
  CHECK(fold_accents_and_case("ção") == "cao");
}

TEST_CASE("label extraction reads the first word and tolerates echo and punctuation") {
  const std::vector<std::string> labels = {"Positivo", "Neutro", "Negativo"};
  auto get = [&](const std::string& s, bool fold = false) {
    const auto r = extract_label(s, labels, fold);
    return r.has_value() ? *r : std::string("<none>");
  };
  CHECK(get(" Positivo") == "Positivo");
  CHECK(get("positivo") == "Positivo");
  CHECK(get("NEGATIVO, sem dúvida") == "Negativo");
  CHECK(get("Resposta: Neutro") == "Neutro");
  CHECK(get("resposta:Positivo") == "Positivo");
  CHECK(get("\n\t\"Negativo!\"") == "Negativo");
  CHECK(get("Neutro.\nO tweet apenas relata.") == "Neutro");
  CHECK(get("banana") == "<none>");
  CHECK(get("") == "<none>");
  CHECK(get("Positivamente") == "<none>");  // prefix is not a match

  const std::vector<std::string> news = {"Mundo", "Esportes", "Negócios", "Tecnologia"};
  const auto folded = extract_label("negocios", news, true);
  REQUIRE(folded.has_value());
  CHECK(*folded == "Negócios");  // canonical spelling comes back
  CHECK_FALSE(extract_label("negocios", news, false).has_value());
}

TEST_CASE("confusion metrics: exact values on hand cases") {
  // diagonal: everything perfect
  const MetricsSummary perfect = metrics_from_confusion({{3, 0}, {0, 2}});
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.macro_f1 == 1.0);
  CHECK(perfect.weighted_f1 == 1.0);
  CHECK(perfect.per_class[0].support == 3);
  CHECK(perfect.total == 5);

  // hand-checked quarter case
  const MetricsSummary quarter = metrics_from_confusion({{1, 1}, {0, 2}});
  CHECK(quarter.accuracy == 0.75);
  CHECK(quarter.per_class[0].precision == 1.0);
  CHECK(quarter.per_class[0].recall == 0.5);
  CHECK(quarter.per_class[1].precision == doctest::Approx(2.0 / 3.0));
  CHECK(quarter.per_class[1].recall == 1.0);

  // constant predictor: zero-denominator classes score 0, never NaN
  const MetricsSummary constant = metrics_from_confusion({{5, 0}, {5, 0}});
  CHECK(constant.accuracy == 0.5);
  CHECK(constant.per_class[1].precision == 0.0);
  CHECK(constant.per_class[1].recall == 0.0);
  CHECK(constant.per_class[1].f1 == 0.0);
  CHECK(constant.macro_f1 == 1.0 / 3.0);

  // an extra prediction column dilutes accuracy and recall, not precision
  const MetricsSummary wide = metrics_from_confusion({{1, 0, 1}});
  CHECK(wide.accuracy == 0.5);
  CHECK(wide.per_class[0].precision == 1.0);
  CHECK(wide.per_class[0].recall == 0.5);

  CHECK_THROWS_AS(metrics_from_confusion({}), DataError);
  CHECK_THROWS_AS(metrics_from_confusion({{1, 2}, {3}}), DataError);
  CHECK_THROWS_AS(metrics_from_confusion({{1, -1}}), DataError);
  CHECK_THROWS_AS(metrics_from_confusion({{0, 0}, {0, 0}}), DataError);
  CHECK_THROWS_AS(metrics_from_confusion({{1}, {1}, {1}}), DataError);  // more rows than cols
}

TEST_CASE("gold echo pipeline classifies everything correctly") {
  const auto samples = tiny_samples();
  GoldEchoBackend backend;
  EvalConfig config;
  config.template_name = "tweetsent3";
  const EvalResult r = evaluate(samples, backend, config);
  CHECK(r.metrics.accuracy == 1.0);
  CHECK(r.correct == 4);
  CHECK(r.errors == 0);
  CHECK(r.unparseable == 0);
  CHECK(r.failures == 0);
  CHECK(r.backend_name == "gold-echo");
  CHECK(r.template_digest == kTweetSentiment3Checksum);
  // confusion: row sums equal support, off-diagonal empty
  CHECK(r.confusion[0][0] == 2);
  CHECK(r.confusion[1][1] == 1);
  CHECK(r.confusion[2][2] == 1);
  CHECK(r.confusion[0][3] == 0);
}

TEST_CASE("wrong, unparseable, and failing completions land in the right buckets") {
  const auto samples = tiny_samples();
  ScriptedBackend backend(" Positivo");
  backend.script("não gostei nada", " rabisco ilegível");  // unparseable
  backend.fail_on("maravilhoso!");                         // backend throws

  EvalConfig config;
  config.template_name = "tweetsent3";
  config.max_failures = 1;
  const EvalResult r = evaluate(samples, backend, config);
  CHECK(r.correct == 1);      // first Positivo
  CHECK(r.errors == 1);       // Neutro sample answered Positivo
  CHECK(r.unparseable == 2);  // the scribble and the failure
  CHECK(r.failures == 1);
  CHECK(r.outcomes[3].backend_failed);
  CHECK(r.outcomes[1].predicted.empty());
  // the last column collects both non-answers in their gold rows:
  // the unparseable Negativo sample and the failed Positivo sample
  CHECK(r.confusion[2][3] == 1);
  CHECK(r.confusion[0][3] == 1);
  CHECK(r.confusion[1][3] == 0);
  // rows still sum to supports
  std::int64_t total = 0;
  for (const auto& row : r.confusion) {
    for (std::int64_t v : row) total += v;
  }
  CHECK(total == 4);

  // over budget: same backend, zero allowance
  EvalConfig strict = config;
  strict.max_failures = 0;
  CHECK_THROWS_AS(evaluate(samples, backend, strict), IoError);
}

TEST_CASE("gold labels outside the template are rejected up front") {
  const std::vector<LabeledSample> bad = {{"texto", "Alegre"}};
  GoldEchoBackend backend;
  EvalConfig config;
  config.template_name = "tweetsent3";
  CHECK_THROWS_AS(evaluate(bad, backend, config), DataError);
}

TEST_CASE("worker count does not change the result") {
  std::vector<LabeledSample> samples;
  const char* labels[] = {"Positivo", "Neutro", "Negativo"};
  for (int i = 0; i < 23; ++i) {
    samples.push_back({"amostra " + std::to_string(i), labels[i % 3]});
  }
  GoldEchoBackend backend;
  EvalConfig serial;
  serial.template_name = "tweetsent3";
  serial.parallelism = 1;
  EvalConfig wide = serial;
  wide.parallelism = 8;
  const EvalResult a = evaluate(samples, backend, serial);
  const EvalResult b = evaluate(samples, backend, wide);
  CHECK(a.confusion == b.confusion);
  CHECK(a.metrics.accuracy == b.metrics.accuracy);
  REQUIRE(a.outcomes.size() == b.outcomes.size());
  for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
    CHECK(a.outcomes[i].predicted == b.outcomes[i].predicted);
  }
}

TEST_CASE("remote backend speaks the completion protocol") {
  httplib::Server server;
  std::atomic<bool> fail_mode{false};
  std::string seen_auth, seen_prompt;
  server.Post("/complete", [&](const httplib::Request& req, httplib::Response& res) {
    if (fail_mode.load()) {
      res.status = 500;
      return;
    }
    seen_auth = req.get_header_value("Authorization");
    const auto body = nlohmann::json::parse(req.body);
    seen_prompt = body.at("prompt").get<std::string>();
    nlohmann::json reply;
    reply["completion"] = " Positivo";
    res.set_content(reply.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread listener([&server]() { server.listen_after_bind(); });
  server.wait_until_ready();

  RemoteBackend backend("http://127.0.0.1:" + std::to_string(port), "segredo");
  const LabeledSample sample{"dia excelente", "Positivo"};
  const std::string completion = backend.complete("PROMPT-BYTES", sample);
  CHECK(completion == " Positivo");
  CHECK(seen_auth == "Bearer segredo");
  CHECK(seen_prompt == "PROMPT-BYTES");

  // a full evaluation over the wire
  EvalConfig config;
  config.template_name = "tweetsent3";
  config.parallelism = 3;
  const std::vector<LabeledSample> samples = {{"bom", "Positivo"}, {"ruim", "Negativo"}};
  const EvalResult r = evaluate(samples, backend, config);
  CHECK(r.correct == 1);  // everything answered Positivo
  CHECK(r.errors == 1);

  // non-200 responses surface as errors, and the budget rules apply
  fail_mode.store(true);
  CHECK_THROWS_AS(backend.complete("x", sample), IoError);
  CHECK_THROWS_AS(evaluate(samples, backend, config), IoError);

  server.stop();
  listener.join();
}

TEST_CASE("reports are pure functions of the result") {
  const auto samples = tiny_samples();
  GoldEchoBackend backend;
  EvalConfig config;
  config.template_name = "tweetsent3";
  config.weighted_averages = true;
  const EvalResult r = evaluate(samples, backend, config);

  const std::string j1 = report_json(r);
  const std::string j2 = report_json(evaluate(samples, backend, config));
  CHECK(j1 == j2);

  const auto parsed = nlohmann::json::parse(j1);
  CHECK(parsed.at("template").at("name") == "tweetsent3");
  CHECK(parsed.at("template").at("checksum") == "0x36632b816b8183ef");
  CHECK(parsed.at("backend") == "gold-echo");
  CHECK(parsed.at("metrics").at("accuracy") == 1.0);
  CHECK(parsed.at("metrics").at("averaging") == "weighted");
  CHECK(parsed.at("samples").at("total") == 4);
  CHECK(parsed.at("confusion").at("counts").size() == 3);
  CHECK(parsed.at("confusion").at("columns").size() == 4);
  CHECK(parsed.at("outcomes").size() == 4);

  const std::string md = report_markdown(r);
  CHECK(md.find("tweetsent3") != std::string::npos);
  CHECK(md.find("| Positivo") != std::string::npos);

  const std::string csv = report_csv(r);
  CHECK(csv.find("accuracy") != std::string::npos);
  CHECK(csv.find("1.000000") != std::string::npos);

  CHECK(render_report(r, "json") == j1);
  CHECK(render_report(r, "md") == md);
  CHECK_THROWS_AS(render_report(r, "pdf"), UsageError);
}

TEST_CASE("chart bars scale exactly with the metric values") {
  const std::vector<std::string> metrics = {"accuracy", "macro-f1"};
  std::vector<ChartSeries> series;
  series.push_back({"run-a", {0.25, 0.5}});
  series.push_back({"run-b <&>", {1.0, 0.0}});
  const std::string svg = chart_svg(metrics, series);

  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("run-b &lt;&amp;&gt;") != std::string::npos);

  // collect the bar heights in document order
  std::vector<double> heights;
  std::size_t at = 0;
  while ((at = svg.find("<rect class=\"bar\"", at)) != std::string::npos) {
    const std::size_t h = svg.find("height=\"", at) + 8;
    heights.push_back(std::stod(svg.substr(h)));
    at = h;
  }
  REQUIRE(heights.size() == 4);
  CHECK(heights[0] == 50.0);   // 0.25 * 200
  CHECK(heights[1] == 100.0);  // 0.50 * 200
  CHECK(heights[1] == 2.0 * heights[0]);  // doubling the metric doubles the bar
  CHECK(heights[2] == 200.0);
  CHECK(heights[3] == 0.0);

  CHECK_THROWS_AS(chart_svg(metrics, std::vector<ChartSeries>{{"x", {0.5}}}), DimensionError);
  CHECK_THROWS_AS(chart_svg(metrics, std::vector<ChartSeries>{{"x", {0.5, 1.5}}}), DataError);
  CHECK_THROWS_AS(chart_svg(std::vector<std::string>{}, series), UsageError);
}
