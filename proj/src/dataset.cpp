#include "ttlm/dataset.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ttlm/errors.hpp"

namespace ttlm {

namespace {

using nlohmann::json;

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

json parse_line(const std::string& line, const std::string& path, std::size_t line_no) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": not a JSON object");
  }
  return j;
}

std::string require_string(const json& j, const char* key, const std::string& path,
                           std::size_t line_no) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": missing string field '" + key +
                     "'");
  }
  return j[key].get<std::string>();
}

bool blank(const std::string& s) {
  for (char c : s) {
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

}  // namespace

std::vector<InstructionExample> load_instruction_jsonl(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::vector<InstructionExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const json j = parse_line(line, path, line_no);
    out.push_back({require_string(j, "instruction", path, line_no),
                   require_string(j, "response", path, line_no)});
  }
  if (out.empty()) throw DataError("'" + path + "' holds no examples");
  return out;
}

std::vector<LabeledSample> load_labeled_jsonl(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::vector<LabeledSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const json j = parse_line(line, path, line_no);
    out.push_back(
        {require_string(j, "text", path, line_no), require_string(j, "label", path, line_no)});
  }
  if (out.empty()) throw DataError("'" + path + "' holds no samples");
  return out;
}

namespace {

// One CSV record (may span lines inside quotes); true when a record was read.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, const std::string& path) {
  fields.clear();
  int c = in.get();
  if (c == EOF) return false;
  std::string field;
  bool quoted = false;
  bool at_field_start = true;
  while (c != EOF) {
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        const int next = in.get();
        if (next == '"') {
          field.push_back('"');
        } else {
          quoted = false;
          c = next;
          continue;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"' && at_field_start) {
      quoted = true;
      at_field_start = false;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
      at_field_start = true;
    } else if (ch == '\n') {
      break;
    } else if (ch != '\r') {
      field.push_back(ch);
      at_field_start = false;
    }
    c = in.get();
  }
  if (quoted) throw ParseError("'" + path + "': unterminated quoted field");
  fields.push_back(std::move(field));
  return true;
}

}  // namespace

std::vector<LabeledSample> load_labeled_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::vector<std::string> fields;
  if (!read_csv_record(in, fields, path) || fields.size() < 2 || fields[0] != "text" ||
      fields[1] != "label") {
    throw ParseError("'" + path + "': expected a 'text,label' header row");
  }
  std::vector<LabeledSample> out;
  while (read_csv_record(in, fields, path)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
    if (fields.size() != 2) {
      throw ParseError("'" + path + "': row " + std::to_string(out.size() + 2) + " has " +
                       std::to_string(fields.size()) + " fields, expected 2");
    }
    out.push_back({fields[0], fields[1]});
  }
  if (out.empty()) throw DataError("'" + path + "' holds no samples");
  return out;
}

std::vector<LabeledSample> load_labeled_dataset(const std::string& path) {
  const auto dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".jsonl" || ext == ".json") return load_labeled_jsonl(path);
  if (ext == ".csv") return load_labeled_csv(path);
  throw UsageError("cannot infer dataset format from '" + path + "' (use .jsonl or .csv)");
}

}  // namespace ttlm
