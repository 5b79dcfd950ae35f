#pragma once

#include <string>

#include "ttlm/evaluate.hpp"

namespace ttlm {

// All three renderings are pure functions of the result: no timestamps or
// environment leaks, so re-running the same evaluation reproduces the same
// bytes.
std::string report_json(const EvalResult& r);
std::string report_markdown(const EvalResult& r);
std::string report_csv(const EvalResult& r);

std::string render_report(const EvalResult& r, const std::string& format);  // json|markdown|csv

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace ttlm
