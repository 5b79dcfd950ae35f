#pragma once

#include <string>
#include <vector>

#include "ttlm/train.hpp"

namespace ttlm {

struct LabeledSample {
  std::string text;
  std::string label;
};

// JSONL with {"instruction": ..., "response": ...} per line.
std::vector<InstructionExample> load_instruction_jsonl(const std::string& path);

// JSONL with {"text": ..., "label": ...} per line.
std::vector<LabeledSample> load_labeled_jsonl(const std::string& path);

// CSV with a "text,label" header; quoted fields with doubled-quote escapes.
std::vector<LabeledSample> load_labeled_csv(const std::string& path);

// Dispatches on extension: .jsonl/.json or .csv.
std::vector<LabeledSample> load_labeled_dataset(const std::string& path);

}  // namespace ttlm
