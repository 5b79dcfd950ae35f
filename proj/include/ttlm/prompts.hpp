#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ttlm {

// A zero-shot / few-shot classification prompt. The rendered form is
// body + query_prefix + sample text + query_suffix, and the expected
// completion is one label word.
struct PromptTemplate {
  std::string name;
  std::string body;
  std::string query_prefix;
  std::string query_suffix;
  std::vector<std::string> labels;
  bool canonical = false;  // true: wording is pinned by checksum
};

const std::vector<PromptTemplate>& prompt_registry();
const PromptTemplate& find_template(const std::string& name);  // ConfigError when unknown

std::string render_prompt(const PromptTemplate& t, const std::string& text);

// ASCII + Latin-1 supplement lowercasing; accents kept.
std::string fold_case(const std::string& utf8);
// Lowercase and strip Latin-1 accents (á -> a, ç -> c, ...).
std::string fold_accents_and_case(const std::string& utf8);

// First-word label read-out: drop a leading "Resposta:" echo, take the first
// whitespace-delimited token, trim surrounding ASCII punctuation, then match
// labels case-insensitively (accent-insensitively when fold_accents). The
// returned string is the canonical label; nullopt = unparseable completion.
std::optional<std::string> extract_label(const std::string& completion,
                                         std::span<const std::string> labels,
                                         bool fold_accents = false);

// FNV-1a 64 over body and affixes, 0x1f-separated.
std::uint64_t template_checksum(const PromptTemplate& t);

// Frozen digests of the two canonical templates.
inline constexpr std::uint64_t kTweetSentiment3Checksum = 0x36632b816b8183efULL;
inline constexpr std::uint64_t kNewsTopic4Checksum = 0xd28b79c798d21ad9ULL;

}  // namespace ttlm
