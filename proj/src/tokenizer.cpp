#include "ttlm/tokenizer.hpp"

#include "ttlm/errors.hpp"

namespace ttlm {

std::vector<std::int64_t> tokenize(std::string_view text) {
  std::vector<std::int64_t> ids;
  ids.reserve(text.size());
  for (unsigned char b : text) {
    ids.push_back(static_cast<std::int64_t>(b) + kByteOffset);
  }
  return ids;
}

std::string detokenize(std::span<const std::int64_t> ids) {
  std::string out;
  out.reserve(ids.size());
  for (std::int64_t id : ids) {
    if (id < 0 || id >= kVocabSize) {
      throw DataError("token id " + std::to_string(id) + " outside vocabulary of " +
                      std::to_string(kVocabSize));
    }
    if (id < kByteOffset) continue;  // pad/bos/eos carry no bytes
    out.push_back(static_cast<char>(static_cast<unsigned char>(id - kByteOffset)));
  }
  return out;
}

}  // namespace ttlm
