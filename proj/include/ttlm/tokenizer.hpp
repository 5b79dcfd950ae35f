#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ttlm {

// Byte-level vocabulary: 3 specials then the 256 byte values, id = byte + 3.
inline constexpr std::int64_t kPadId = 0;
inline constexpr std::int64_t kBosId = 1;
inline constexpr std::int64_t kEosId = 2;
inline constexpr std::int64_t kByteOffset = 3;
inline constexpr std::int64_t kVocabSize = 259;

// UTF-8 (or any byte string) to ids; no specials added.
std::vector<std::int64_t> tokenize(std::string_view text);

// Ids back to bytes. Specials are skipped; ids outside [0, 259) raise DataError.
std::string detokenize(std::span<const std::int64_t> ids);

}  // namespace ttlm
