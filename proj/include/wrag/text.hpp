#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace wrag {

// Lowercases ASCII, splits on every non-alphanumeric byte and drops empty
// tokens. Shared by the local embedder, BM25 and the mock evaluator.
std::vector<std::string> tokenize(std::string_view text);

// 64-bit FNV-1a; stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

// Case-folds and collapses runs of whitespace to single spaces, trimmed.
std::string normalize_for_match(std::string_view text);

}  // namespace wrag
