#include "wrag/core.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "wrag/error.hpp"

namespace wrag {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidHit: return "invalid-hit";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    case ErrorKind::CorruptFile: return "corrupt-file";
    case ErrorKind::Truncated: return "truncated";
    case ErrorKind::ChecksumMismatch: return "checksum-mismatch";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::DuplicateId: return "duplicate-id";
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::Integrity: return "integrity";
    case ErrorKind::Transport: return "transport";
    case ErrorKind::ProviderFault: return "provider-fault";
  }
  return "unknown";
}

std::string trim(const std::string& text) {
  constexpr const char* kSpace = " \t\n\r\f\v";
  const auto first = text.find_first_not_of(kSpace);
  if (first == std::string::npos) return {};
  const auto last = text.find_last_not_of(kSpace);
  return text.substr(first, last - first + 1);
}

void validate_chunk(const Chunk& chunk) {
  if (chunk.chunk_id.empty()) fail(ErrorKind::InvalidArgument, "chunk has empty chunk_id");
  if (chunk.source.empty()) {
    fail(ErrorKind::InvalidArgument, "chunk '" + chunk.chunk_id + "' has empty source");
  }
  if (trim(chunk.text).empty()) {
    fail(ErrorKind::InvalidArgument, "chunk '" + chunk.chunk_id + "' has empty text");
  }
}

void validate_query(const Query& query) {
  if (trim(query.text).empty()) fail(ErrorKind::InvalidArgument, "query text is empty");
  if (query.top_k < 1 || query.top_k > kMaxQueryTopK) {
    fail(ErrorKind::InvalidArgument,
         "top_k must be in [1, " + std::to_string(kMaxQueryTopK) + "], got " +
             std::to_string(query.top_k));
  }
}

bool canonical_hit_order(const ScoredHit& a, const ScoredHit& b) {
  for (const ScoredHit* h : {&a, &b}) {
    if (!std::isfinite(h->adjusted_distance) || !std::isfinite(h->raw_distance)) {
      fail(ErrorKind::InvalidHit, "non-finite distance on hit '" + h->chunk_id + "'");
    }
  }
  return std::tie(a.adjusted_distance, a.source, a.chunk_id) <
         std::tie(b.adjusted_distance, b.source, b.chunk_id);
}

void sort_canonical(std::vector<ScoredHit>& hits) {
  std::sort(hits.begin(), hits.end(), canonical_hit_order);
}

}  // namespace wrag
