#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wrag {

using SourceId = std::string;
using ChunkId = std::string;

struct SourceKind {
  SourceId id;
  std::string display_name;

  bool operator==(const SourceKind&) const = default;
};

struct Chunk {
  ChunkId chunk_id;
  SourceId source;
  std::string doc_id;
  std::string text;
  std::map<std::string, std::string> metadata;

  bool operator==(const Chunk&) const = default;
};

// Throws InvalidArgument when text is blank or ids are empty.
void validate_chunk(const Chunk& chunk);

inline constexpr std::size_t kMaxQueryTopK = 1000;

struct Query {
  std::string text;
  std::size_t top_k = 5;
  std::optional<std::string> profile_override;
};

// Throws InvalidArgument unless text is non-blank and 1 <= top_k <= kMaxQueryTopK.
void validate_query(const Query& query);

// Per-source inclusive upper bound on adjusted distance. Default-constructed
// thresholds are unbounded.
class Threshold {
 public:
  Threshold() = default;
  static Threshold unbounded() { return Threshold(); }
  static Threshold at(double tau) { return Threshold(tau); }

  bool is_unbounded() const noexcept { return !tau_.has_value(); }
  double value() const { return tau_.value(); }
  bool admits(double adjusted_distance) const noexcept {
    return !tau_ || adjusted_distance <= *tau_;
  }
  Threshold scaled(double factor) const {
    return tau_ ? Threshold(*tau_ * factor) : Threshold();
  }

  bool operator==(const Threshold&) const = default;

 private:
  explicit Threshold(double tau) : tau_(tau) {}
  std::optional<double> tau_;
};

struct ScoredHit {
  ChunkId chunk_id;
  SourceId source;
  double raw_distance = 0.0;
  double adjusted_distance = 0.0;
  double weight_applied = 1.0;

  bool operator==(const ScoredHit&) const = default;
};

// Total order: adjusted distance ascending, then source id, then chunk id.
// Throws InvalidHit if either distance is non-finite.
bool canonical_hit_order(const ScoredHit& a, const ScoredHit& b);

void sort_canonical(std::vector<ScoredHit>& hits);

// Trims ASCII whitespace from both ends.
std::string trim(const std::string& text);

}  // namespace wrag
