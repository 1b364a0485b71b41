#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wrag/core.hpp"
#include "wrag/embedding.hpp"
#include "wrag/vector_index.hpp"
#include "wrag/weighting.hpp"

namespace wrag {

struct RegisteredSource {
  SourceKind kind;
  std::shared_ptr<const FlatIndex> index;
  Threshold threshold;
  std::size_t top_k = 10;
};

// Facade over the per-source indices. Immutable once built; swap a whole
// registry (shared_ptr) to replace indices.
class SourceRegistry {
 public:
  // Throws Config on duplicate ids, dim mismatch, top_k == 0 or a negative
  // bounded threshold.
  SourceRegistry(std::size_t dim, std::vector<RegisteredSource> sources);

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<RegisteredSource>& sources() const noexcept { return sources_; }
  std::vector<SourceId> source_ids() const;
  std::size_t total_entries() const noexcept;

 private:
  std::size_t dim_;
  std::vector<RegisteredSource> sources_;
};

struct SourceCounts {
  std::size_t searched = 0;          // entries scanned in the source index
  std::size_t passed_threshold = 0;  // |T_k| after filter and per-source cap
  std::size_t in_final = 0;
  double weight = 1.0;
  Threshold threshold;

  bool operator==(const SourceCounts&) const = default;
};

struct RetrievalResult {
  std::vector<ScoredHit> final_hits;
  std::map<SourceId, SourceCounts> per_source_counts;
  std::string profile_id;
  std::string type_name;

  bool operator==(const RetrievalResult&) const = default;
};

// Global pool G before the final cut, kept so callers can widen K without
// searching again.
struct RetrievalPool {
  std::vector<ScoredHit> pool;
  std::map<SourceId, SourceCounts> per_source_counts;
  std::string profile_id;
  std::string type_name;
};

// Keeps hits with adjusted distance <= tau (inclusive), order preserved.
std::vector<ScoredHit> threshold_filter(std::vector<ScoredHit> hits, const Threshold& tau);

// T_k: raw top-K_k search, weight, filter, cut to K_k under canonical order.
// A constant per-source weight preserves within-source order, so no extra
// candidates beyond K_k are needed.
std::vector<ScoredHit> per_source_topk(const FlatIndex& index, const EmbeddingVector& query, double weight,
                                       const Threshold& tau, std::size_t top_k);

// G = union of T_k sorted canonically. Throws Integrity on a chunk id that
// appears in more than one source.
std::vector<ScoredHit> aggregate(std::span<const std::vector<ScoredHit>> per_source);

// First min(K, |G|) hits of the sorted pool.
std::vector<ScoredHit> final_topk(std::span<const ScoredHit> pool, std::size_t k);

// Searches every source concurrently and merges deterministically. Any
// source failure fails the whole call, naming the source.
RetrievalPool search_sources(const SourceRegistry& registry, const EmbeddingVector& query,
                             const WeightProfile& profile);

RetrievalResult cut_pool(const RetrievalPool& pool, std::size_t k);

RetrievalResult retrieve(const Query& query, const SourceRegistry& registry, const WeightProfile& profile,
                         const Embedder& embedder, const std::string& type_name = {});

// Same registry with every weight 1 and every threshold unbounded is the
// equal-weight baseline; this builds the registry half of it.
SourceRegistry with_unbounded_thresholds(const SourceRegistry& registry);

// Fixed 9-significant-digit decimal text used for every serialized distance.
std::string format_distance(double value);

nlohmann::json to_json(const ScoredHit& hit);
nlohmann::json to_json(const RetrievalResult& result);

}  // namespace wrag
