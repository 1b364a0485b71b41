#include "wrag/retrieval.hpp"

#include <algorithm>
#include <cstdio>
#include <future>
#include <set>
#include <unordered_set>

#include "wrag/error.hpp"

namespace wrag {

SourceRegistry::SourceRegistry(std::size_t dim, std::vector<RegisteredSource> sources)
    : dim_(dim), sources_(std::move(sources)) {
  std::set<SourceId> ids;
  for (const auto& s : sources_) {
    if (s.kind.id.empty()) fail(ErrorKind::Config, "source with empty id");
    if (!ids.insert(s.kind.id).second) fail(ErrorKind::Config, "duplicate source '" + s.kind.id + "'");
    if (!s.index) fail(ErrorKind::Config, "source '" + s.kind.id + "' has no index");
    if (s.index->dim() != dim_) {
      fail(ErrorKind::Config, "source '" + s.kind.id + "' index dim " + std::to_string(s.index->dim()) +
                                  " != engine dim " + std::to_string(dim_));
    }
    if (s.top_k < 1) fail(ErrorKind::Config, "source '" + s.kind.id + "' top_k must be >= 1");
    if (!s.threshold.is_unbounded() && !(s.threshold.value() >= 0.0)) {
      fail(ErrorKind::Config, "source '" + s.kind.id + "' threshold must be >= 0");
    }
  }
}

std::vector<SourceId> SourceRegistry::source_ids() const {
  std::vector<SourceId> ids;
  for (const auto& s : sources_) ids.push_back(s.kind.id);
  return ids;
}

std::size_t SourceRegistry::total_entries() const noexcept {
  std::size_t n = 0;
  for (const auto& s : sources_) n += s.index->size();
  return n;
}

std::vector<ScoredHit> threshold_filter(std::vector<ScoredHit> hits, const Threshold& tau) {
  if (tau.is_unbounded()) return hits;
  std::erase_if(hits, [&](const ScoredHit& h) { return !tau.admits(h.adjusted_distance); });
  return hits;
}

std::vector<ScoredHit> per_source_topk(const FlatIndex& index, const EmbeddingVector& query, double weight,
                                       const Threshold& tau, std::size_t top_k) {
  const auto raw = index.search(query, top_k);
  std::vector<ScoredHit> hits;
  hits.reserve(raw.size());
  for (const auto& n : raw) {
    hits.push_back({n.chunk_id, index.source(), n.distance, adjust_distance(weight, n.distance), weight});
  }
  hits = threshold_filter(std::move(hits), tau);
  sort_canonical(hits);
  if (hits.size() > top_k) hits.resize(top_k);
  return hits;
}

std::vector<ScoredHit> aggregate(std::span<const std::vector<ScoredHit>> per_source) {
  std::vector<ScoredHit> pool;
  std::unordered_set<std::string_view> seen;
  for (const auto& hits : per_source) {
    for (const auto& h : hits) {
      if (!seen.insert(h.chunk_id).second) {
        fail(ErrorKind::Integrity, "chunk_id '" + h.chunk_id + "' retrieved from more than one source");
      }
    }
    pool.insert(pool.end(), hits.begin(), hits.end());
  }
  sort_canonical(pool);
  return pool;
}

std::vector<ScoredHit> final_topk(std::span<const ScoredHit> pool, std::size_t k) {
  const auto n = std::min(k, pool.size());
  return {pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n)};
}

RetrievalPool search_sources(const SourceRegistry& registry, const EmbeddingVector& query,
                             const WeightProfile& profile) {
  const auto& sources = registry.sources();
  std::vector<double> weights;
  weights.reserve(sources.size());
  for (const auto& s : sources) weights.push_back(profile.weight_for(s.kind.id));

  std::vector<std::future<std::vector<ScoredHit>>> tasks;
  tasks.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    tasks.push_back(std::async(std::launch::async, [&, i] {
      const auto& s = sources[i];
      return per_source_topk(*s.index, query, weights[i], s.threshold, s.top_k);
    }));
  }

  // Join every task before reporting the first failure so no task outlives
  // the references it captured.
  std::vector<std::vector<ScoredHit>> per_source(sources.size());
  std::optional<Error> first_error;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    try {
      per_source[i] = tasks[i].get();
    } catch (const Error& e) {
      if (!first_error) first_error.emplace(e.kind(), "source '" + sources[i].kind.id + "': " + e.what());
    } catch (const std::exception& e) {
      if (!first_error) {
        first_error.emplace(ErrorKind::Integrity, "source '" + sources[i].kind.id + "': " + e.what());
      }
    }
  }
  if (first_error) throw *first_error;

  RetrievalPool out;
  out.profile_id = profile.profile_id;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    auto& c = out.per_source_counts[sources[i].kind.id];
    c.searched = sources[i].index->size();
    c.passed_threshold = per_source[i].size();
    c.weight = weights[i];
    c.threshold = sources[i].threshold;
  }
  out.pool = aggregate(per_source);
  return out;
}

RetrievalResult cut_pool(const RetrievalPool& pool, std::size_t k) {
  RetrievalResult result;
  result.final_hits = final_topk(pool.pool, k);
  result.per_source_counts = pool.per_source_counts;
  for (auto& [id, c] : result.per_source_counts) c.in_final = 0;
  for (const auto& h : result.final_hits) ++result.per_source_counts.at(h.source).in_final;
  result.profile_id = pool.profile_id;
  result.type_name = pool.type_name;
  return result;
}

RetrievalResult retrieve(const Query& query, const SourceRegistry& registry, const WeightProfile& profile,
                         const Embedder& embedder, const std::string& type_name) {
  validate_query(query);
  const auto query_vec = embedder.embed(query.text);
  auto pool = search_sources(registry, query_vec, profile);
  pool.type_name = type_name;
  return cut_pool(pool, query.top_k);
}

SourceRegistry with_unbounded_thresholds(const SourceRegistry& registry) {
  auto sources = registry.sources();
  for (auto& s : sources) s.threshold = Threshold::unbounded();
  return SourceRegistry(registry.dim(), std::move(sources));
}

std::string format_distance(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%#.9g", value);
  return buf;
}

nlohmann::json to_json(const ScoredHit& hit) {
  return {{"chunk_id", hit.chunk_id},
          {"source", hit.source},
          {"raw_distance", format_distance(hit.raw_distance)},
          {"adjusted_distance", format_distance(hit.adjusted_distance)},
          {"weight_applied", format_distance(hit.weight_applied)}};
}

nlohmann::json to_json(const RetrievalResult& result) {
  nlohmann::json hits = nlohmann::json::array();
  for (const auto& h : result.final_hits) hits.push_back(to_json(h));
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [id, c] : result.per_source_counts) {
    counts[id] = {{"searched", c.searched},
                  {"passed_threshold", c.passed_threshold},
                  {"in_final", c.in_final},
                  {"weight", format_distance(c.weight)},
                  {"threshold", c.threshold.is_unbounded() ? nlohmann::json("unbounded")
                                                           : nlohmann::json(format_distance(c.threshold.value()))}};
  }
  return {{"type_name", result.type_name},
          {"profile_id", result.profile_id},
          {"final_hits", hits},
          {"per_source_counts", counts}};
}

}  // namespace wrag
