#pragma once

// Hand-rolled generators and brute-force oracles shared by the unit and
// acceptance suites. The oracles deliberately avoid the library's search
// code: they score every entry with their own loops and sort everything.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "wrag/embedding.hpp"
#include "wrag/retrieval.hpp"
#include "wrag/vector_index.hpp"
#include "wrag/weighting.hpp"

namespace wrag::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  bool coin(double p = 0.5) { return unit() < p; }
  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

inline EmbeddingVector random_unit(Gen& g, std::size_t dim) {
  std::vector<double> raw(dim);
  for (;;) {
    double sum = 0.0;
    for (auto& x : raw) {
      x = g.uniform(-1.0, 1.0);
      sum += x * x;
    }
    if (sum > 1e-6) return EmbeddingVector::normalized(raw);
  }
}

inline std::string padded(const std::string& prefix, std::size_t i) {
  auto digits = std::to_string(i);
  return prefix + std::string(digits.size() < 6 ? 6 - digits.size() : 0, '0') + digits;
}

inline FlatIndex random_index(Gen& g, const SourceId& source, std::size_t dim, std::size_t n) {
  std::vector<ChunkId> ids;
  std::vector<EmbeddingVector> vectors;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(padded(source + "-", i));
    vectors.push_back(random_unit(g, dim));
  }
  // Shuffle ids so storage order differs from id order.
  for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[g.below(i)]);
  return FlatIndex(source, dim, std::move(ids), std::move(vectors));
}

// Exhaustive scan: every distance via (a-b)^2 summed in long double, sort
// all by (distance, id), keep k.
inline std::vector<Neighbor> oracle_search(const FlatIndex& index, const EmbeddingVector& q, std::size_t k) {
  std::vector<Neighbor> all;
  const auto qv = q.values();
  for (std::size_t i = 0; i < index.size(); ++i) {
    long double sum = 0.0L;
    const auto v = index.vector(i);
    for (std::size_t d = 0; d < qv.size(); ++d) {
      const long double diff = static_cast<long double>(qv[d]) - static_cast<long double>(v[d]);
      sum += diff * diff;
    }
    all.push_back({index.ids()[i], static_cast<double>(sum)});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    return std::tie(a.distance, a.chunk_id) < std::tie(b.distance, b.chunk_id);
  });
  all.resize(std::min(k, all.size()));
  return all;
}

struct OracleHit {
  double adjusted;
  SourceId source;
  ChunkId chunk_id;
};

// Scores every chunk in every source, applies w and tau, sorts globally and
// truncates to K. Per-source caps are ignored on purpose.
inline std::vector<OracleHit> oracle_pipeline(const SourceRegistry& registry, const EmbeddingVector& q,
                                              const WeightProfile& profile, std::size_t k) {
  std::vector<OracleHit> all;
  for (const auto& s : registry.sources()) {
    const double w = profile.weights.at(s.kind.id);
    for (const auto& n : oracle_search(*s.index, q, s.index->size())) {
      const double adjusted = w * n.distance;
      if (s.threshold.is_unbounded() || adjusted <= s.threshold.value()) all.push_back({adjusted, s.kind.id, n.chunk_id});
    }
  }
  std::sort(all.begin(), all.end(), [](const OracleHit& a, const OracleHit& b) {
    return std::tie(a.adjusted, a.source, a.chunk_id) < std::tie(b.adjusted, b.source, b.chunk_id);
  });
  all.resize(std::min(k, all.size()));
  return all;
}

struct Instance {
  std::size_t dim = 16;
  std::vector<std::shared_ptr<const FlatIndex>> indices;
  std::vector<double> weights;
  std::vector<Threshold> thresholds;
  std::vector<std::size_t> caps;
  std::size_t k = 5;
  EmbeddingVector query;

  SourceRegistry registry() const {
    std::vector<RegisteredSource> sources;
    for (std::size_t i = 0; i < indices.size(); ++i) {
      sources.push_back({{indices[i]->source(), indices[i]->source()}, indices[i], thresholds[i], caps[i]});
    }
    return SourceRegistry(dim, std::move(sources));
  }
  WeightProfile profile() const {
    WeightProfile p{"random", {}};
    for (std::size_t i = 0; i < indices.size(); ++i) p.weights[indices[i]->source()] = weights[i];
    return p;
  }
};

// 4 sources with w in [0.25, 4], random tau (sometimes unbounded). With
// `caps_cover_k` every K_k >= K; otherwise at least one K_k < K.
inline Instance random_instance(Gen& g, bool caps_cover_k, std::size_t max_size = 400) {
  static const std::vector<SourceId> names = {"faq", "guides", "kb", "manuals"};
  Instance inst;
  inst.dim = g.coin(0.7) ? 16 : 32;
  inst.k = g.between(1, 12);
  for (const auto& name : names) {
    inst.indices.push_back(std::make_shared<const FlatIndex>(random_index(g, name, inst.dim, g.between(0, max_size))));
    inst.weights.push_back(std::exp(g.uniform(std::log(0.25), std::log(4.0))));
    // Squared distances between random unit vectors sit in [0, 4].
    inst.thresholds.push_back(g.coin(0.25) ? Threshold::unbounded() : Threshold::at(g.uniform(0.5, 6.0)));
    inst.caps.push_back(caps_cover_k ? g.between(inst.k, inst.k + 10) : g.between(1, inst.k + 5));
  }
  if (!caps_cover_k && inst.k > 1) {
    const auto pick = g.below(inst.caps.size());
    inst.caps[pick] = g.between(1, inst.k - 1);
  }
  inst.query = random_unit(g, inst.dim);
  return inst;
}

inline std::vector<std::tuple<SourceId, ChunkId>> keys_of(const std::vector<ScoredHit>& hits) {
  std::vector<std::tuple<SourceId, ChunkId>> out;
  for (const auto& h : hits) out.emplace_back(h.source, h.chunk_id);
  return out;
}

inline std::vector<std::tuple<SourceId, ChunkId>> keys_of(const std::vector<OracleHit>& hits) {
  std::vector<std::tuple<SourceId, ChunkId>> out;
  for (const auto& h : hits) out.emplace_back(h.source, h.chunk_id);
  return out;
}

// Pipeline result for an instance, straight from the library.
inline std::vector<ScoredHit> run_pipeline(const Instance& inst) {
  const auto registry = inst.registry();
  const auto pool = search_sources(registry, inst.query, inst.profile());
  return final_topk(pool.pool, inst.k);
}

}  // namespace wrag::testing
