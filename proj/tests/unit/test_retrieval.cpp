#include <doctest.h>

#include <cmath>
#include <set>

#include "support/oracles.hpp"
#include "wrag/config.hpp"
#include "wrag/error.hpp"
#include "wrag/retrieval.hpp"

using namespace wrag;
using testing::Gen;

namespace {

ScoredHit hit(const std::string& chunk, double d, const std::string& source = "faq") {
  return {chunk, source, d, d, 1.0};
}

std::vector<std::string> ids(const std::vector<ScoredHit>& hits) {
  std::vector<std::string> out;
  for (const auto& h : hits) out.push_back(h.chunk_id);
  return out;
}

std::size_t from_source(const std::vector<ScoredHit>& hits, const SourceId& source) {
  return static_cast<std::size_t>(
      std::count_if(hits.begin(), hits.end(), [&](const ScoredHit& h) { return h.source == source; }));
}

}  // namespace

TEST_SUITE("retrieval") {
  TEST_CASE("threshold filter is inclusive") {
    const std::vector<ScoredHit> hits = {hit("a", 0.2), hit("b", 0.5), hit("c", 0.7)};
    CHECK(ids(threshold_filter(hits, Threshold::at(0.5))) == std::vector<std::string>{"a", "b"});
    CHECK(threshold_filter(hits, Threshold::unbounded()) == hits);
    CHECK(threshold_filter(hits, Threshold::at(0.0)).empty());
  }

  TEST_CASE("per-source top-k: identity configuration and oracle") {
    Gen g(31);
    const auto index = testing::random_index(g, "faq", 16, 20);
    const auto q = testing::random_unit(g, 16);

    const auto plain = per_source_topk(index, q, 1.0, Threshold::unbounded(), 5);
    const auto raw = index.search(q, 5);
    REQUIRE(plain.size() == raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      CHECK(plain[i].chunk_id == raw[i].chunk_id);
      CHECK(plain[i].adjusted_distance == plain[i].raw_distance);
    }

    // Oracle: adjust all 20, filter <= tau, sort, truncate.
    const double tau = 0.5 * testing::oracle_search(index, q, 20)[8].distance;
    std::vector<std::pair<double, std::string>> all;
    for (const auto& n : testing::oracle_search(index, q, 20)) {
      if (0.5 * n.distance <= tau) all.emplace_back(0.5 * n.distance, n.chunk_id);
    }
    std::sort(all.begin(), all.end());
    all.resize(std::min<std::size_t>(5, all.size()));
    const auto got = per_source_topk(index, q, 0.5, Threshold::at(tau), 5);
    REQUIRE(got.size() == all.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].chunk_id == all[i].second);
      CHECK(std::abs(got[i].adjusted_distance - all[i].first) <= 1e-9);
      CHECK(got[i].weight_applied == 0.5);
    }

    CHECK(per_source_topk(index, q, 1.0, Threshold::at(1e-9), 5).empty());
  }

  TEST_CASE("aggregate and final top-k") {
    const std::vector<std::vector<ScoredHit>> per = {{hit("a", 0.1, "s1")}, {hit("b", 0.05, "s2"), hit("c", 0.2, "s2")}};
    const auto pool = aggregate(per);
    CHECK(ids(pool) == std::vector<std::string>{"b", "a", "c"});
    CHECK(ids(final_topk(pool, 5)) == std::vector<std::string>{"b", "a", "c"});
    CHECK(ids(final_topk(pool, 2)) == std::vector<std::string>{"b", "a"});

    const std::vector<std::vector<ScoredHit>> with_empty = {{}, {hit("b", 0.05, "s2")}};
    CHECK(ids(aggregate(with_empty)) == std::vector<std::string>{"b"});
    CHECK(aggregate(std::vector<std::vector<ScoredHit>>{{}, {}}).empty());

    const std::vector<std::vector<ScoredHit>> clash = {{hit("a", 0.1, "s1")}, {hit("a", 0.2, "s2")}};
    CHECK_THROWS_AS(aggregate(clash), Error);
  }

  TEST_CASE("pipeline equals the global oracle when every K_k >= K") {
    Gen g(32);
    for (int trial = 0; trial < 40; ++trial) {
      const auto inst = testing::random_instance(g, true, 200);
      const auto got = testing::run_pipeline(inst);
      const auto expected = testing::oracle_pipeline(inst.registry(), inst.query, inst.profile(), inst.k);
      CHECK(testing::keys_of(got) == testing::keys_of(expected));
      for (std::size_t i = 0; i < std::min(got.size(), expected.size()); ++i) {
        CHECK(std::abs(got[i].adjusted_distance - expected[i].adjusted) <= 1e-9);
      }
    }
  }

  TEST_CASE("a binding per-source cap breaks oracle equivalence in the documented way") {
    // One source holds every close vector; its cap of 2 must limit it.
    Gen g(33);
    const std::size_t dim = 16;
    const auto q = testing::random_unit(g, dim);
    std::vector<EmbeddingVector> close;
    for (int i = 0; i < 6; ++i) close.push_back(q);
    auto near = std::make_shared<const FlatIndex>("manuals", dim,
                                                  std::vector<ChunkId>{"m0", "m1", "m2", "m3", "m4", "m5"}, close);
    auto far = std::make_shared<const FlatIndex>(testing::random_index(g, "faq", dim, 30));
    const SourceRegistry registry(dim, {{{"manuals", "M"}, near, Threshold::unbounded(), 2},
                                        {{"faq", "F"}, far, Threshold::unbounded(), 10}});
    const auto profile = uniform_profile({"faq", "manuals"});
    const auto got = final_topk(search_sources(registry, q, profile).pool, 5);
    const auto oracle = testing::oracle_pipeline(registry, q, profile, 5);
    CHECK(testing::keys_of(got) != testing::keys_of(oracle));
    CHECK(from_source(got, "manuals") == 2);
    CHECK(oracle.size() == 5);
  }

  TEST_CASE("boost monotonicity: lowering w_k never loses source-k hits") {
    Gen g(34);
    for (int trial = 0; trial < 40; ++trial) {
      auto inst = testing::random_instance(g, g.coin(), 150);
      const auto pick = g.below(inst.indices.size());
      const auto source = inst.indices[pick]->source();
      const auto before = from_source(testing::run_pipeline(inst), source);
      inst.weights[pick] *= g.uniform(0.1, 0.99);
      CHECK(from_source(testing::run_pipeline(inst), source) >= before);
    }
  }

  TEST_CASE("counts and provenance") {
    Gen g(35);
    auto inst = testing::random_instance(g, true, 100);
    const auto registry = inst.registry();
    const auto pool = search_sources(registry, inst.query, inst.profile());
    const auto result = cut_pool(pool, inst.k);
    std::size_t in_final = 0;
    for (std::size_t i = 0; i < inst.indices.size(); ++i) {
      const auto& c = result.per_source_counts.at(inst.indices[i]->source());
      CHECK(c.searched == inst.indices[i]->size());
      CHECK(c.passed_threshold <= inst.caps[i]);
      CHECK(c.weight == inst.weights[i]);
      CHECK(c.threshold == inst.thresholds[i]);
      in_final += c.in_final;
    }
    CHECK(in_final == result.final_hits.size());
  }

  TEST_CASE("default sku profile weights manuals at one half") {
    const LocalHashEmbedder embedder(64);
    std::vector<RegisteredSource> sources;
    for (const auto& id : std::vector<std::string>{"faq", "guides", "kb", "manuals"}) {
      auto index = std::make_shared<const FlatIndex>(
          build_index(id, std::vector<Chunk>{{id + "-1", id, "d", "fan overheating " + id, {}}}, embedder));
      sources.push_back({{id, id}, index, Threshold::unbounded(), 10});
    }
    // One empty source still yields a valid result.
    sources[2].index = std::make_shared<const FlatIndex>("kb", 64, std::vector<ChunkId>{}, std::vector<EmbeddingVector>{});
    const SourceRegistry registry(64, sources);
    const auto profiles = default_config().profile_set();
    const auto result = retrieve({"SKU-12345 overheating", 5, {}}, registry, profiles.select("sku_specific"), embedder,
                                 "sku_specific");
    CHECK(result.per_source_counts.at("manuals").weight == 0.5);
    CHECK(result.per_source_counts.at("kb").passed_threshold == 0);
    CHECK(result.final_hits.size() == 3);
    CHECK(result.final_hits[0].source == "manuals");
  }

  TEST_CASE("serialization uses 9 significant digits") {
    CHECK(format_distance(0.5) == "0.500000000");
    CHECK(format_distance(1.0 / 3.0) == "0.333333333");
    CHECK(format_distance(0.0) == "0.00000000");
    const auto j = to_json(hit("a", 0.25));
    CHECK(j["adjusted_distance"] == "0.250000000");
  }

  TEST_CASE("repeated concurrent retrieval is byte-identical") {
    Gen g(36);
    const auto inst = testing::random_instance(g, true, 300);
    const auto registry = inst.registry();
    const auto first = to_json(cut_pool(search_sources(registry, inst.query, inst.profile()), inst.k)).dump();
    for (int i = 0; i < 30; ++i) {
      CHECK(to_json(cut_pool(search_sources(registry, inst.query, inst.profile()), inst.k)).dump() == first);
    }
  }

  TEST_CASE("a failing source fails the whole query and names the source") {
    Gen g(37);
    auto good = std::make_shared<const FlatIndex>(testing::random_index(g, "faq", 16, 5));
    const SourceRegistry registry(16, {{{"faq", "F"}, good, Threshold::unbounded(), 3}});
    try {
      search_sources(registry, testing::random_unit(g, 8), uniform_profile({"faq"}));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DimensionMismatch);
      CHECK(std::string(e.what()).find("source 'faq'") != std::string::npos);
    }
    CHECK_THROWS_AS(search_sources(registry, testing::random_unit(g, 16), WeightProfile{"p", {}}), Error);
  }
}
