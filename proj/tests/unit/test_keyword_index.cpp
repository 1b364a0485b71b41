#include <doctest.h>

#include <cmath>
#include <map>

#include "support/oracles.hpp"
#include "wrag/error.hpp"
#include "wrag/keyword_index.hpp"
#include "wrag/text.hpp"

using namespace wrag;

namespace {

std::vector<Chunk> two_docs() {
  return {{"c1", "faq", "d", "fan error", {}}, {"c2", "faq", "d", "fan fan noise", {}}};
}

// Textbook Okapi BM25 with the non-negative IDF, written out term by term.
double oracle_score(const std::vector<Chunk>& corpus, const std::string& query, const ChunkId& id) {
  const double k1 = 1.2, b = 0.75;
  std::map<ChunkId, std::vector<std::string>> docs;
  double total = 0.0;
  for (const auto& c : corpus) {
    docs[c.chunk_id] = tokenize(c.text);
    total += static_cast<double>(docs[c.chunk_id].size());
  }
  const double n_docs = static_cast<double>(docs.size());
  const double avg = total / n_docs;
  auto terms = tokenize(query);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  double score = 0.0;
  for (const auto& t : terms) {
    double df = 0.0;
    for (const auto& [_, tokens] : docs) df += std::count(tokens.begin(), tokens.end(), t) > 0 ? 1.0 : 0.0;
    const auto& tokens = docs.at(id);
    const double f = static_cast<double>(std::count(tokens.begin(), tokens.end(), t));
    if (f == 0.0) continue;
    const double idf = std::log((n_docs - df + 0.5) / (df + 0.5) + 1.0);
    const double len = static_cast<double>(tokens.size());
    score += idf * f * (k1 + 1.0) / (f + k1 * (1.0 - b + b * len / avg));
  }
  return score;
}

}  // namespace

TEST_SUITE("keyword_index") {
  TEST_CASE("document lengths and average") {
    const auto index = Bm25Index::build(two_docs());
    CHECK(index.doc_lengths().at("c1") == 2);
    CHECK(index.doc_lengths().at("c2") == 3);
    CHECK(index.avg_doc_length() == 2.5);
  }

  TEST_CASE("degenerate corpora are rejected") {
    CHECK_THROWS_AS(Bm25Index::build({}), Error);
    try {
      Bm25Index::build(std::vector<Chunk>{{"p", "faq", "d", "?!", {}}});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("'p'") != std::string::npos);
    }
  }

  TEST_CASE("worked example: noise on c2") {
    const auto index = Bm25Index::build(two_docs());
    // ln(2) * 2.2 / 2.38, computed independently.
    CHECK(std::abs(index.score("noise", "c2") - 0.64072428455121) < 1e-9);
    CHECK(std::abs(index.score("noise", "c2") - 0.6407) < 1e-3);
    CHECK(index.score("noise", "c1") == 0.0);
    CHECK(index.score("absent words", "c1") == 0.0);
  }

  TEST_CASE("fan scores c2 at least as high as c1") {
    const auto index = Bm25Index::build(two_docs());
    CHECK(std::abs(index.score("fan", "c1") - 0.19856803215183175) < 1e-9);
    CHECK(std::abs(index.score("fan", "c2") - 0.2373416715660948) < 1e-9);
    CHECK(index.score("fan", "c2") >= index.score("fan", "c1"));
  }

  TEST_CASE("search: zero scores excluded, k=1 picks c2") {
    const auto index = Bm25Index::build(two_docs());
    CHECK(index.search("password", 5).empty());
    const auto top = index.search("noise", 1);
    REQUIRE(top.size() == 1);
    CHECK(top[0].chunk_id == "c2");
    CHECK_THROWS_AS(index.score("noise", "c9"), Error);
  }

  TEST_CASE("random corpora: oracle scores, exhaustive ranking, invariants") {
    testing::Gen g(21);
    const std::vector<std::string> vocab = {"fan", "psu", "noise", "error", "reset", "bios", "sku",
                                            "raid", "cable", "led", "boot", "hang", "heat", "power"};
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<Chunk> corpus;
      for (int i = 0; i < 100; ++i) {
        std::string text;
        for (std::size_t w = g.between(1, 12); w > 0; --w) text += vocab[g.below(vocab.size())] + " ";
        corpus.push_back({testing::padded("d", i), "kb", "d", text, {}});
      }
      const auto index = Bm25Index::build(corpus);
      std::string query;
      for (std::size_t w = g.between(1, 4); w > 0; --w) query += vocab[g.below(vocab.size())] + " ";

      std::vector<KeywordHit> expected;
      for (const auto& c : corpus) {
        const double s = oracle_score(corpus, query, c.chunk_id);
        CHECK(std::abs(index.score(query, c.chunk_id) - s) < 1e-9);
        CHECK(std::isfinite(s));
        CHECK(s >= 0.0);
        if (s > 0.0) expected.push_back({c.chunk_id, index.score(query, c.chunk_id)});
      }
      std::sort(expected.begin(), expected.end(), [](const KeywordHit& a, const KeywordHit& b) {
        return a.score != b.score ? a.score > b.score : a.chunk_id < b.chunk_id;
      });
      const std::size_t k = g.between(1, 30);
      auto got = index.search(query, k);
      expected.resize(std::min(k, expected.size()));
      CHECK(got == expected);

      const auto longer = index.search(query, k + 1);
      CHECK(std::equal(got.begin(), got.end(), longer.begin()));
      const auto padded_query = query + " zzzunseen";
      CHECK(index.search(padded_query, k) == got);
    }
  }
}
