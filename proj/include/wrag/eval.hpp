#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wrag/config.hpp"
#include "wrag/corpus.hpp"
#include "wrag/generation.hpp"

namespace wrag {

struct CorpusSpec {
  std::size_t sources = 4;
  std::size_t chunks_per_source = 500;
  std::size_t queries = 100;
};

struct SyntheticCorpus {
  std::map<SourceId, std::vector<Chunk>> corpora;
  std::vector<LabeledQuery> queries;
};

// Source ids used by the generator: manuals, guides, faq, kb, then src5...
std::vector<SourceId> synthetic_source_ids(std::size_t count);

// Seeded troubleshooting corpus. SKU queries have their answer in the first
// source (manuals), error-code queries in the second (guides), general
// queries in the third (faq) with an optional second gold chunk in the
// fourth (kb). Each query also plants:
//  * decoys: short chunks in other sources that repeat the query's wording
//    without the answer and therefore sit closer than the gold chunk under
//    equal weights;
//  * for verbose queries, field-note chunks that repeat the query's rare
//    incidental words, which keyword ranking over-weights.
// Bit-for-bit reproducible from the seed. Throws InvalidArgument for a shape
// with zero sources, chunks or queries, or too few chunks to hold the plants.
SyntheticCorpus generate_synthetic_corpus(std::uint64_t seed, const CorpusSpec& spec);

void write_synthetic_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir);
// Reads every <source>.jsonl next to queries.jsonl.
SyntheticCorpus read_synthetic_corpus(const std::filesystem::path& dir);

// Correct iff delivered and the normalized answer contains every normalized
// gold key. Returns 100 * correct / total. Throws InvalidArgument on a count
// mismatch.
double score_accuracy(const std::vector<GatedResponse>& responses, const std::vector<LabeledQuery>& queries);

// Mean over queries of |retrieved ∩ gold| / min(K, |gold|). Only the first
// K ids of each list count.
double score_relevance(const std::vector<std::vector<ChunkId>>& retrieved, const std::vector<LabeledQuery>& queries,
                       std::size_t k);

struct BenchRow {
  std::string system_name;
  double accuracy_pct = 0.0;
  double relevance_score = 0.0;
  std::optional<double> mean_latency_ms;
  std::size_t queries_run = 0;
  std::size_t suppressed_count = 0;
};

struct BenchReport {
  std::uint64_t seed = 0;
  std::size_t final_top_k = 0;
  double confidence_threshold = 0.0;
  std::size_t corpus_chunks = 0;
  std::vector<BenchRow> rows;  // keyword_bm25, uniform_rag, weighted_rag

  const BenchRow& row(const std::string& system_name) const;
};

struct BenchOptions {
  std::uint64_t seed = 0;       // recorded in the report only
  bool record_latency = false;  // latency makes the report non-reproducible
};

// Runs keyword_bm25, uniform_rag (all weights 1, thresholds unbounded) and
// weighted_rag (the configured profiles and thresholds) over the same queries
// with the mock generator and the coverage evaluator. Relevance is scored on
// each system's first-attempt top-K.
BenchReport run_bench(const SyntheticCorpus& corpus, const EngineConfig& config, const BenchOptions& options = {});

nlohmann::json to_json(const BenchReport& report);
std::string format_table(const BenchReport& report);

}  // namespace wrag
