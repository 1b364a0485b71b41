#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wrag/core.hpp"

namespace wrag {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct Posting {
  ChunkId chunk_id;
  std::size_t term_frequency = 0;
};

struct KeywordHit {
  ChunkId chunk_id;
  double score = 0.0;

  bool operator==(const KeywordHit&) const = default;
};

// Okapi BM25 over the shared tokenizer. IDF is ln((N - n + 0.5)/(n + 0.5) + 1),
// so every score is finite and non-negative.
class Bm25Index {
 public:
  // Throws InvalidArgument on an empty corpus or a chunk with no tokens,
  // DuplicateId on repeated ids.
  static Bm25Index build(std::span<const Chunk> chunks, Bm25Params params = {});

  // Throws NotFound for an unknown chunk id.
  double score(const std::string& query, const ChunkId& chunk_id) const;

  // Top-k by descending score, ties by chunk id; zero scores excluded.
  std::vector<KeywordHit> search(const std::string& query, std::size_t k) const;

  double idf(const std::string& term) const;
  std::size_t doc_count() const noexcept { return doc_lengths_.size(); }
  double avg_doc_length() const noexcept { return avg_doc_length_; }
  const std::map<ChunkId, std::size_t>& doc_lengths() const noexcept { return doc_lengths_; }
  const std::unordered_map<std::string, std::vector<Posting>>& postings() const noexcept { return postings_; }
  const Bm25Params& params() const noexcept { return params_; }

 private:
  double term_weight(double idf, std::size_t tf, std::size_t doc_length) const;
  static std::vector<std::string> unique_terms(const std::string& query);

  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::map<ChunkId, std::size_t> doc_lengths_;
  double avg_doc_length_ = 0.0;
  Bm25Params params_;
};

inline Bm25Index bm25_build(std::span<const Chunk> chunks) { return Bm25Index::build(chunks); }
inline double bm25_score(const Bm25Index& index, const std::string& query, const ChunkId& id) {
  return index.score(query, id);
}
inline std::vector<KeywordHit> bm25_search(const Bm25Index& index, const std::string& query, std::size_t k) {
  return index.search(query, k);
}

}  // namespace wrag
