#include "wrag/keyword_index.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "wrag/error.hpp"
#include "wrag/text.hpp"

namespace wrag {

Bm25Index Bm25Index::build(std::span<const Chunk> chunks, Bm25Params params) {
  if (chunks.empty()) fail(ErrorKind::InvalidArgument, "BM25 is undefined for an empty corpus");
  Bm25Index index;
  index.params_ = params;
  std::size_t total_length = 0;
  for (const auto& chunk : chunks) {
    const auto tokens = tokenize(chunk.text);
    if (tokens.empty()) {
      fail(ErrorKind::InvalidArgument, "chunk '" + chunk.chunk_id + "' has zero tokens");
    }
    if (!index.doc_lengths_.emplace(chunk.chunk_id, tokens.size()).second) {
      fail(ErrorKind::DuplicateId, "duplicate chunk_id '" + chunk.chunk_id + "'");
    }
    total_length += tokens.size();

    std::map<std::string, std::size_t> counts;
    for (const auto& t : tokens) ++counts[t];
    for (auto& [term, tf] : counts) index.postings_[term].push_back({chunk.chunk_id, tf});
  }
  index.avg_doc_length_ = static_cast<double>(total_length) / static_cast<double>(chunks.size());
  return index;
}

double Bm25Index::idf(const std::string& term) const {
  const auto it = postings_.find(term);
  const double n = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
  const double total = static_cast<double>(doc_count());
  return std::log((total - n + 0.5) / (n + 0.5) + 1.0);
}

double Bm25Index::term_weight(double term_idf, std::size_t tf, std::size_t doc_length) const {
  const double f = static_cast<double>(tf);
  const double norm = 1.0 - params_.b + params_.b * static_cast<double>(doc_length) / avg_doc_length_;
  return term_idf * f * (params_.k1 + 1.0) / (f + params_.k1 * norm);
}

std::vector<std::string> Bm25Index::unique_terms(const std::string& query) {
  auto terms = tokenize(query);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  return terms;
}

double Bm25Index::score(const std::string& query, const ChunkId& chunk_id) const {
  const auto len = doc_lengths_.find(chunk_id);
  if (len == doc_lengths_.end()) fail(ErrorKind::NotFound, "unknown chunk_id '" + chunk_id + "'");
  double total = 0.0;
  for (const auto& term : unique_terms(query)) {
    const auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const auto posting = std::find_if(it->second.begin(), it->second.end(),
                                      [&](const Posting& p) { return p.chunk_id == chunk_id; });
    if (posting == it->second.end()) continue;
    total += term_weight(idf(term), posting->term_frequency, len->second);
  }
  return total;
}

std::vector<KeywordHit> Bm25Index::search(const std::string& query, std::size_t k) const {
  // Accumulate per document in sorted term order so totals match score().
  std::map<ChunkId, double> totals;
  for (const auto& term : unique_terms(query)) {
    const auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double term_idf = idf(term);
    for (const auto& p : it->second) {
      totals[p.chunk_id] += term_weight(term_idf, p.term_frequency, doc_lengths_.at(p.chunk_id));
    }
  }
  std::vector<KeywordHit> hits;
  hits.reserve(totals.size());
  for (const auto& [id, s] : totals) {
    if (s > 0.0) hits.push_back({id, s});
  }
  const auto before = [](const KeywordHit& a, const KeywordHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.chunk_id < b.chunk_id;
  };
  const std::size_t take = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(take), hits.end(), before);
  hits.resize(take);
  return hits;
}

}  // namespace wrag
