#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "wrag/core.hpp"

namespace wrag {

nlohmann::json to_json(const Chunk& chunk);
// Throws InvalidArgument naming the missing or mistyped field.
Chunk chunk_from_json(const nlohmann::json& node);

// One Chunk object per line; blank lines skipped. Errors carry the line number.
std::vector<Chunk> read_chunks_jsonl(const std::filesystem::path& path);
void write_chunks_jsonl(const std::filesystem::path& path, const std::vector<Chunk>& chunks);

// chunk_id -> Chunk across every loaded source.
class ChunkStore {
 public:
  // Throws DuplicateId when an id is already present.
  void add(const Chunk& chunk);
  const Chunk& at(const ChunkId& id) const;
  bool contains(const ChunkId& id) const { return chunks_.count(id) != 0; }
  std::size_t size() const noexcept { return chunks_.size(); }

 private:
  std::unordered_map<ChunkId, Chunk> chunks_;
};

struct LabeledQuery {
  std::string query_id;
  std::string query_text;
  std::set<ChunkId> gold_chunk_ids;
  std::set<std::string> gold_answer_keys;
  std::optional<std::string> expected_type;

  bool operator==(const LabeledQuery&) const = default;
};

nlohmann::json to_json(const LabeledQuery& query);
LabeledQuery labeled_query_from_json(const nlohmann::json& node);
std::vector<LabeledQuery> read_queries_jsonl(const std::filesystem::path& path);
void write_queries_jsonl(const std::filesystem::path& path, const std::vector<LabeledQuery>& queries);

// Validates every chunk of a raw corpus file, stamps `source` when the field
// is missing, rejects duplicates and conflicting sources.
std::vector<Chunk> normalize_corpus(std::vector<Chunk> chunks, const SourceId& source);

}  // namespace wrag
