#include "wrag/corpus.hpp"

#include <fstream>
#include <set>

#include "wrag/error.hpp"

namespace wrag {

using json = nlohmann::json;

namespace {

std::string required_string(const json& node, const char* field) {
  const auto it = node.find(field);
  if (it == node.end() || !it->is_string()) {
    fail(ErrorKind::InvalidArgument, std::string("missing or non-string field '") + field + "'");
  }
  return it->get<std::string>();
}

template <typename Parse>
auto read_jsonl(const std::filesystem::path& path, Parse parse) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::vector<decltype(parse(json{}))> out;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(json::parse(line)));
    } catch (const json::exception& e) {
      fail(ErrorKind::InvalidArgument, path.string() + ":" + std::to_string(number) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

template <typename T>
void write_jsonl(const std::filesystem::path& path, const std::vector<T>& items) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
  for (const auto& item : items) out << to_json(item).dump() << "\n";
  if (!out) fail(ErrorKind::Io, "short write to '" + path.string() + "'");
}

}  // namespace

json to_json(const Chunk& chunk) {
  return {{"chunk_id", chunk.chunk_id}, {"doc_id", chunk.doc_id},     {"source", chunk.source},
          {"text", chunk.text},         {"metadata", chunk.metadata}};
}

Chunk chunk_from_json(const json& node) {
  if (!node.is_object()) fail(ErrorKind::InvalidArgument, "chunk must be a JSON object");
  Chunk chunk;
  chunk.chunk_id = required_string(node, "chunk_id");
  chunk.text = required_string(node, "text");
  if (node.contains("source")) chunk.source = required_string(node, "source");
  if (node.contains("doc_id")) chunk.doc_id = required_string(node, "doc_id");
  if (const auto it = node.find("metadata"); it != node.end()) {
    if (!it->is_object()) fail(ErrorKind::InvalidArgument, "'metadata' must be an object of strings");
    for (const auto& [key, value] : it->items()) {
      if (!value.is_string()) fail(ErrorKind::InvalidArgument, "metadata value for '" + key + "' must be a string");
      chunk.metadata[key] = value.get<std::string>();
    }
  }
  return chunk;
}

std::vector<Chunk> read_chunks_jsonl(const std::filesystem::path& path) {
  return read_jsonl(path, chunk_from_json);
}

void write_chunks_jsonl(const std::filesystem::path& path, const std::vector<Chunk>& chunks) {
  write_jsonl(path, chunks);
}

void ChunkStore::add(const Chunk& chunk) {
  if (!chunks_.emplace(chunk.chunk_id, chunk).second) {
    fail(ErrorKind::DuplicateId, "duplicate chunk_id '" + chunk.chunk_id + "'");
  }
}

const Chunk& ChunkStore::at(const ChunkId& id) const {
  const auto it = chunks_.find(id);
  if (it == chunks_.end()) fail(ErrorKind::NotFound, "unknown chunk_id '" + id + "'");
  return it->second;
}

json to_json(const LabeledQuery& query) {
  json node = {{"query_id", query.query_id},
               {"query_text", query.query_text},
               {"gold_chunk_ids", query.gold_chunk_ids},
               {"gold_answer_keys", query.gold_answer_keys}};
  if (query.expected_type) node["expected_type"] = *query.expected_type;
  return node;
}

LabeledQuery labeled_query_from_json(const json& node) {
  if (!node.is_object()) fail(ErrorKind::InvalidArgument, "labeled query must be a JSON object");
  LabeledQuery q;
  q.query_id = required_string(node, "query_id");
  q.query_text = required_string(node, "query_text");
  q.gold_chunk_ids = node.at("gold_chunk_ids").get<std::set<ChunkId>>();
  q.gold_answer_keys = node.at("gold_answer_keys").get<std::set<std::string>>();
  if (node.contains("expected_type")) q.expected_type = required_string(node, "expected_type");
  if (q.gold_chunk_ids.empty()) fail(ErrorKind::InvalidArgument, "query '" + q.query_id + "' has no gold chunks");
  return q;
}

std::vector<LabeledQuery> read_queries_jsonl(const std::filesystem::path& path) {
  return read_jsonl(path, labeled_query_from_json);
}

void write_queries_jsonl(const std::filesystem::path& path, const std::vector<LabeledQuery>& queries) {
  write_jsonl(path, queries);
}

std::vector<Chunk> normalize_corpus(std::vector<Chunk> chunks, const SourceId& source) {
  std::set<ChunkId> seen;
  for (auto& chunk : chunks) {
    if (chunk.source.empty()) chunk.source = source;
    if (chunk.source != source) {
      fail(ErrorKind::InvalidArgument,
           "chunk '" + chunk.chunk_id + "' declares source '" + chunk.source + "', expected '" + source + "'");
    }
    if (chunk.doc_id.empty()) chunk.doc_id = chunk.chunk_id;
    validate_chunk(chunk);
    if (!seen.insert(chunk.chunk_id).second) {
      fail(ErrorKind::DuplicateId, "duplicate chunk_id '" + chunk.chunk_id + "'");
    }
  }
  return chunks;
}

}  // namespace wrag
