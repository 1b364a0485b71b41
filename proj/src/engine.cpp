#include "wrag/engine.hpp"

#include <spdlog/spdlog.h>

#include "wrag/error.hpp"

namespace wrag {

namespace {

constexpr std::size_t kExcerptBytes = 240;

std::string excerpt(const std::string& text) {
  if (text.size() <= kExcerptBytes) return text;
  std::size_t cut = kExcerptBytes;
  // Do not split a UTF-8 sequence.
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  return text.substr(0, cut) + "...";
}

std::vector<ContextBlock> to_blocks(std::span<const ScoredHit> hits, const ChunkStore& store) {
  std::vector<ContextBlock> blocks;
  blocks.reserve(hits.size());
  for (const auto& h : hits) blocks.push_back({h.source, h.chunk_id, store.at(h.chunk_id).text});
  return blocks;
}

}  // namespace

Engine::Engine(EngineConfig config, LoadedSources sources, std::unique_ptr<Embedder> embedder,
               std::unique_ptr<Generator> generator, std::unique_ptr<Evaluator> evaluator)
    : config_(std::move(config)),
      classifier_(config_.rules),
      profiles_(config_.profile_set()),
      embedder_(std::move(embedder)),
      generator_(std::move(generator)),
      evaluator_(std::move(evaluator)),
      sources_(std::move(sources)) {
  if (!sources_.registry || !sources_.chunks) fail(ErrorKind::Config, "engine needs a registry and chunk store");
  if (embedder_->descriptor().dim != sources_.registry->dim()) {
    fail(ErrorKind::Config, "embedder dim does not match index dim");
  }
}

LoadedSources Engine::sources() const {
  std::lock_guard lock(sources_mutex_);
  return sources_;
}

void Engine::swap_sources(LoadedSources sources) {
  if (!sources.registry || sources.registry->dim() != embedder_->descriptor().dim) {
    fail(ErrorKind::Config, "replacement registry is missing or has the wrong dim");
  }
  std::lock_guard lock(sources_mutex_);
  sources_ = std::move(sources);
}

Query Engine::make_query(const std::string& text, std::optional<std::size_t> top_k,
                         std::optional<std::string> profile) const {
  Query q{text, top_k.value_or(config_.final_top_k), std::move(profile)};
  validate_query(q);
  return q;
}

Engine::Plan Engine::plan(const Query& query) const {
  validate_query(query);
  const auto& type_name = classifier_.classify(query.text);
  return {type_name, &profiles_.select(type_name, query.profile_override)};
}

RetrievalResult Engine::retrieve(const Query& query) const {
  const auto p = plan(query);
  const auto current = sources();
  return wrag::retrieve(query, *current.registry, *p.profile, *embedder_, p.type_name);
}

QueryOutcome Engine::answer(const Query& query) const {
  const auto p = plan(query);
  const auto current = sources();
  auto pool = search_sources(*current.registry, embedder_->embed(query.text), *p.profile);
  pool.type_name = p.type_name;

  const ContextSource context = [&](std::size_t k) {
    const auto hits = final_topk(pool.pool, k);
    return to_blocks(hits, *current.chunks);
  };
  const GateSettings settings{config_.confidence_threshold, config_.max_generation_attempts,
                              config_.prompt_budget_chars};
  QueryOutcome outcome;
  outcome.response = run_gate(query.text, query.top_k, context, *generator_, *evaluator_, settings);
  outcome.retrieval = cut_pool(pool, outcome.response.final_k);
  return outcome;
}

nlohmann::json Engine::query_response(const Query& query) const {
  const auto outcome = answer(query);
  const auto current = sources();
  const auto& r = outcome.response;

  nlohmann::json hits = nlohmann::json::array();
  for (const auto& h : outcome.retrieval.final_hits) {
    auto node = to_json(h);
    node["excerpt"] = excerpt(current.chunks->at(h.chunk_id).text);
    hits.push_back(std::move(node));
  }
  nlohmann::json out = {
      {"confidence", r.confidence},
      {"verdict", std::string(to_string(r.verdict))},
      {"attempts", r.attempts},
      {"type_name", outcome.retrieval.type_name},
      {"profile_id", outcome.retrieval.profile_id},
      {"confidence_threshold", config_.confidence_threshold},
      {"final_k", r.final_k},
      {"hits", hits},
      {"citations", r.citations},
      {"per_source_counts", to_json(outcome.retrieval)["per_source_counts"]},
  };
  if (r.answer) out["answer"] = *r.answer;
  if (!r.diagnostic.empty()) out["diagnostic"] = r.diagnostic;
  return out;
}

nlohmann::json Engine::retrieve_response(const Query& query) const { return to_json(retrieve(query)); }

nlohmann::json Engine::sources_summary(const std::optional<std::string>& profile_id) const {
  const auto current = sources();
  nlohmann::json profiles = nlohmann::json::object();
  for (const auto& [name, profile] : profiles_.profiles()) {
    if (profile_id && name != *profile_id) continue;
    nlohmann::json weights = nlohmann::json::object();
    for (const auto& [source, w] : profile.weights) weights[source] = format_distance(w);
    profiles[name] = weights;
  }
  if (profile_id && profiles.empty()) fail(ErrorKind::NotFound, "unknown profile '" + *profile_id + "'");

  nlohmann::json sources = nlohmann::json::array();
  for (const auto& s : current.registry->sources()) {
    sources.push_back({{"id", s.kind.id},
                       {"display_name", s.kind.display_name},
                       {"entries", s.index->size()},
                       {"top_k", s.top_k},
                       {"threshold", s.threshold.is_unbounded() ? nlohmann::json("unbounded")
                                                                : nlohmann::json(format_distance(s.threshold.value()))}});
  }
  return {{"dim", current.registry->dim()},
          {"sources", sources},
          {"profiles", profiles},
          {"bindings", profiles_.bindings()}};
}

std::filesystem::path index_path(const std::filesystem::path& dir, const SourceId& source) {
  return dir / (source + ".wrag");
}

std::filesystem::path sidecar_path(const std::filesystem::path& dir, const SourceId& source) {
  return dir / (source + ".chunks.jsonl");
}

FlatIndex write_source_index(const SourceId& source, const std::vector<Chunk>& chunks, const Embedder& embedder,
                             const std::filesystem::path& dir) {
  const auto normalized = normalize_corpus(chunks, source);
  auto index = build_index(source, normalized, embedder);
  std::filesystem::create_directories(dir);
  write_chunks_jsonl(sidecar_path(dir, source), normalized);
  save_index(index, index_path(dir, source));
  return index;
}

LoadedSources load_sources(const EngineConfig& config, const std::filesystem::path& dir, bool require_all) {
  std::vector<std::string> missing;
  std::vector<RegisteredSource> registered;
  auto store = std::make_shared<ChunkStore>();
  for (const auto& [id, source] : config.sources) {
    const auto ipath = index_path(dir, id);
    const auto spath = sidecar_path(dir, id);
    const bool have_index = std::filesystem::exists(ipath);
    const bool have_sidecar = std::filesystem::exists(spath);
    if (!have_index) missing.push_back(ipath.string());
    if (!have_sidecar) missing.push_back(spath.string());
    if (!have_index || !have_sidecar) continue;

    auto index = std::make_shared<const FlatIndex>(load_index(ipath, id));
    const auto chunks = read_chunks_jsonl(spath);
    for (const auto& c : chunks) store->add(c);
    for (const auto& cid : index->ids()) {
      if (!store->contains(cid)) {
        fail(ErrorKind::Integrity, "index '" + ipath.string() + "' references chunk '" + cid +
                                       "' absent from " + spath.string());
      }
    }
    registered.push_back({{id, source.display_name}, std::move(index), source.threshold, source.top_k});
  }

  std::string listing;
  for (const auto& m : missing) listing += "\n  " + m;
  if (registered.empty() || (require_all && !missing.empty())) {
    fail(ErrorKind::NotFound, "missing index files:" + listing);
  }
  if (!missing.empty()) spdlog::warn("some configured sources are not indexed:{}", listing);

  LoadedSources loaded;
  loaded.registry = std::make_shared<const SourceRegistry>(config.embedding_dim, std::move(registered));
  loaded.chunks = std::move(store);
  return loaded;
}

LoadedSources build_sources(const EngineConfig& config, const std::map<SourceId, std::vector<Chunk>>& corpora,
                            const Embedder& embedder) {
  std::vector<RegisteredSource> registered;
  auto store = std::make_shared<ChunkStore>();
  for (const auto& [id, source] : config.sources) {
    const auto it = corpora.find(id);
    const std::vector<Chunk> empty;
    const auto& chunks = it == corpora.end() ? empty : it->second;
    for (const auto& c : chunks) store->add(c);
    auto index = std::make_shared<const FlatIndex>(build_index(id, chunks, embedder));
    registered.push_back({{id, source.display_name}, std::move(index), source.threshold, source.top_k});
  }
  LoadedSources loaded;
  loaded.registry = std::make_shared<const SourceRegistry>(config.embedding_dim, std::move(registered));
  loaded.chunks = std::move(store);
  return loaded;
}

std::unique_ptr<Generator> make_generator(const ProviderConfig& provider, bool mock) {
  if (mock || provider.kind == "mock") return std::make_unique<MockGenerator>();
  return std::make_unique<RemoteGenerator>(provider);
}

std::unique_ptr<Evaluator> make_evaluator(const ProviderConfig& provider, bool mock) {
  if (mock || provider.kind == "mock") return std::make_unique<CoverageEvaluator>();
  return std::make_unique<RemoteEvaluator>(provider);
}

std::unique_ptr<Engine> open_engine(const EngineConfig& config, const std::filesystem::path& index_dir,
                                    bool mock_providers, bool require_all_sources) {
  auto sources = load_sources(config, index_dir, require_all_sources);
  std::unique_ptr<Embedder> embedder = mock_providers
                                           ? std::make_unique<LocalHashEmbedder>(config.embedding_dim)
                                           : make_embedder(config.providers.embedding, config.embedding_dim);
  return std::make_unique<Engine>(config, std::move(sources), std::move(embedder),
                                  make_generator(config.providers.generation, mock_providers),
                                  make_evaluator(config.providers.evaluation, mock_providers));
}

}  // namespace wrag
