#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wrag/config.hpp"
#include "wrag/corpus.hpp"
#include "wrag/embedding.hpp"
#include "wrag/generation.hpp"
#include "wrag/retrieval.hpp"
#include "wrag/weighting.hpp"

namespace wrag {

// Indices plus the chunk texts they point at; swapped as one unit.
struct LoadedSources {
  std::shared_ptr<const SourceRegistry> registry;
  std::shared_ptr<const ChunkStore> chunks;
};

struct QueryOutcome {
  GatedResponse response;
  RetrievalResult retrieval;  // retrieval at the final attempt's K
};

// Facade used by both the CLI and the HTTP service so the two produce the
// same QueryResponse for the same input.
class Engine {
 public:
  Engine(EngineConfig config, LoadedSources sources, std::unique_ptr<Embedder> embedder,
         std::unique_ptr<Generator> generator, std::unique_ptr<Evaluator> evaluator);

  const EngineConfig& config() const noexcept { return config_; }
  const Embedder& embedder() const noexcept { return *embedder_; }
  LoadedSources sources() const;

  // Replaces indices between queries; in-flight queries keep the old set.
  void swap_sources(LoadedSources sources);

  // A request without top_k uses the configured final K.
  Query make_query(const std::string& text, std::optional<std::size_t> top_k = std::nullopt,
                   std::optional<std::string> profile = std::nullopt) const;

  RetrievalResult retrieve(const Query& query) const;
  QueryOutcome answer(const Query& query) const;

  nlohmann::json query_response(const Query& query) const;
  nlohmann::json retrieve_response(const Query& query) const;
  nlohmann::json sources_summary(const std::optional<std::string>& profile_id = std::nullopt) const;

 private:
  struct Plan {
    std::string type_name;
    const WeightProfile* profile;
  };
  Plan plan(const Query& query) const;

  EngineConfig config_;
  QueryClassifier classifier_;
  ProfileSet profiles_;
  std::unique_ptr<Embedder> embedder_;
  std::unique_ptr<Generator> generator_;
  std::unique_ptr<Evaluator> evaluator_;
  mutable std::mutex sources_mutex_;
  LoadedSources sources_;
};

std::filesystem::path index_path(const std::filesystem::path& dir, const SourceId& source);
std::filesystem::path sidecar_path(const std::filesystem::path& dir, const SourceId& source);

// Builds and persists one source's flat index and its chunk sidecar.
FlatIndex write_source_index(const SourceId& source, const std::vector<Chunk>& chunks, const Embedder& embedder,
                             const std::filesystem::path& dir);

// Loads every configured source found in `dir`. With `require_all`, any
// missing file fails with the full list of missing paths; otherwise only
// having none at all fails.
LoadedSources load_sources(const EngineConfig& config, const std::filesystem::path& dir, bool require_all);

// Builds a registry straight from in-memory chunks (bench and tests).
LoadedSources build_sources(const EngineConfig& config, const std::map<SourceId, std::vector<Chunk>>& corpora,
                            const Embedder& embedder);

std::unique_ptr<Generator> make_generator(const ProviderConfig& provider, bool mock);
std::unique_ptr<Evaluator> make_evaluator(const ProviderConfig& provider, bool mock);

std::unique_ptr<Engine> open_engine(const EngineConfig& config, const std::filesystem::path& index_dir,
                                    bool mock_providers, bool require_all_sources);

}  // namespace wrag
