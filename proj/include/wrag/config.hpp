#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "wrag/core.hpp"
#include "wrag/weighting.hpp"

namespace wrag {

enum class DistanceMetric { L2Normalized };

struct SourceConfig {
  std::string display_name;
  Threshold threshold;      // tau_k, inclusive bound on adjusted distance
  std::size_t top_k = 10;   // K_k

  bool operator==(const SourceConfig&) const = default;
};

struct ProfileConfig {
  std::map<SourceId, double> boosts;  // b_k >= 1; w_k = 1 / b_k

  bool operator==(const ProfileConfig&) const = default;
};

struct ProviderConfig {
  std::string kind;  // embedding: "local_hash" | "remote"; generation/evaluation: "mock" | "remote"
  std::string url;
  std::string model;
  int timeout_ms = 30000;
  int retries = 2;
  int max_in_flight = 4;

  bool operator==(const ProviderConfig&) const = default;
};

struct ProvidersConfig {
  ProviderConfig embedding{"local_hash", "", "all-MiniLM-L6-v2"};
  ProviderConfig generation{"mock", "", ""};
  ProviderConfig evaluation{"mock", "", ""};

  bool operator==(const ProvidersConfig&) const = default;
};

struct EngineConfig {
  std::size_t embedding_dim = 384;
  DistanceMetric distance_metric = DistanceMetric::L2Normalized;
  std::size_t final_top_k = 5;
  double confidence_threshold = 0.7;
  std::size_t max_generation_attempts = 2;
  std::size_t prompt_budget_chars = 12000;
  std::string index_dir = "idx";

  std::map<SourceId, SourceConfig> sources;
  std::map<std::string, ProfileConfig> profiles;
  std::vector<QueryTypeRule> rules;
  ProvidersConfig providers;

  std::vector<SourceId> source_ids() const;
  ProfileSet profile_set() const;

  bool operator==(const EngineConfig&) const = default;
};

// Built-in configuration: manuals/faq/guides/kb, default rules and profiles.
EngineConfig default_config();

// Parses the JSON config text (comments allowed). Omitted sections and keys
// take their defaults; unknown keys are rejected with their path.
EngineConfig parse_config(const std::string& text);
EngineConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const EngineConfig& config);

// Throws Config on any out-of-range value or dangling reference.
void validate_config(const EngineConfig& config);

// WRAG_EMBED_URL / WRAG_LLM_URL / WRAG_EVAL_URL override provider URLs.
void apply_env_overrides(EngineConfig& config);

}  // namespace wrag
