#include "wrag/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wrag/error.hpp"

namespace wrag {

using json = nlohmann::json;

namespace {

// Walks one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(ErrorKind::Config, path_ + ": expected an object");
  }

  const json* get(const std::string& key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) fail(ErrorKind::Config, "unknown key '" + at(key) + "'");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::size_t read_positive(ObjectReader& r, const std::string& key, std::size_t fallback) {
  const json* v = r.get(key);
  if (!v) return fallback;
  if (!v->is_number_integer() || v->get<long long>() < 1) {
    fail(ErrorKind::Config, "'" + r.at(key) + "' must be a positive integer");
  }
  return v->get<std::size_t>();
}

int read_int(ObjectReader& r, const std::string& key, int fallback, int min_value) {
  const json* v = r.get(key);
  if (!v) return fallback;
  if (!v->is_number_integer() || v->get<long long>() < min_value) {
    fail(ErrorKind::Config, "'" + r.at(key) + "' must be an integer >= " + std::to_string(min_value));
  }
  return v->get<int>();
}

double read_real(ObjectReader& r, const std::string& key, double fallback) {
  const json* v = r.get(key);
  if (!v) return fallback;
  if (!v->is_number()) fail(ErrorKind::Config, "'" + r.at(key) + "' must be a number");
  return v->get<double>();
}

std::string read_string(ObjectReader& r, const std::string& key, std::string fallback) {
  const json* v = r.get(key);
  if (!v) return fallback;
  if (!v->is_string()) fail(ErrorKind::Config, "'" + r.at(key) + "' must be a string");
  return v->get<std::string>();
}

Threshold read_threshold(ObjectReader& r, const std::string& key) {
  const json* v = r.get(key);
  if (!v) return Threshold::unbounded();
  if (v->is_string() && v->get<std::string>() == "unbounded") return Threshold::unbounded();
  if (!v->is_number()) {
    fail(ErrorKind::Config, "'" + r.at(key) + "' must be a number or \"unbounded\"");
  }
  return Threshold::at(v->get<double>());
}

ProviderConfig read_provider(const json& node, const std::string& path, ProviderConfig fallback) {
  ObjectReader r(node, path);
  ProviderConfig p;
  p.kind = read_string(r, "kind", fallback.kind);
  p.url = read_string(r, "url", fallback.url);
  p.model = read_string(r, "model", fallback.model);
  p.timeout_ms = read_int(r, "timeout_ms", fallback.timeout_ms, 1);
  p.retries = read_int(r, "retries", fallback.retries, 0);
  p.max_in_flight = read_int(r, "max_in_flight", fallback.max_in_flight, 1);
  r.finish();
  return p;
}

json provider_to_json(const ProviderConfig& p) {
  return {{"kind", p.kind},       {"url", p.url},         {"model", p.model},
          {"timeout_ms", p.timeout_ms}, {"retries", p.retries}, {"max_in_flight", p.max_in_flight}};
}

std::map<SourceId, SourceConfig> default_sources() {
  return {
      {"faq", {"FAQs", Threshold::unbounded(), 10}},
      {"guides", {"Troubleshooting Guides", Threshold::unbounded(), 10}},
      {"kb", {"Internal Knowledge Bases", Threshold::unbounded(), 10}},
      {"manuals", {"Product Manuals", Threshold::unbounded(), 10}},
  };
}

std::map<std::string, ProfileConfig> default_profiles(const std::map<SourceId, SourceConfig>& sources) {
  std::map<std::string, ProfileConfig> profiles{
      {"uniform", {}},
      {"general", {}},
      {"sku_specific", {{{"manuals", 2.0}}}},
      {"error_code", {{{"guides", 2.0}}}},
  };
  for (auto& [name, profile] : profiles) {
    std::erase_if(profile.boosts, [&](const auto& kv) { return !sources.count(kv.first); });
  }
  return profiles;
}

}  // namespace

std::vector<SourceId> EngineConfig::source_ids() const {
  std::vector<SourceId> ids;
  ids.reserve(sources.size());
  for (const auto& [id, cfg] : sources) ids.push_back(id);
  return ids;
}

ProfileSet EngineConfig::profile_set() const {
  const auto ids = source_ids();
  std::map<std::string, WeightProfile> built;
  for (const auto& [name, profile] : profiles) built[name] = profile_from_boosts(name, profile.boosts, ids);
  std::map<std::string, std::string> bindings;
  for (const auto& rule : rules) bindings[rule.type_name] = rule.profile_id.empty() ? rule.type_name : rule.profile_id;
  return ProfileSet(std::move(built), std::move(bindings));
}

EngineConfig default_config() {
  EngineConfig config;
  config.sources = default_sources();
  config.profiles = default_profiles(config.sources);
  config.rules = default_rules();
  return config;
}

void validate_config(const EngineConfig& config) {
  if (config.embedding_dim < 8) fail(ErrorKind::Config, "engine.embedding_dim must be >= 8");
  if (config.final_top_k < 1 || config.final_top_k > kMaxQueryTopK) {
    fail(ErrorKind::Config, "engine.final_top_k out of range [1, 1000]");
  }
  if (!(config.confidence_threshold >= 0.0 && config.confidence_threshold <= 1.0)) {
    fail(ErrorKind::Config, "engine.confidence_threshold must be in [0, 1]");
  }
  if (config.max_generation_attempts < 1) {
    fail(ErrorKind::Config, "engine.max_generation_attempts must be positive");
  }
  if (config.prompt_budget_chars < 1) fail(ErrorKind::Config, "engine.prompt_budget_chars must be positive");
  if (config.sources.empty()) fail(ErrorKind::Config, "at least one source must be configured");
  for (const auto& [id, source] : config.sources) {
    if (id.empty()) fail(ErrorKind::Config, "source id must be non-empty");
    if (source.top_k < 1) fail(ErrorKind::Config, "sources." + id + ".top_k must be positive");
    if (!source.threshold.is_unbounded() &&
        !(std::isfinite(source.threshold.value()) && source.threshold.value() > 0.0)) {
      fail(ErrorKind::Config, "sources." + id + ".threshold must be positive or \"unbounded\"");
    }
  }
  for (const auto& [name, profile] : config.profiles) {
    for (const auto& [source, boost] : profile.boosts) {
      if (!config.sources.count(source)) {
        fail(ErrorKind::Config, "profiles." + name + " boosts unknown source '" + source + "'");
      }
      if (!std::isfinite(boost) || boost < 1.0) {
        fail(ErrorKind::Config, "profiles." + name + ".boosts." + source + " must be >= 1");
      }
    }
  }
  QueryClassifier classifier(config.rules);
  (void)config.profile_set();
  for (const auto& kind : {config.providers.generation.kind, config.providers.evaluation.kind}) {
    if (kind != "mock" && kind != "remote") {
      fail(ErrorKind::Config, "provider kind must be \"mock\" or \"remote\", got '" + kind + "'");
    }
  }
  if (config.providers.embedding.kind != "local_hash" && config.providers.embedding.kind != "remote") {
    fail(ErrorKind::Config, "providers.embedding.kind must be \"local_hash\" or \"remote\"");
  }
}

EngineConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }

  EngineConfig config;
  ObjectReader top(root, "");

  if (const json* engine = top.get("engine")) {
    ObjectReader r(*engine, "engine");
    config.embedding_dim = read_positive(r, "embedding_dim", config.embedding_dim);
    const auto metric = read_string(r, "distance_metric", "l2_normalized");
    if (metric != "l2_normalized") fail(ErrorKind::Config, "engine.distance_metric must be \"l2_normalized\"");
    config.final_top_k = read_positive(r, "final_top_k", config.final_top_k);
    config.confidence_threshold = read_real(r, "confidence_threshold", config.confidence_threshold);
    config.max_generation_attempts =
        read_positive(r, "max_generation_attempts", config.max_generation_attempts);
    config.prompt_budget_chars = read_positive(r, "prompt_budget_chars", config.prompt_budget_chars);
    config.index_dir = read_string(r, "index_dir", config.index_dir);
    r.finish();
  }

  if (const json* sources = top.get("sources")) {
    ObjectReader all(*sources, "sources");
    for (const auto& [id, node] : sources->items()) {
      all.get(id);
      ObjectReader r(node, "sources." + id);
      SourceConfig source;
      source.display_name = read_string(r, "display_name", id);
      source.threshold = read_threshold(r, "threshold");
      source.top_k = read_positive(r, "top_k", source.top_k);
      r.finish();
      config.sources[id] = source;
    }
  } else {
    config.sources = default_sources();
  }

  if (const json* profiles = top.get("profiles")) {
    ObjectReader all(*profiles, "profiles");
    for (const auto& [name, node] : profiles->items()) {
      all.get(name);
      ObjectReader r(node, "profiles." + name);
      ProfileConfig profile;
      if (const json* boosts = r.get("boosts")) {
        ObjectReader b(*boosts, "profiles." + name + ".boosts");
        for (const auto& [source, value] : boosts->items()) {
          b.get(source);
          if (!value.is_number()) {
            fail(ErrorKind::Config, "profiles." + name + ".boosts." + source + " must be a number");
          }
          profile.boosts[source] = value.get<double>();
        }
      }
      r.finish();
      config.profiles[name] = profile;
    }
  } else {
    config.profiles = default_profiles(config.sources);
  }

  if (const json* rules = top.get("rules")) {
    ObjectReader all(*rules, "rules");
    for (const auto& [type_name, node] : rules->items()) {
      all.get(type_name);
      ObjectReader r(node, "rules." + type_name);
      QueryTypeRule rule;
      rule.type_name = type_name;
      const json* patterns = r.get("patterns");
      if (!patterns || !patterns->is_array()) {
        fail(ErrorKind::Config, "rules." + type_name + ".patterns must be an array of strings");
      }
      for (const auto& p : *patterns) {
        if (!p.is_string()) fail(ErrorKind::Config, "rules." + type_name + ".patterns must hold strings");
        rule.patterns.push_back(p.get<std::string>());
      }
      rule.priority = read_int(r, "priority", 0, std::numeric_limits<int>::min());
      rule.profile_id = read_string(r, "profile", type_name);
      r.finish();
      config.rules.push_back(std::move(rule));
    }
    std::stable_sort(config.rules.begin(), config.rules.end(),
                     [](const auto& a, const auto& b) { return a.priority < b.priority; });
  } else {
    config.rules = default_rules();
  }

  if (const json* providers = top.get("providers")) {
    ObjectReader r(*providers, "providers");
    if (const json* p = r.get("embedding")) {
      config.providers.embedding = read_provider(*p, "providers.embedding", config.providers.embedding);
    }
    if (const json* p = r.get("generation")) {
      config.providers.generation = read_provider(*p, "providers.generation", config.providers.generation);
    }
    if (const json* p = r.get("evaluation")) {
      config.providers.evaluation = read_provider(*p, "providers.evaluation", config.providers.evaluation);
    }
    r.finish();
  }

  top.finish();
  validate_config(config);
  return config;
}

EngineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const EngineConfig& config) {
  json root;
  root["engine"] = {
      {"embedding_dim", config.embedding_dim},
      {"distance_metric", "l2_normalized"},
      {"final_top_k", config.final_top_k},
      {"confidence_threshold", config.confidence_threshold},
      {"max_generation_attempts", config.max_generation_attempts},
      {"prompt_budget_chars", config.prompt_budget_chars},
      {"index_dir", config.index_dir},
  };
  root["sources"] = json::object();
  for (const auto& [id, source] : config.sources) {
    json threshold = source.threshold.is_unbounded() ? json("unbounded") : json(source.threshold.value());
    root["sources"][id] = {{"display_name", source.display_name}, {"threshold", threshold}, {"top_k", source.top_k}};
  }
  root["profiles"] = json::object();
  for (const auto& [name, profile] : config.profiles) {
    root["profiles"][name] = {{"boosts", profile.boosts}};
  }
  root["rules"] = json::object();
  for (const auto& rule : config.rules) {
    root["rules"][rule.type_name] = {
        {"patterns", rule.patterns}, {"priority", rule.priority}, {"profile", rule.profile_id}};
  }
  root["providers"] = {
      {"embedding", provider_to_json(config.providers.embedding)},
      {"generation", provider_to_json(config.providers.generation)},
      {"evaluation", provider_to_json(config.providers.evaluation)},
  };
  return root.dump(2) + "\n";
}

void apply_env_overrides(EngineConfig& config) {
  if (const char* url = std::getenv("WRAG_EMBED_URL")) {
    config.providers.embedding.url = url;
    config.providers.embedding.kind = "remote";
  }
  if (const char* url = std::getenv("WRAG_LLM_URL")) {
    config.providers.generation.url = url;
    config.providers.generation.kind = "remote";
  }
  if (const char* url = std::getenv("WRAG_EVAL_URL")) {
    config.providers.evaluation.url = url;
    config.providers.evaluation.kind = "remote";
  }
}

}  // namespace wrag
