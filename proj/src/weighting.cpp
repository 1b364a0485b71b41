#include "wrag/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "wrag/error.hpp"

namespace wrag {

double WeightProfile::weight_for(const SourceId& source) const {
  const auto it = weights.find(source);
  if (it == weights.end()) {
    fail(ErrorKind::NotFound, "profile '" + profile_id + "' has no weight for source '" + source + "'");
  }
  return it->second;
}

double adjust_distance(double weight, double raw_distance) {
  if (!std::isfinite(weight) || weight <= 0.0) {
    fail(ErrorKind::InvalidArgument, "weight must be positive and finite");
  }
  if (!std::isfinite(raw_distance) || raw_distance < 0.0) {
    fail(ErrorKind::InvalidArgument, "raw distance must be non-negative and finite");
  }
  return weight * raw_distance;
}

namespace {

bool always_matches(const std::regex& re) { return std::regex_search(std::string(), re); }

}  // namespace

QueryClassifier::QueryClassifier(std::vector<QueryTypeRule> rules) : rules_(std::move(rules)) {
  if (rules_.empty()) fail(ErrorKind::Config, "rule set is empty");
  std::stable_sort(rules_.begin(), rules_.end(),
                   [](const auto& a, const auto& b) { return a.priority < b.priority; });

  std::set<std::string> names;
  std::vector<std::size_t> fallbacks;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    auto& rule = rules_[i];
    if (rule.type_name.empty()) fail(ErrorKind::Config, "rule with empty type_name");
    if (!names.insert(rule.type_name).second) {
      fail(ErrorKind::Config, "duplicate rule type_name '" + rule.type_name + "'");
    }
    if (rule.patterns.empty()) {
      fail(ErrorKind::Config, "rule '" + rule.type_name + "' has no patterns");
    }
    if (rule.profile_id.empty()) rule.profile_id = rule.type_name;

    std::vector<std::regex> compiled;
    bool fallback = false;
    for (const auto& pattern : rule.patterns) {
      try {
        compiled.emplace_back(pattern, std::regex::ECMAScript | std::regex::optimize);
      } catch (const std::regex_error& e) {
        fail(ErrorKind::Config,
             "rule '" + rule.type_name + "': pattern '" + pattern + "' does not compile: " + e.what());
      }
      fallback = fallback || always_matches(compiled.back());
    }
    if (fallback) fallbacks.push_back(i);
    compiled_.push_back(std::move(compiled));
  }

  if (fallbacks.size() != 1) {
    fail(ErrorKind::Config, "rule set needs exactly one always-match fallback rule, found " +
                                std::to_string(fallbacks.size()));
  }
  const std::size_t last = rules_.size() - 1;
  if (fallbacks.front() != last ||
      (rules_.size() > 1 && rules_[last - 1].priority == rules_[last].priority)) {
    fail(ErrorKind::Config, "fallback rule '" + rules_[fallbacks.front()].type_name +
                                "' must have the highest priority number");
  }
}

const std::string& QueryClassifier::classify(const std::string& text) const {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    for (const auto& re : compiled_[i]) {
      if (std::regex_search(text, re)) return rules_[i].type_name;
    }
  }
  // Unreachable with a validated rule set.
  return rules_.back().type_name;
}

std::string classify_query(const std::string& text, const std::vector<QueryTypeRule>& rules) {
  return QueryClassifier(rules).classify(text);
}

ProfileSet::ProfileSet(std::map<std::string, WeightProfile> profiles,
                       std::map<std::string, std::string> bindings)
    : profiles_(std::move(profiles)), bindings_(std::move(bindings)) {
  for (const auto& [type_name, profile_id] : bindings_) {
    if (!profiles_.count(profile_id)) {
      fail(ErrorKind::Config,
           "query type '" + type_name + "' is bound to unknown profile '" + profile_id + "'");
    }
  }
}

const WeightProfile& ProfileSet::select(const std::string& type_name,
                                        const std::optional<std::string>& override_id) const {
  if (override_id) {
    const auto it = profiles_.find(*override_id);
    if (it == profiles_.end()) fail(ErrorKind::NotFound, "unknown profile '" + *override_id + "'");
    return it->second;
  }
  const auto bound = bindings_.find(type_name);
  if (bound == bindings_.end()) {
    fail(ErrorKind::Config, "query type '" + type_name + "' has no bound profile");
  }
  return profiles_.at(bound->second);
}

const WeightProfile& select_profile(const std::string& type_name, const ProfileSet& profiles,
                                    const std::optional<std::string>& override_id) {
  return profiles.select(type_name, override_id);
}

WeightProfile profile_from_boosts(const std::string& profile_id,
                                  const std::map<SourceId, double>& boosts,
                                  const std::vector<SourceId>& sources) {
  WeightProfile profile{profile_id, {}};
  for (const auto& source : sources) {
    const auto it = boosts.find(source);
    const double boost = it == boosts.end() ? 1.0 : it->second;
    if (!std::isfinite(boost) || boost <= 0.0) {
      fail(ErrorKind::Config, "profile '" + profile_id + "': boost for '" + source + "' must be positive");
    }
    profile.weights[source] = 1.0 / boost;
  }
  for (const auto& [source, boost] : boosts) {
    if (std::find(sources.begin(), sources.end(), source) == sources.end()) {
      fail(ErrorKind::Config, "profile '" + profile_id + "' boosts unknown source '" + source + "'");
    }
  }
  return profile;
}

WeightProfile uniform_profile(const std::vector<SourceId>& sources) {
  return profile_from_boosts("uniform", {}, sources);
}

std::vector<QueryTypeRule> default_rules() {
  return {
      {"sku_specific", {R"(\bSKU-\d+\b)", R"(\b[Mm]odel\s+[A-Z]{1,3}-?\d{3,5}\b)"}, 0, "sku_specific"},
      {"error_code", {R"(\b[A-Z]{1,4}-?\d{2,5}\b)"}, 1, "error_code"},
      {"general", {".*"}, 100, "general"},
  };
}

}  // namespace wrag
