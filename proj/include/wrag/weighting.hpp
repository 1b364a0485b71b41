#pragma once

#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "wrag/core.hpp"

namespace wrag {

// A query type recognized by any of its patterns. Rules are tried in ascending
// priority; exactly one rule must be an always-match fallback with the
// largest priority number.
struct QueryTypeRule {
  std::string type_name;
  std::vector<std::string> patterns;
  int priority = 0;
  std::string profile_id;  // profile bound to this type; defaults to type_name

  bool operator==(const QueryTypeRule&) const = default;
};

// Per-source multiplier on raw distance. Smaller weight favors a source.
struct WeightProfile {
  std::string profile_id;
  std::map<SourceId, double> weights;

  // Throws NotFound for a source without an entry.
  double weight_for(const SourceId& source) const;

  bool operator==(const WeightProfile&) const = default;
};

// D~ = w * D. Throws InvalidArgument for w <= 0, D < 0 or non-finite inputs.
double adjust_distance(double weight, double raw_distance);

// Compiled, validated rule set.
class QueryClassifier {
 public:
  // Throws Config when a pattern does not compile, type names repeat, or the
  // fallback rule is missing, duplicated or not last.
  explicit QueryClassifier(std::vector<QueryTypeRule> rules);

  const std::string& classify(const std::string& text) const;
  const std::vector<QueryTypeRule>& rules() const noexcept { return rules_; }

 private:
  std::vector<QueryTypeRule> rules_;  // sorted by priority
  std::vector<std::vector<std::regex>> compiled_;
};

std::string classify_query(const std::string& text, const std::vector<QueryTypeRule>& rules);

// Profiles plus the type_name -> profile_id bindings taken from the rules.
class ProfileSet {
 public:
  ProfileSet() = default;
  // Throws Config if a binding names an unknown profile.
  ProfileSet(std::map<std::string, WeightProfile> profiles,
             std::map<std::string, std::string> bindings);

  // override wins when present; otherwise the profile bound to type_name.
  const WeightProfile& select(const std::string& type_name,
                              const std::optional<std::string>& override_id = std::nullopt) const;

  const std::map<std::string, WeightProfile>& profiles() const noexcept { return profiles_; }
  const std::map<std::string, std::string>& bindings() const noexcept { return bindings_; }

 private:
  std::map<std::string, WeightProfile> profiles_;
  std::map<std::string, std::string> bindings_;
};

const WeightProfile& select_profile(const std::string& type_name, const ProfileSet& profiles,
                                    const std::optional<std::string>& override_id);

// w_k = 1 / b_k. Sources missing from `boosts` get boost 1.
WeightProfile profile_from_boosts(const std::string& profile_id,
                                  const std::map<SourceId, double>& boosts,
                                  const std::vector<SourceId>& sources);

WeightProfile uniform_profile(const std::vector<SourceId>& sources);

std::vector<QueryTypeRule> default_rules();

}  // namespace wrag
