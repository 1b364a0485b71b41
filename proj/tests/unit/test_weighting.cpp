#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "wrag/config.hpp"
#include "wrag/error.hpp"
#include "wrag/weighting.hpp"

using namespace wrag;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_SUITE("weighting") {
  TEST_CASE("adjusted distance is w times D") {
    CHECK(adjust_distance(1.0, 0.42) == 0.42);
    CHECK(adjust_distance(0.5, 0.8) == doctest::Approx(0.4));
    CHECK(adjust_distance(2.0, 0.3) == doctest::Approx(0.6));
    CHECK(kind_of([] { adjust_distance(0.0, 0.3); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { adjust_distance(1.0, -0.1); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { adjust_distance(INFINITY, 0.1); }) == ErrorKind::InvalidArgument);
  }

  TEST_CASE("default rules classify by pattern and priority") {
    const QueryClassifier classifier(default_rules());
    CHECK(classifier.classify("SKU-12345 fan spins loud") == "sku_specific");
    CHECK(classifier.classify("how do I reset the admin password") == "general");
    CHECK(classifier.classify("error E-1234 on boot") == "error_code");
    // Matches both the sku rule and the error-code rule.
    CHECK(classifier.classify("SKU-12345 shows PWR-4021") == "sku_specific");
    CHECK(classifier.classify("Model AB-1234 is loud") == "sku_specific");
  }

  TEST_CASE("classification is pure") {
    testing::Gen g(2);
    const QueryClassifier classifier(default_rules());
    const std::vector<std::string> words = {"SKU-1", "fan", "E-12", "noise", "Model", "X-999", "reset"};
    for (int i = 0; i < 200; ++i) {
      std::string text;
      for (std::size_t w = g.between(1, 5); w > 0; --w) text += words[g.below(words.size())] + " ";
      CHECK(classifier.classify(text) == classify_query(text, default_rules()));
      CHECK(classifier.classify(text) == classifier.classify(text));
    }
  }

  TEST_CASE("rule sets need exactly one trailing fallback") {
    CHECK(kind_of([] { QueryClassifier({{"a", {"x"}, 0, "a"}}); }) == ErrorKind::Config);
    CHECK(kind_of([] { QueryClassifier({{"a", {".*"}, 0, "a"}, {"b", {".*"}, 1, "b"}}); }) == ErrorKind::Config);
    CHECK(kind_of([] { QueryClassifier({{"a", {"("}, 0, "a"}, {"g", {".*"}, 9, "g"}}); }) == ErrorKind::Config);
  }

  TEST_CASE("profile selection with overrides") {
    const auto profiles = default_config().profile_set();
    const auto& sku = select_profile("sku_specific", profiles, std::nullopt);
    const auto best = std::min_element(sku.weights.begin(), sku.weights.end(),
                                       [](const auto& a, const auto& b) { return a.second < b.second; });
    CHECK(best->first == "manuals");
    CHECK(select_profile("sku_specific", profiles, "uniform").profile_id == "uniform");
    CHECK(kind_of([&] { select_profile("general", profiles, std::string("nonexistent")); }) == ErrorKind::NotFound);
    CHECK(kind_of([&] { select_profile("unbound_type", profiles, std::nullopt); }) == ErrorKind::Config);
  }

  TEST_CASE("boosts map to reciprocal weights") {
    const auto p = profile_from_boosts("p", {{"manuals", 4.0}}, {"faq", "manuals"});
    CHECK(p.weight_for("manuals") == 0.25);
    CHECK(p.weight_for("faq") == 1.0);
    CHECK(kind_of([&] { p.weight_for("kb"); }) == ErrorKind::NotFound);
    CHECK(uniform_profile({"a", "b"}).weights == std::map<SourceId, double>{{"a", 1.0}, {"b", 1.0}});
  }
}
