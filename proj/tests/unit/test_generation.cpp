#include <doctest.h>

#include "support/fake_server.hpp"
#include "support/oracles.hpp"
#include "wrag/error.hpp"
#include "wrag/generation.hpp"

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

std::vector<ContextBlock> blocks(std::size_t n) {
  std::vector<ContextBlock> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"faq", "c" + std::to_string(i + 1), "text of block " + std::to_string(i + 1)});
  }
  return out;
}

ContextSource fixed_context(std::size_t available) {
  return [available](std::size_t k) { return blocks(std::min(k, available)); };
}

class EmptyGenerator final : public Generator {
 public:
  std::string complete(const PromptBundle&) override { return "  \n"; }
};

}  // namespace

TEST_SUITE("generation") {
  TEST_CASE("prompt keeps block order") {
    const auto bundle = build_prompt("why?", blocks(2), answer_template(), 100000);
    REQUIRE(bundle);
    const auto first = bundle->rendered.find("chunk=c1");
    const auto second = bundle->rendered.find("chunk=c2");
    CHECK(first != std::string::npos);
    CHECK(first < second);
    CHECK(bundle->rendered.find("Question: why?") != std::string::npos);
    CHECK(bundle->template_id == "answer_v1");
  }

  TEST_CASE("budget drops whole blocks from the tail") {
    const auto full = build_prompt("q", blocks(3), answer_template(), 100000);
    const auto two = build_prompt("q", blocks(2), answer_template(), 100000);
    REQUIRE(full);
    REQUIRE(two);
    const auto cut = build_prompt("q", blocks(3), answer_template(), two->rendered.size());
    REQUIRE(cut);
    CHECK(cut->context_blocks.size() == 2);
    CHECK(cut->dropped_blocks == 1);
    CHECK(cut->rendered == two->rendered);
    CHECK(cut->rendered.find("text of block 3") == std::string::npos);
    CHECK_FALSE(build_prompt("q", blocks(3), answer_template(), 10));
  }

  TEST_CASE("no blocks, no prompt") { CHECK_FALSE(build_prompt("q", {}, answer_template(), 100000)); }

  TEST_CASE("placeholders inside the question are not expanded") {
    const auto bundle = build_prompt("{{context}}", blocks(1), answer_template(), 100000);
    REQUIRE(bundle);
    CHECK(bundle->rendered.find("Question: {{context}}") != std::string::npos);
  }

  TEST_CASE("mock generator cites every block") {
    MockGenerator generator;
    const auto bundle = build_prompt("q", blocks(2), answer_template(), 100000);
    const auto draft = generate(*bundle, generator);
    CHECK(cited_chunk_ids(draft) == std::vector<ChunkId>{"c1", "c2"});
    EmptyGenerator empty;
    CHECK(kind_of([&] { generate(*bundle, empty); }) == ErrorKind::ProviderFault);
  }

  TEST_CASE("confidence parsing") {
    CHECK(parse_confidence("confidence: 0.35") == 0.35);
    CHECK(parse_confidence("Reasoning first\n  Confidence :0.8  \n") == 0.8);
    CHECK(parse_confidence("confidence: 1") == 1.0);
    CHECK(kind_of([] { parse_confidence("I am fairly sure"); }) == ErrorKind::ProviderFault);
    CHECK(kind_of([] { parse_confidence("confidence: 1.5"); }) == ErrorKind::ProviderFault);
    CHECK(kind_of([] { parse_confidence("my confidence: 0.5 overall"); }) == ErrorKind::ProviderFault);
  }

  TEST_CASE("scripted evaluator passes scores through") {
    ScriptedEvaluator evaluator({0.9});
    CHECK(evaluate("q", "draft", blocks(1), evaluator) == 0.9);
    CHECK(kind_of([&] { evaluate("q", "draft", blocks(1), evaluator); }) == ErrorKind::ProviderFault);
  }

  TEST_CASE("coverage evaluator scores the best cited block") {
    CoverageEvaluator evaluator;
    const std::vector<ContextBlock> ctx = {{"faq", "a", "fan noise"}, {"faq", "b", "fan noise overheating"}};
    CHECK(evaluate("fan noise overheating", "[chunk:a] x\n[chunk:b] y", ctx, evaluator) == 1.0);
    CHECK(evaluate("fan noise overheating", "[chunk:a] x", ctx, evaluator) == doctest::Approx(2.0 / 3.0).epsilon(1e-5));
    CHECK(evaluate("fan noise overheating", "no citations", ctx, evaluator) == 0.0);
  }

  TEST_CASE("gate: deliver on first attempt") {
    MockGenerator generator;
    ScriptedEvaluator evaluator({0.9});
    const auto r = run_gate("q", 2, fixed_context(10), generator, evaluator, {0.7, 2, 100000});
    CHECK(r.verdict == Verdict::Delivered);
    CHECK(r.attempts == 1);
    CHECK(r.answer.has_value());
    CHECK(r.citations == std::vector<ChunkId>{"c1", "c2"});
  }

  TEST_CASE("gate: retry doubles K and delivers") {
    MockGenerator generator;
    ScriptedEvaluator evaluator({0.6, 0.8});
    const auto r = run_gate("q", 2, fixed_context(10), generator, evaluator, {0.7, 2, 100000});
    CHECK(r.verdict == Verdict::Delivered);
    CHECK(r.attempts == 2);
    CHECK(r.final_k == 4);
    CHECK(r.confidence == 0.8);
    CHECK(r.history[1].context_ids.size() == 4);
  }

  TEST_CASE("gate: suppress with the best confidence") {
    MockGenerator generator;
    ScriptedEvaluator evaluator({0.6, 0.6});
    const auto r = run_gate("q", 2, fixed_context(10), generator, evaluator, {0.7, 2, 100000});
    CHECK(r.verdict == Verdict::Suppressed);
    CHECK(r.confidence == 0.6);
    CHECK_FALSE(r.answer.has_value());
    CHECK(r.attempts == 2);
  }

  TEST_CASE("gate: empty context is suppressed with a diagnostic") {
    MockGenerator generator;
    ScriptedEvaluator evaluator({});
    const auto r = run_gate("q", 5, fixed_context(0), generator, evaluator, {0.7, 2, 100000});
    CHECK(r.verdict == Verdict::Suppressed);
    CHECK(r.diagnostic == kNoContextDiagnostic);
    CHECK(evaluator.calls() == 0);
  }

  TEST_CASE("gate: citations never name chunks outside the context") {
    class Fabricating final : public Generator {
     public:
      std::string complete(const PromptBundle& b) override {
        return "[chunk:" + b.context_blocks[0].chunk_id + "] ok [chunk:ghost] [chunk:" + b.context_blocks[0].chunk_id + "]";
      }
    };
    Fabricating generator;
    ScriptedEvaluator evaluator({0.95});
    const auto r = run_gate("q", 3, fixed_context(3), generator, evaluator, {0.7, 2, 100000});
    CHECK(r.citations == std::vector<ChunkId>{"c1"});
  }

  TEST_CASE("gate: randomized soundness") {
    testing::Gen g(41);
    MockGenerator generator;
    for (int trial = 0; trial < 300; ++trial) {
      const double theta = std::vector<double>{0.3, 0.7, 0.9}[g.below(3)];
      const std::size_t max_attempts = g.between(1, 4);
      std::vector<double> scores;
      for (std::size_t i = 0; i < max_attempts; ++i) scores.push_back(g.unit());
      ScriptedEvaluator evaluator(scores);
      const auto r = run_gate("q", g.between(1, 6), fixed_context(g.between(1, 40)), generator, evaluator,
                              {theta, max_attempts, 100000});
      CHECK(r.attempts <= max_attempts);
      if (r.verdict == Verdict::Delivered) CHECK(r.confidence >= theta);
      for (std::size_t i = 1; i < r.history.size(); ++i) {
        const auto& prev = r.history[i - 1].context_ids;
        const auto& next = r.history[i].context_ids;
        CHECK(std::equal(prev.begin(), prev.end(), next.begin()));
      }
    }
  }

  TEST_CASE("remote generator and evaluator speak the chat format") {
    testing::FakeServer server;
    std::string last_body;
    std::string reply = "confidence: 0.42";
    server.on_post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
      last_body = req.body;
      nlohmann::json out = {{"choices", {{{"message", {{"role", "assistant"}, {"content", reply}}}}}}};
      res.set_content(out.dump(), "application/json");
    });
    server.start();
    ProviderConfig provider{"remote", server.url("/v1/chat/completions"), "llama"};

    RemoteGenerator generator(provider);
    const auto bundle = build_prompt("why?", blocks(1), answer_template(), 100000);
    CHECK(generate(*bundle, generator) == "confidence: 0.42");
    const auto sent = nlohmann::json::parse(last_body);
    CHECK(sent["model"] == "llama");
    CHECK(sent["temperature"] == 0);
    CHECK(sent["messages"][0]["content"] == bundle->rendered);

    RemoteEvaluator evaluator(provider);
    CHECK(evaluate("why?", "draft text", blocks(1), evaluator) == 0.42);
    CHECK(nlohmann::json::parse(last_body)["messages"][0]["content"].get<std::string>().find("draft text") !=
          std::string::npos);

    reply = "";
    CHECK(kind_of([&] { generate(*bundle, generator); }) == ErrorKind::ProviderFault);
  }
}
