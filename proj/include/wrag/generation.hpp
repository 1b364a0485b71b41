#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wrag/config.hpp"
#include "wrag/core.hpp"
#include "wrag/http_client.hpp"
#include "wrag/retrieval.hpp"

namespace wrag {

struct ContextBlock {
  SourceId source;
  ChunkId chunk_id;
  std::string text;

  bool operator==(const ContextBlock&) const = default;
};

struct PromptTemplate {
  std::string id;
  std::string body;  // placeholders: {{context}}, {{question}}, {{answer}}
};

const PromptTemplate& answer_template();
const PromptTemplate& evaluator_template();

struct PromptBundle {
  std::string query_text;
  std::vector<ContextBlock> context_blocks;  // T_final order, possibly tail-truncated
  std::string template_id;
  std::string rendered;
  std::size_t dropped_blocks = 0;
};

std::string render_context(const std::vector<ContextBlock>& blocks);

// Renders preamble, numbered blocks and the question. Whole blocks are
// dropped from the tail until the prompt fits budget_chars. Returns nullopt
// when `blocks` is empty or not even the first block fits.
std::optional<PromptBundle> build_prompt(const std::string& query_text, const std::vector<ContextBlock>& blocks,
                                         const PromptTemplate& tmpl, std::size_t budget_chars);

struct ChatMessage {
  std::string role;
  std::string content;
};

nlohmann::json chat_request_body(const std::string& model, const std::vector<ChatMessage>& messages);
// Pulls choices[0].message.content (or a top-level "content"). ProviderFault otherwise.
std::string chat_reply_content(const nlohmann::json& reply);

class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string complete(const PromptBundle& bundle) = 0;
};

// Non-empty draft or ProviderFault; transport errors pass through.
std::string generate(const PromptBundle& bundle, Generator& generator);

// Echoes every context block as "[chunk:<id>] <text>" lines.
class MockGenerator final : public Generator {
 public:
  std::string complete(const PromptBundle& bundle) override;
};

class RemoteGenerator final : public Generator {
 public:
  explicit RemoteGenerator(const ProviderConfig& provider);
  std::string complete(const PromptBundle& bundle) override;

 private:
  std::string model_;
  JsonHttpClient client_;
};

// Chunk ids cited as [chunk:<id>] in a draft, in order of appearance.
std::vector<ChunkId> cited_chunk_ids(const std::string& draft);

struct EvaluationRequest {
  std::string query_text;
  std::string draft;
  std::vector<ContextBlock> context_blocks;
};

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  // Raw evaluator reply; expected to contain a "confidence: <decimal>" line.
  virtual std::string judge(const EvaluationRequest& request) = 0;
};

// Reads the first line matching "confidence: <decimal>" (case-insensitive,
// surrounding whitespace allowed). Throws ProviderFault when absent or
// outside [0, 1]; never substitutes a default.
double parse_confidence(const std::string& reply);

double evaluate(const std::string& query_text, const std::string& draft,
                const std::vector<ContextBlock>& context_blocks, Evaluator& evaluator);

// Replays a fixed score sequence; throws ProviderFault once exhausted.
class ScriptedEvaluator final : public Evaluator {
 public:
  explicit ScriptedEvaluator(std::vector<double> scores) : scores_(std::move(scores)) {}
  std::string judge(const EvaluationRequest& request) override;
  std::size_t calls() const noexcept { return next_.load(); }

 private:
  std::vector<double> scores_;
  std::atomic<std::size_t> next_{0};
};

// Deterministic stand-in judge: the best fraction of distinct query tokens
// that a single context block covers, provided the draft cites that block.
class CoverageEvaluator final : public Evaluator {
 public:
  std::string judge(const EvaluationRequest& request) override;
};

class RemoteEvaluator final : public Evaluator {
 public:
  explicit RemoteEvaluator(const ProviderConfig& provider);
  std::string judge(const EvaluationRequest& request) override;

 private:
  std::string model_;
  JsonHttpClient client_;
};

enum class Verdict { Delivered, Suppressed };
std::string_view to_string(Verdict verdict) noexcept;

struct AttemptRecord {
  std::size_t k = 0;
  std::vector<ChunkId> context_ids;
  double confidence = 0.0;
};

struct GatedResponse {
  std::optional<std::string> answer;  // present only when delivered
  double confidence = 0.0;            // final attempt if delivered, best achieved if suppressed
  Verdict verdict = Verdict::Suppressed;
  std::size_t attempts = 0;
  std::vector<ChunkId> citations;
  std::string diagnostic;
  std::vector<AttemptRecord> history;
  std::size_t final_k = 0;
};

struct GateSettings {
  double confidence_threshold = 0.7;
  std::size_t max_attempts = 2;
  std::size_t prompt_budget_chars = 12000;
};

inline constexpr const char* kNoContextDiagnostic = "no context above threshold";

// Supplies the ordered context for a given final K. Larger K must return a
// superset (prefix extension) of smaller K.
using ContextSource = std::function<std::vector<ContextBlock>(std::size_t k)>;

// generate -> evaluate -> deliver if confidence >= threshold; otherwise
// double K and retry until max_attempts, then suppress. Provider errors
// propagate unchanged.
GatedResponse run_gate(const std::string& query_text, std::size_t initial_k, const ContextSource& context,
                       Generator& generator, Evaluator& evaluator, const GateSettings& settings);

}  // namespace wrag
