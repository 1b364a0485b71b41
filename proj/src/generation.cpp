#include "wrag/generation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "prompt_templates.hpp"
#include "wrag/error.hpp"
#include "wrag/text.hpp"

namespace wrag {

const PromptTemplate& answer_template() {
  static const PromptTemplate tmpl{"answer_v1", prompts::kAnswerV1};
  return tmpl;
}

const PromptTemplate& evaluator_template() {
  static const PromptTemplate tmpl{"evaluator_v1", prompts::kEvaluatorV1};
  return tmpl;
}

namespace {

// Single pass, so placeholder text inside a value is never expanded.
std::string substitute(const std::string& body, const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < body.size()) {
    const auto open = body.find("{{", pos);
    if (open == std::string::npos) break;
    const auto close = body.find("}}", open + 2);
    if (close == std::string::npos) break;
    const auto it = values.find(body.substr(open + 2, close - open - 2));
    out.append(body, pos, open - pos);
    if (it == values.end()) {
      out.append(body, open, close + 2 - open);
    } else {
      out += it->second;
    }
    pos = close + 2;
  }
  out.append(body, pos, std::string::npos);
  return out;
}

std::string render_block(std::size_t number, const ContextBlock& block) {
  std::ostringstream out;
  out << "[" << number << "] source=" << block.source << " chunk=" << block.chunk_id << "\n"
      << block.text << "\n\n";
  return out.str();
}

std::string render(const PromptTemplate& tmpl, const std::string& question, const std::string& context,
                   const std::string& answer = {}) {
  return substitute(tmpl.body, {{"question", question}, {"context", context}, {"answer", answer}});
}

}  // namespace

std::string render_context(const std::vector<ContextBlock>& blocks) {
  std::string out;
  for (std::size_t i = 0; i < blocks.size(); ++i) out += render_block(i + 1, blocks[i]);
  return out;
}

std::optional<PromptBundle> build_prompt(const std::string& query_text, const std::vector<ContextBlock>& blocks,
                                         const PromptTemplate& tmpl, std::size_t budget_chars) {
  if (blocks.empty()) return std::nullopt;
  const std::size_t fixed = render(tmpl, query_text, "").size();
  std::size_t used = fixed;
  std::size_t kept = 0;
  for (; kept < blocks.size(); ++kept) {
    const auto size = render_block(kept + 1, blocks[kept]).size();
    if (used + size > budget_chars) break;
    used += size;
  }
  if (kept == 0) return std::nullopt;

  PromptBundle bundle;
  bundle.query_text = query_text;
  bundle.context_blocks.assign(blocks.begin(), blocks.begin() + static_cast<std::ptrdiff_t>(kept));
  bundle.template_id = tmpl.id;
  bundle.rendered = render(tmpl, query_text, render_context(bundle.context_blocks));
  bundle.dropped_blocks = blocks.size() - kept;
  return bundle;
}

nlohmann::json chat_request_body(const std::string& model, const std::vector<ChatMessage>& messages) {
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  return {{"model", model}, {"messages", msgs}, {"temperature", 0}};
}

std::string chat_reply_content(const nlohmann::json& reply) {
  try {
    if (reply.contains("choices")) return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    if (reply.contains("content")) return reply.at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ProviderFault, std::string("malformed chat reply: ") + e.what());
  }
  fail(ErrorKind::ProviderFault, "chat reply has no choices[0].message.content");
}

std::string generate(const PromptBundle& bundle, Generator& generator) {
  auto draft = generator.complete(bundle);
  if (trim(draft).empty()) fail(ErrorKind::ProviderFault, "generator returned an empty completion");
  return draft;
}

std::string MockGenerator::complete(const PromptBundle& bundle) {
  std::ostringstream out;
  out << "Answer drawn from " << bundle.context_blocks.size() << " context block(s).\n";
  for (const auto& block : bundle.context_blocks) out << "[chunk:" << block.chunk_id << "] " << block.text << "\n";
  return out.str();
}

RemoteGenerator::RemoteGenerator(const ProviderConfig& provider)
    : model_(provider.model), client_(provider.url, provider.timeout_ms, provider.retries, provider.max_in_flight) {}

std::string RemoteGenerator::complete(const PromptBundle& bundle) {
  return chat_reply_content(client_.post(chat_request_body(model_, {{"user", bundle.rendered}})));
}

std::vector<ChunkId> cited_chunk_ids(const std::string& draft) {
  static const std::regex marker(R"(\[chunk:([^\]\s]+)\])");
  std::vector<ChunkId> ids;
  for (auto it = std::sregex_iterator(draft.begin(), draft.end(), marker); it != std::sregex_iterator(); ++it) {
    ids.push_back((*it)[1].str());
  }
  return ids;
}

double parse_confidence(const std::string& reply) {
  static const std::regex line(R"(^\s*confidence\s*:\s*([0-9]+(?:\.[0-9]+)?|\.[0-9]+)\s*$)", std::regex::icase);
  std::istringstream in(reply);
  std::string current;
  while (std::getline(in, current)) {
    std::smatch m;
    if (std::regex_match(current, m, line)) {
      const double value = std::stod(m[1].str());
      if (value < 0.0 || value > 1.0) {
        fail(ErrorKind::ProviderFault, "evaluator confidence " + m[1].str() + " outside [0, 1]");
      }
      return value;
    }
  }
  spdlog::warn("unparseable evaluator reply: {}", reply);
  fail(ErrorKind::ProviderFault, "evaluator reply has no 'confidence: <decimal>' line");
}

double evaluate(const std::string& query_text, const std::string& draft,
                const std::vector<ContextBlock>& context_blocks, Evaluator& evaluator) {
  return parse_confidence(evaluator.judge({query_text, draft, context_blocks}));
}

namespace {

std::string confidence_line(double value) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "confidence: %.6f", value);
  return buf;
}

}  // namespace

std::string ScriptedEvaluator::judge(const EvaluationRequest&) {
  const auto i = next_.fetch_add(1);
  if (i >= scores_.size()) fail(ErrorKind::ProviderFault, "scripted evaluator exhausted");
  return confidence_line(scores_[i]);
}

std::string CoverageEvaluator::judge(const EvaluationRequest& request) {
  const auto query_tokens = tokenize(request.query_text);
  const std::set<std::string> wanted(query_tokens.begin(), query_tokens.end());
  if (wanted.empty()) return confidence_line(0.0);
  const auto cited_list = cited_chunk_ids(request.draft);
  const std::set<ChunkId> cited(cited_list.begin(), cited_list.end());

  double best = 0.0;
  for (const auto& block : request.context_blocks) {
    if (!cited.count(block.chunk_id)) continue;
    const auto tokens = tokenize(block.text);
    const std::set<std::string> have(tokens.begin(), tokens.end());
    std::size_t hit = 0;
    for (const auto& t : wanted) hit += have.count(t);
    best = std::max(best, static_cast<double>(hit) / static_cast<double>(wanted.size()));
  }
  return confidence_line(best);
}

RemoteEvaluator::RemoteEvaluator(const ProviderConfig& provider)
    : model_(provider.model), client_(provider.url, provider.timeout_ms, provider.retries, provider.max_in_flight) {}

std::string RemoteEvaluator::judge(const EvaluationRequest& request) {
  const auto prompt =
      render(evaluator_template(), request.query_text, render_context(request.context_blocks), request.draft);
  return chat_reply_content(client_.post(chat_request_body(model_, {{"user", prompt}})));
}

std::string_view to_string(Verdict verdict) noexcept {
  return verdict == Verdict::Delivered ? "delivered" : "suppressed";
}

GatedResponse run_gate(const std::string& query_text, std::size_t initial_k, const ContextSource& context,
                       Generator& generator, Evaluator& evaluator, const GateSettings& settings) {
  GatedResponse response;
  std::size_t k = std::max<std::size_t>(initial_k, 1);
  double best = 0.0;

  for (std::size_t attempt = 1; attempt <= std::max<std::size_t>(settings.max_attempts, 1); ++attempt) {
    response.attempts = attempt;
    response.final_k = k;
    const auto blocks = context(k);
    const auto bundle = build_prompt(query_text, blocks, answer_template(), settings.prompt_budget_chars);
    if (!bundle) {
      response.verdict = Verdict::Suppressed;
      response.confidence = best;
      response.diagnostic = blocks.empty() ? kNoContextDiagnostic : "context exceeds prompt budget";
      return response;
    }

    const auto draft = generate(*bundle, generator);
    const double confidence = evaluate(query_text, draft, bundle->context_blocks, evaluator);
    AttemptRecord record{k, {}, confidence};
    for (const auto& b : bundle->context_blocks) record.context_ids.push_back(b.chunk_id);
    response.history.push_back(record);
    response.citations.clear();
    for (const auto& id : cited_chunk_ids(draft)) {
      const bool in_context = std::find(record.context_ids.begin(), record.context_ids.end(), id) != record.context_ids.end();
      const bool repeated = std::find(response.citations.begin(), response.citations.end(), id) != response.citations.end();
      if (in_context && !repeated) response.citations.push_back(id);
    }
    best = std::max(best, confidence);

    if (confidence >= settings.confidence_threshold) {
      response.verdict = Verdict::Delivered;
      response.answer = draft;
      response.confidence = confidence;
      return response;
    }
    k = std::min(k * 2, kMaxQueryTopK);
  }

  response.verdict = Verdict::Suppressed;
  response.confidence = best;
  response.diagnostic = "confidence below threshold after " + std::to_string(response.attempts) + " attempt(s)";
  return response;
}

}  // namespace wrag
