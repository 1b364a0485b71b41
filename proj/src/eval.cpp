#include "wrag/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

#include "wrag/embedding.hpp"
#include "wrag/engine.hpp"
#include "wrag/error.hpp"
#include "wrag/keyword_index.hpp"
#include "wrag/retrieval.hpp"
#include "wrag/text.hpp"

namespace wrag {

namespace {

// ---------------------------------------------------------------------------
// Vocabulary

const std::vector<std::string> kComponents = {
    "fan",   "psu",       "dimm",  "nic",     "raid",   "ssd",   "gpu",   "cpu",
    "bmc",   "backplane", "riser", "heatsink", "sensor", "hba",   "midplane", "tpm",
    "nvme",  "fpga",      "switch", "cable",  "bezel",  "rail",  "chassis", "controller"};

const std::vector<std::string> kSymptoms = {
    "overheating", "noise",      "reboot",     "flicker",   "timeout",  "degraded",
    "offline",     "stall",      "throttling", "beeping",   "crash",    "hang",
    "drift",       "lockup",     "corruption", "shutdown",  "latency",  "mismatch",
    "failure",     "dropout",    "overcurrent", "underclock", "flapping", "misdetection"};

const std::vector<std::string> kContexts = {
    "after bios update",    "during cold boot",   "under heavy load",     "after power loss",
    "at high altitude",     "after driver install", "during nightly backup", "with full memory",
    "on redundant power",   "after rack move",    "in dusty rooms",       "during os install"};

const std::vector<std::string> kActions = {
    "reseat", "replace", "update", "flash",   "clean",   "recalibrate", "reset",   "rollback",
    "tighten", "reapply", "disable", "enable", "inspect", "rebuild",     "swap",    "verify"};

// Rare descriptive words that show up in verbose user reports.
const std::vector<std::string> kIncidentals = {
    "grinding",  "whining",   "sporadic",  "clicking",   "humming",   "buzzing",   "rattling",
    "stuttering", "smoky",    "scorching", "crackling",  "squealing", "chirping",  "pulsing",
    "wobbling",  "jittery",   "sluggish",  "erratic",    "garbled",   "phantom",   "ghosting",
    "shimmering", "droning",  "thumping",  "hissing",    "sizzling",  "ticking",   "tapping",
    "screeching", "fluttering", "chattering", "groaning", "murmuring", "rumbling",  "whirring",
    "clattering", "popping",  "blinky",    "glitchy",    "laggy",     "twitchy",   "spotty",
    "patchy",    "choppy",    "shaky",     "creaky",     "squeaky",   "wheezy",    "rasping",
    "crunching", "scraping",  "sputtering", "throbbing", "juddering", "shuddering", "quivering",
    "trembling", "vibrating", "sparking",  "smoldering"};

const std::vector<std::string> kFillers = {
    "please",  "contact", "support", "customer", "question", "warranty", "register", "portal",
    "article", "ticket",  "general", "information", "related", "topic", "team",    "review",
    "pending", "status",  "internal", "lab",     "escalation", "summary", "owner",  "weekly",
    "meeting", "request", "tracking", "followup", "account", "renewal", "shipping", "invoice"};

const std::vector<std::string> kErrorPrefixes = {"ERR", "PWR", "THM", "MEM", "SYS", "BUS"};

// ---------------------------------------------------------------------------
// Seeded helpers. Only raw engine output is used so sequences are identical
// on every standard library.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  bool chance(double p) { return static_cast<double>(engine_() >> 11) * 0x1.0p-53 < p; }
  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[below(items.size())];
  }
  std::vector<std::string> pick_distinct(const std::vector<std::string>& items, std::size_t n) {
    std::vector<std::string> out;
    while (out.size() < n) {
      const auto& candidate = pick(items);
      if (std::find(out.begin(), out.end(), candidate) == out.end()) out.push_back(candidate);
    }
    return out;
  }
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

enum class QueryKind { Sku, Error, General };

std::string kind_name(QueryKind kind) {
  switch (kind) {
    case QueryKind::Sku: return "sku_specific";
    case QueryKind::Error: return "error_code";
    case QueryKind::General: return "general";
  }
  return "general";
}

struct Topic {
  QueryKind kind;
  std::string identifier;  // "SKU-48213", "PWR-4021" or empty
  std::string component;
  std::string symptom;
  std::string context;
};

std::string core_phrase(const Topic& t) {
  std::string out = t.identifier.empty() ? "" : t.identifier + " ";
  return out + t.component + " " + t.symptom + " " + t.context;
}

class CorpusBuilder {
 public:
  CorpusBuilder(std::uint64_t seed, const CorpusSpec& spec)
      : rng_(seed), spec_(spec), source_ids_(synthetic_source_ids(spec.sources)) {
    pending_.resize(spec.sources);
  }

  SyntheticCorpus build() {
    for (std::size_t q = 0; q < spec_.queries; ++q) plant_query(q);
    for (std::size_t s = 0; s < pending_.size(); ++s) {
      if (pending_[s].size() > spec_.chunks_per_source) {
        fail(ErrorKind::InvalidArgument,
             "source '" + source_ids_[s] + "' needs " + std::to_string(pending_[s].size()) +
                 " planted chunks but chunks_per_source is " + std::to_string(spec_.chunks_per_source));
      }
      while (pending_[s].size() < spec_.chunks_per_source) pending_[s].push_back(background(s));
    }
    return finish();
  }

 private:
  std::size_t role_source(std::size_t role) const { return role % source_ids_.size(); }

  std::string fresh_sku() { return "SKU-" + fresh_digits(5); }
  std::string fresh_error() { return rng_.pick(kErrorPrefixes) + "-" + fresh_digits(4); }
  std::string fresh_digits(std::size_t width) {
    std::size_t modulus = 1;
    for (std::size_t i = 0; i < width; ++i) modulus *= 10;
    for (;;) {
      const auto n = modulus / 10 + rng_.below(modulus - modulus / 10);
      const auto digits = std::to_string(n);
      if (used_numbers_.insert(digits).second) return digits;
    }
  }

  std::string answer_key() {
    static const std::string alphabet = "abcdefghjkmnpqrstuvwxyz23456789";
    for (;;) {
      std::string key = "rc-";
      for (int i = 0; i < 6; ++i) key += alphabet[rng_.below(alphabet.size())];
      if (used_keys_.insert(key).second) return key;
    }
  }

  std::string fillers(std::size_t n) {
    std::vector<std::string> words;
    for (std::size_t i = 0; i < n; ++i) words.push_back(rng_.pick(kFillers));
    return join(words);
  }

  std::size_t add(std::size_t source, std::string text, std::map<std::string, std::string> metadata = {}) {
    const std::string temp_id = "tmp-" + std::to_string(next_temp_++);
    pending_[source].push_back({temp_id, source_ids_[source], "", std::move(text), std::move(metadata)});
    return next_temp_ - 1;
  }

  std::map<std::string, std::string> metadata_for(const Topic& t) const {
    if (t.kind == QueryKind::Sku) return {{"sku", t.identifier}};
    if (t.kind == QueryKind::Error) return {{"error_code", t.identifier}};
    return {};
  }

  std::string gold_text(const Topic& t, const std::string& key) {
    const auto actions = rng_.pick_distinct(kActions, 3);
    const std::string procedure = actions[0] + " the " + t.component + ", then " + actions[1] + " and " + actions[2];
    switch (t.kind) {
      case QueryKind::Sku:
        return t.identifier + " service manual, " + t.component + " section. Symptom: " + t.symptom + " " +
               t.context + ". Procedure: " + procedure + ". Resolution code " + key + ".";
      case QueryKind::Error:
        return "Troubleshooting guide for error " + t.identifier + ": " + t.component + " " + t.symptom + " " +
               t.context + ". Steps: " + procedure + ". Resolution code " + key + ".";
      case QueryKind::General:
        return "Q: " + t.component + " " + t.symptom + " " + t.context + "? A: " + actions[0] + " the " +
               t.component + ", then " + actions[1] + ". Resolution code " + key + ".";
    }
    return {};
  }

  void plant_query(std::size_t q) {
    Topic t;
    const double roll = static_cast<double>(rng_.below(1000)) / 1000.0;
    t.kind = roll < 0.4 ? QueryKind::Sku : roll < 0.7 ? QueryKind::Error : QueryKind::General;
    if (t.kind == QueryKind::Sku) t.identifier = fresh_sku();
    if (t.kind == QueryKind::Error) t.identifier = fresh_error();
    t.component = rng_.pick(kComponents);
    t.symptom = rng_.pick(kSymptoms);
    t.context = rng_.pick(kContexts);

    const std::size_t target = role_source(t.kind == QueryKind::Sku ? 0 : t.kind == QueryKind::Error ? 1 : 2);
    const std::string key = answer_key();

    LabeledQuery labeled;
    labeled.query_id = "q-" + std::string(4 - std::min<std::size_t>(4, std::to_string(q).size()), '0') +
                       std::to_string(q);
    labeled.expected_type = kind_name(t.kind);
    labeled.gold_answer_keys = {key};

    std::vector<std::size_t> gold{add(target, gold_text(t, key), metadata_for(t))};
    if (t.kind == QueryKind::General && rng_.chance(0.5)) {
      const auto action = rng_.pick(kActions);
      gold.push_back(add(role_source(3),
                         "KB note: " + t.component + " " + t.symptom + " " + t.context + ", " + action + " the " +
                             t.component + " as workaround.",
                         metadata_for(t)));
    }

    // Decoys restate the question in other sources without answering it.
    const double heavy_p = t.kind == QueryKind::General ? 0.3 : 0.16;
    const std::size_t decoys = rng_.chance(heavy_p) ? rng_.between(5, 7) : rng_.between(0, 3);
    std::vector<std::size_t> others;
    for (std::size_t s = 0; s < source_ids_.size(); ++s) {
      if (s != target || source_ids_.size() == 1) others.push_back(s);
    }
    for (std::size_t d = 0; d < decoys; ++d) {
      const std::size_t source = others[d % others.size()];
      const std::size_t padding = t.kind == QueryKind::General ? rng_.between(3, 5) : rng_.between(5, 8);
      add(source, "Re: " + core_phrase(t) + " - " + fillers(padding), metadata_for(t));
    }

    std::string text = core_phrase(t);
    if (rng_.chance(0.13)) {
      const auto words = rng_.pick_distinct(kIncidentals, 2);
      text += ", " + words[0] + " " + words[1];
      const std::string anchor = t.identifier.empty() ? t.component : t.identifier;
      const std::size_t trap_source = target == role_source(3) ? role_source(2) : role_source(3);
      const std::size_t traps = rng_.between(5, 8);
      for (std::size_t i = 0; i < traps; ++i) {
        add(trap_source,
            "Field note: " + words[0] + " " + words[0] + " and " + words[1] + " " + words[1] + " reported on " +
                anchor + ", see ticket " + fresh_digits(6) + " " + fillers(4) + ".");
      }
    }
    labeled.query_text = text;
    queries_.push_back(std::move(labeled));
    gold_temp_.push_back(std::move(gold));
  }

  Chunk background(std::size_t source) {
    const auto& component = rng_.pick(kComponents);
    const auto& symptom = rng_.pick(kSymptoms);
    const auto& context = rng_.pick(kContexts);
    const auto actions = rng_.pick_distinct(kActions, 2);
    std::map<std::string, std::string> metadata;
    std::string text;
    switch (source % 4) {
      case 0: {
        const auto sku = fresh_sku();
        metadata["sku"] = sku;
        text = sku + " manual: " + component + " maintenance. " + actions[0] + " the " + component + " " +
               context + ", " + actions[1] + " if " + symptom + " persists; " + fillers(rng_.between(4, 8)) + ".";
        break;
      }
      case 1: {
        const auto code = fresh_error();
        metadata["error_code"] = code;
        text = "Guide: error " + code + " indicates " + component + " " + symptom + ". " + actions[0] +
               " and " + actions[1] + " the " + component + "; " + fillers(rng_.between(4, 8)) + ".";
        break;
      }
      case 2:
        text = "Q: can I " + actions[0] + " the " + component + " " + context + "? A: yes, " + actions[1] +
               " it first; " + fillers(rng_.between(5, 9)) + ".";
        break;
      default:
        text = "KB: " + component + " " + symptom + " seen " + context + "; " + actions[0] + " " +
               fillers(rng_.between(6, 10)) + ".";
        break;
    }
    const std::string temp_id = "tmp-" + std::to_string(next_temp_++);
    return {temp_id, source_ids_[source], "", text, metadata};
  }

  SyntheticCorpus finish() {
    SyntheticCorpus out;
    std::map<std::string, ChunkId> renamed;
    for (std::size_t s = 0; s < pending_.size(); ++s) {
      auto& chunks = pending_[s];
      rng_.shuffle(chunks);
      for (std::size_t i = 0; i < chunks.size(); ++i) {
        char id[64];
        std::snprintf(id, sizeof(id), "%s-%04zu", source_ids_[s].c_str(), i);
        renamed[chunks[i].chunk_id] = id;
        chunks[i].chunk_id = id;
        chunks[i].doc_id = source_ids_[s] + "-doc-" + std::to_string(i / 5);
      }
      out.corpora[source_ids_[s]] = std::move(chunks);
    }
    for (std::size_t q = 0; q < queries_.size(); ++q) {
      for (const auto temp : gold_temp_[q]) queries_[q].gold_chunk_ids.insert(renamed.at("tmp-" + std::to_string(temp)));
    }
    out.queries = std::move(queries_);
    return out;
  }

  Rng rng_;
  CorpusSpec spec_;
  std::vector<SourceId> source_ids_;
  std::vector<std::vector<Chunk>> pending_;
  std::vector<LabeledQuery> queries_;
  std::vector<std::vector<std::size_t>> gold_temp_;
  std::set<std::string> used_numbers_;
  std::set<std::string> used_keys_;
  std::size_t next_temp_ = 0;
};

bool contains_all_keys(const std::string& answer, const std::set<std::string>& keys) {
  const auto haystack = normalize_for_match(answer);
  return std::all_of(keys.begin(), keys.end(), [&](const std::string& key) {
    return haystack.find(normalize_for_match(key)) != std::string::npos;
  });
}

std::vector<ChunkId> ids_of(std::span<const ScoredHit> hits) {
  std::vector<ChunkId> ids;
  for (const auto& h : hits) ids.push_back(h.chunk_id);
  return ids;
}

}  // namespace

std::vector<SourceId> synthetic_source_ids(std::size_t count) {
  static const std::vector<SourceId> kNames = {"manuals", "guides", "faq", "kb"};
  std::vector<SourceId> ids;
  for (std::size_t i = 0; i < count; ++i) ids.push_back(i < kNames.size() ? kNames[i] : "src" + std::to_string(i + 1));
  return ids;
}

SyntheticCorpus generate_synthetic_corpus(std::uint64_t seed, const CorpusSpec& spec) {
  if (spec.sources == 0 || spec.chunks_per_source == 0 || spec.queries == 0) {
    fail(ErrorKind::InvalidArgument, "corpus needs at least one source, chunk and query");
  }
  return CorpusBuilder(seed, spec).build();
}

void write_synthetic_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [source, chunks] : corpus.corpora) write_chunks_jsonl(dir / (source + ".jsonl"), chunks);
  write_queries_jsonl(dir / "queries.jsonl", corpus.queries);
}

SyntheticCorpus read_synthetic_corpus(const std::filesystem::path& dir) {
  SyntheticCorpus corpus;
  if (!std::filesystem::is_directory(dir)) fail(ErrorKind::Io, "corpus directory '" + dir.string() + "' not found");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".jsonl" && entry.path().filename() != "queries.jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    const auto source = file.stem().string();
    corpus.corpora[source] = normalize_corpus(read_chunks_jsonl(file), source);
  }
  corpus.queries = read_queries_jsonl(dir / "queries.jsonl");
  return corpus;
}

double score_accuracy(const std::vector<GatedResponse>& responses, const std::vector<LabeledQuery>& queries) {
  if (responses.size() != queries.size()) {
    fail(ErrorKind::InvalidArgument, "got " + std::to_string(responses.size()) + " responses for " +
                                         std::to_string(queries.size()) + " queries");
  }
  if (queries.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& r = responses[i];
    if (r.verdict == Verdict::Delivered && r.answer && contains_all_keys(*r.answer, queries[i].gold_answer_keys)) {
      ++correct;
    }
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(queries.size());
}

double score_relevance(const std::vector<std::vector<ChunkId>>& retrieved, const std::vector<LabeledQuery>& queries,
                       std::size_t k) {
  if (retrieved.size() != queries.size()) {
    fail(ErrorKind::InvalidArgument, "relevance needs one retrieval list per query");
  }
  if (queries.empty() || k == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& gold = queries[i].gold_chunk_ids;
    if (gold.empty()) continue;
    std::set<ChunkId> found;
    for (std::size_t j = 0; j < std::min(k, retrieved[i].size()); ++j) {
      if (gold.count(retrieved[i][j])) found.insert(retrieved[i][j]);
    }
    total += static_cast<double>(found.size()) / static_cast<double>(std::min(k, gold.size()));
  }
  return total / static_cast<double>(queries.size());
}

const BenchRow& BenchReport::row(const std::string& system_name) const {
  for (const auto& r : rows) {
    if (r.system_name == system_name) return r;
  }
  fail(ErrorKind::NotFound, "no bench row for '" + system_name + "'");
}

BenchReport run_bench(const SyntheticCorpus& corpus, const EngineConfig& config, const BenchOptions& options) {
  for (const auto& [source, chunks] : corpus.corpora) {
    if (!config.sources.count(source)) {
      fail(ErrorKind::Config, "corpus source '" + source + "' is not configured");
    }
  }
  auto queries = corpus.queries;
  std::sort(queries.begin(), queries.end(),
            [](const LabeledQuery& a, const LabeledQuery& b) { return a.query_id < b.query_id; });

  const LocalHashEmbedder embedder(config.embedding_dim);
  const auto weighted = build_sources(config, corpus.corpora, embedder);
  const auto uniform_registry = with_unbounded_thresholds(*weighted.registry);
  const auto uniform = uniform_profile(uniform_registry.source_ids());
  const QueryClassifier classifier(config.rules);
  const auto profiles = config.profile_set();

  std::vector<Chunk> all_chunks;
  for (const auto& [source, chunks] : corpus.corpora) all_chunks.insert(all_chunks.end(), chunks.begin(), chunks.end());
  const auto keyword = Bm25Index::build(all_chunks);
  const auto& store = *weighted.chunks;

  MockGenerator generator;
  CoverageEvaluator evaluator;
  const GateSettings settings{config.confidence_threshold, config.max_generation_attempts,
                              config.prompt_budget_chars};
  const std::size_t k = config.final_top_k;

  struct SystemRun {
    std::string name;
    std::vector<GatedResponse> responses;
    std::vector<std::vector<ChunkId>> retrieved;
    std::chrono::nanoseconds elapsed{0};
  };
  std::vector<SystemRun> runs{{"keyword_bm25", {}, {}, {}}, {"uniform_rag", {}, {}, {}}, {"weighted_rag", {}, {}, {}}};

  const auto dense_blocks = [&](const RetrievalPool& pool) {
    return [&pool, &store](std::size_t n) {
      std::vector<ContextBlock> blocks;
      for (const auto& h : final_topk(pool.pool, n)) blocks.push_back({h.source, h.chunk_id, store.at(h.chunk_id).text});
      return blocks;
    };
  };

  for (const auto& q : queries) {
    const auto clock = std::chrono::steady_clock::now;
    try {
      {
        auto start = clock();
        const auto keyword_context = [&](std::size_t n) {
          std::vector<ContextBlock> blocks;
          for (const auto& h : keyword.search(q.query_text, n)) {
            const auto& c = store.at(h.chunk_id);
            blocks.push_back({c.source, c.chunk_id, c.text});
          }
          return blocks;
        };
        runs[0].responses.push_back(run_gate(q.query_text, k, keyword_context, generator, evaluator, settings));
        std::vector<ChunkId> ids;
        for (const auto& h : keyword.search(q.query_text, k)) ids.push_back(h.chunk_id);
        runs[0].retrieved.push_back(std::move(ids));
        runs[0].elapsed += clock() - start;
      }
      {
        auto start = clock();
        const auto pool = search_sources(uniform_registry, embedder.embed(q.query_text), uniform);
        runs[1].responses.push_back(run_gate(q.query_text, k, dense_blocks(pool), generator, evaluator, settings));
        runs[1].retrieved.push_back(ids_of(final_topk(pool.pool, k)));
        runs[1].elapsed += clock() - start;
      }
      {
        auto start = clock();
        const auto& type_name = classifier.classify(q.query_text);
        const auto& profile = profiles.select(type_name);
        const auto pool = search_sources(*weighted.registry, embedder.embed(q.query_text), profile);
        runs[2].responses.push_back(run_gate(q.query_text, k, dense_blocks(pool), generator, evaluator, settings));
        runs[2].retrieved.push_back(ids_of(final_topk(pool.pool, k)));
        runs[2].elapsed += clock() - start;
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "query '" + q.query_id + "': " + e.what());
    }
  }

  BenchReport report;
  report.seed = options.seed;
  report.final_top_k = k;
  report.confidence_threshold = config.confidence_threshold;
  report.corpus_chunks = all_chunks.size();
  for (const auto& run : runs) {
    BenchRow row;
    row.system_name = run.name;
    row.accuracy_pct = score_accuracy(run.responses, queries);
    row.relevance_score = score_relevance(run.retrieved, queries, k);
    row.queries_run = queries.size();
    row.suppressed_count = static_cast<std::size_t>(std::count_if(
        run.responses.begin(), run.responses.end(), [](const auto& r) { return r.verdict == Verdict::Suppressed; }));
    if (options.record_latency && !queries.empty()) {
      row.mean_latency_ms = std::chrono::duration<double, std::milli>(run.elapsed).count() /
                            static_cast<double>(queries.size());
    }
    report.rows.push_back(row);
  }
  return report;
}

nlohmann::json to_json(const BenchReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json row = {{"system_name", r.system_name},
                          {"accuracy_pct", r.accuracy_pct},
                          {"relevance_score", r.relevance_score},
                          {"queries_run", r.queries_run},
                          {"suppressed_count", r.suppressed_count}};
    if (r.mean_latency_ms) row["mean_latency_ms"] = *r.mean_latency_ms;
    rows.push_back(std::move(row));
  }
  return {{"seed", report.seed},
          {"final_top_k", report.final_top_k},
          {"confidence_threshold", report.confidence_threshold},
          {"corpus_chunks", report.corpus_chunks},
          {"metrics",
           {{"accuracy_pct", "proxy: delivered answers containing every gold answer key, percent of queries"},
            {"relevance_score", "proxy: mean bounded recall@K of gold chunks in the first-attempt top-K"}}},
          {"systems", rows}};
}

std::string format_table(const BenchReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(16) << "System" << std::right << std::setw(14) << "Accuracy (%)" << std::setw(17)
      << "Relevance Score" << std::setw(12) << "Suppressed";
  const bool latency = std::any_of(report.rows.begin(), report.rows.end(),
                                   [](const BenchRow& r) { return r.mean_latency_ms.has_value(); });
  if (latency) out << std::setw(14) << "Latency (ms)";
  out << "\n";
  for (const auto& r : report.rows) {
    out << std::left << std::setw(16) << r.system_name << std::right << std::fixed << std::setprecision(1)
        << std::setw(14) << r.accuracy_pct << std::setprecision(3) << std::setw(17) << r.relevance_score
        << std::setw(12) << r.suppressed_count;
    if (latency) out << std::setprecision(3) << std::setw(14) << r.mean_latency_ms.value_or(0.0);
    out << "\n";
  }
  out << "(accuracy and relevance are mechanized proxies; see the JSON report's \"metrics\" notes)\n";
  return out.str();
}

}  // namespace wrag
