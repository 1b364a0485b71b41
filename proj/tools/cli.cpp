#include "cli.hpp"

#include <CLI11.hpp>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <pthread.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "wrag/config.hpp"
#include "wrag/engine.hpp"
#include "wrag/error.hpp"
#include "wrag/eval.hpp"
#include "wrag/service.hpp"

namespace wrag {

namespace {

struct GlobalFlags {
  std::string config_path;
  bool mock_providers = false;
  std::uint64_t seed = 42;
  std::string log_level = "warn";
};

EngineConfig resolve_config(const GlobalFlags& flags) {
  std::string path = flags.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("WRAG_CONFIG")) path = env;
  }
  auto config = path.empty() ? default_config() : load_config(path);
  apply_env_overrides(config);
  validate_config(config);
  return config;
}

std::unique_ptr<Embedder> embedder_for(const EngineConfig& config, const GlobalFlags& flags) {
  if (flags.mock_providers) return std::make_unique<LocalHashEmbedder>(config.embedding_dim);
  return make_embedder(config.providers.embedding, config.embedding_dim);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
  file << text;
  if (!file.flush()) fail(ErrorKind::Io, "write to '" + path.string() + "' failed");
}

// Blocks SIGINT/SIGTERM in every thread spawned afterwards and waits for one.
void serve_until_signal(Service& service) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  service.start();
  int received = 0;
  sigwait(&signals, &received);
  spdlog::info("signal {} received, draining", received);
  service.stop();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted multi-source retrieval with gated answers", "wrag"};
  app.require_subcommand(1);
  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "Config file (JSON); defaults to $WRAG_CONFIG");
  app.add_flag("--mock-providers", flags.mock_providers, "Use the local embedder and mock generator/evaluator");
  app.add_option("--seed", flags.seed, "Seed for bench and gen-corpus");
  app.add_option("--log-level", flags.log_level, "trace|debug|info|warn|error|off");

  std::string source, in_path, out_path, query_text, profile, corpus_dir, host = "127.0.0.1";
  std::string index_dir;
  std::size_t top_k = 0, n_sources = 4, n_chunks = 500, n_queries = 100;
  int port = 8080;
  bool timing = false;

  auto* ingest = app.add_subcommand("ingest", "Validate and normalize a JSONL corpus");
  ingest->add_option("--source", source, "Source id")->required();
  ingest->add_option("--in", in_path, "Raw JSONL corpus")->required();
  ingest->add_option("--out", out_path, "Normalized JSONL output")->required();

  auto* index = app.add_subcommand("index", "Build and persist one source's index");
  index->add_option("--source", source, "Source id")->required();
  index->add_option("--in", in_path, "JSONL corpus")->required();
  index->add_option("--out", out_path, "Index directory")->required();

  auto* query = app.add_subcommand("query", "Answer one query and print the response JSON");
  query->add_option("--q", query_text, "Query text")->required();
  query->add_option("--top-k", top_k, "Final K (defaults to the configured value)");
  query->add_option("--profile", profile, "Force a weight profile");
  query->add_option("--index-dir", index_dir, "Index directory (defaults to the configured one)");

  auto* bench = app.add_subcommand("bench", "Run the three-system benchmark");
  bench->add_option("--out", out_path, "Report JSON path")->required();
  bench->add_option("--corpus", corpus_dir, "Corpus directory written by gen-corpus (generated from --seed if omitted)");
  bench->add_flag("--timing", timing, "Record mean latency (report is then not reproducible)");

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");
  serve->add_option("--index-dir", index_dir, "Index directory (defaults to the configured one)");

  auto* gen = app.add_subcommand("gen-corpus", "Write the seeded synthetic corpus");
  gen->add_option("--out", out_path, "Output directory")->required();
  for (auto* sub : {bench, gen}) {
    sub->add_option("--sources", n_sources, "Number of sources");
    sub->add_option("--chunks", n_chunks, "Chunks per source");
    sub->add_option("--queries", n_queries, "Labeled queries");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    const auto level = spdlog::level::from_str(flags.log_level);
    if (level == spdlog::level::off && flags.log_level != "off") {
      err << "unknown log level '" << flags.log_level << "'\n";
      return 2;
    }
    if (!spdlog::get("wrag")) spdlog::set_default_logger(spdlog::stderr_color_mt("wrag"));
    spdlog::set_level(level);

    const auto config = resolve_config(flags);
    const std::filesystem::path idx = index_dir.empty() ? std::filesystem::path(config.index_dir) : std::filesystem::path(index_dir);
    const CorpusSpec spec{n_sources, n_chunks, n_queries};

    if (*ingest) {
      const auto chunks = normalize_corpus(read_chunks_jsonl(in_path), source);
      write_chunks_jsonl(out_path, chunks);
      out << nlohmann::json{{"source", source}, {"chunks", chunks.size()}, {"out", out_path}}.dump() << "\n";
    } else if (*index) {
      if (!config.sources.count(source)) spdlog::warn("source '{}' is not in the config", source);
      const auto embedder = embedder_for(config, flags);
      const auto built = write_source_index(source, read_chunks_jsonl(in_path), *embedder, out_path);
      out << nlohmann::json{{"source", source},
                            {"entries", built.size()},
                            {"dim", built.dim()},
                            {"index", index_path(out_path, source).string()}}
                 .dump()
          << "\n";
    } else if (*query) {
      const auto engine = open_engine(config, idx, flags.mock_providers, false);
      const auto q = engine->make_query(query_text, top_k ? std::optional(top_k) : std::nullopt,
                                        profile.empty() ? std::nullopt : std::optional(profile));
      out << engine->query_response(q).dump(2) << "\n";
    } else if (*bench) {
      const auto corpus = corpus_dir.empty() ? generate_synthetic_corpus(flags.seed, spec)
                                             : read_synthetic_corpus(corpus_dir);
      const auto report = run_bench(corpus, config, {flags.seed, timing});
      write_text(out_path, to_json(report).dump(2) + "\n");
      out << format_table(report);
    } else if (*serve) {
      std::shared_ptr<const Engine> engine = open_engine(config, idx, flags.mock_providers, true);
      Service service(engine, {host, port});
      serve_until_signal(service);
    } else if (*gen) {
      const auto corpus = generate_synthetic_corpus(flags.seed, spec);
      write_synthetic_corpus(corpus, out_path);
      out << nlohmann::json{{"seed", flags.seed}, {"sources", corpus.corpora.size()}, {"queries", corpus.queries.size()},
                            {"out", out_path}}
                 .dump()
          << "\n";
    }
    return 0;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace wrag
