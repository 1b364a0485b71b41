// Thin bindings. Structured values cross the boundary as JSON text; the
// Python package decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "wrag/config.hpp"
#include "wrag/corpus.hpp"
#include "wrag/engine.hpp"
#include "wrag/error.hpp"
#include "wrag/eval.hpp"
#include "wrag/keyword_index.hpp"
#include "wrag/vector_index.hpp"

namespace py = pybind11;
using namespace wrag;

namespace {

EngineConfig config_from(const std::optional<std::string>& text) {
  auto config = text ? parse_config(*text) : default_config();
  validate_config(config);
  return config;
}

std::vector<Chunk> chunks_from(const std::string& text) {
  const auto node = nlohmann::json::parse(text);
  if (!node.is_array()) fail(ErrorKind::InvalidArgument, "chunks must be a JSON array");
  std::vector<Chunk> chunks;
  for (const auto& c : node) chunks.push_back(chunk_from_json(c));
  return chunks;
}

std::string corpus_json(const SyntheticCorpus& corpus) {
  nlohmann::json sources = nlohmann::json::object();
  for (const auto& [id, chunks] : corpus.corpora) {
    auto& list = sources[id] = nlohmann::json::array();
    for (const auto& c : chunks) list.push_back(to_json(c));
  }
  nlohmann::json queries = nlohmann::json::array();
  for (const auto& q : corpus.queries) queries.push_back(to_json(q));
  return nlohmann::json{{"sources", sources}, {"queries", queries}}.dump();
}

SyntheticCorpus corpus_from(const std::string& text) {
  const auto node = nlohmann::json::parse(text);
  SyntheticCorpus corpus;
  for (const auto& [id, chunks] : node.at("sources").items()) {
    for (const auto& c : chunks) corpus.corpora[id].push_back(chunk_from_json(c));
  }
  for (const auto& q : node.at("queries")) corpus.queries.push_back(labeled_query_from_json(q));
  return corpus;
}

class PyEngine {
 public:
  PyEngine(std::unique_ptr<Engine> engine) : engine_(std::move(engine)) {}

  static PyEngine from_corpus(const std::string& corpus, const std::optional<std::string>& config_text) {
    const auto config = config_from(config_text);
    auto embedder = std::make_unique<LocalHashEmbedder>(config.embedding_dim);
    auto sources = build_sources(config, corpus_from(corpus).corpora, *embedder);
    return PyEngine(std::make_unique<Engine>(config, std::move(sources), std::move(embedder),
                                             std::make_unique<MockGenerator>(), std::make_unique<CoverageEvaluator>()));
  }

  static PyEngine open(const std::string& index_dir, const std::optional<std::string>& config_text, bool mock) {
    return PyEngine(open_engine(config_from(config_text), index_dir, mock, false));
  }

  std::string query(const std::string& text, std::optional<std::size_t> top_k, std::optional<std::string> profile) {
    py::gil_scoped_release release;
    return engine_->query_response(engine_->make_query(text, top_k, std::move(profile))).dump();
  }

  std::string retrieve(const std::string& text, std::optional<std::size_t> top_k, std::optional<std::string> profile) {
    py::gil_scoped_release release;
    return engine_->retrieve_response(engine_->make_query(text, top_k, std::move(profile))).dump();
  }

  std::string sources(std::optional<std::string> profile) { return engine_->sources_summary(profile).dump(); }

 private:
  std::unique_ptr<Engine> engine_;
};

}  // namespace

PYBIND11_MODULE(_wrag, m) {
  m.doc() = "weighted multi-source retrieval core";

  static py::exception<Error> error(m, "WragError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    } catch (const nlohmann::json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("default_config", [] { return serialize_config(default_config()); });
  m.def("validate_config", [](const std::string& text) { return serialize_config(config_from(text)); });

  m.def("embed_local", [](const std::string& text, std::size_t dim) {
    const auto vec = embed_local(text, dim);
    const auto v = vec.values();
    return std::vector<float>(v.begin(), v.end());
  });
  m.def("adjust_distance", &adjust_distance, py::arg("weight"), py::arg("raw_distance"));

  py::class_<Bm25Index>(m, "Bm25Index")
      .def_static("build", [](const std::string& chunks) { return Bm25Index::build(chunks_from(chunks)); })
      .def("score", &Bm25Index::score)
      .def("idf", &Bm25Index::idf)
      .def("search",
           [](const Bm25Index& index, const std::string& q, std::size_t k) {
             std::vector<std::pair<std::string, double>> out;
             for (const auto& h : index.search(q, k)) out.emplace_back(h.chunk_id, h.score);
             return out;
           })
      .def_property_readonly("doc_count", &Bm25Index::doc_count);

  py::class_<FlatIndex>(m, "FlatIndex")
      .def_static("build",
                  [](const std::string& source, const std::string& chunks, std::size_t dim) {
                    return build_index(source, chunks_from(chunks), LocalHashEmbedder(dim));
                  })
      .def_static("load", [](const std::string& path) { return load_index(path); })
      .def("save", [](const FlatIndex& index, const std::string& path) { save_index(index, path); })
      .def("search",
           [](const FlatIndex& index, const std::vector<float>& query, std::size_t k) {
             std::vector<std::pair<std::string, double>> out;
             for (const auto& n : index.search(query, k)) out.emplace_back(n.chunk_id, n.distance);
             return out;
           })
      .def_property_readonly("source", &FlatIndex::source)
      .def_property_readonly("dim", &FlatIndex::dim)
      .def("__len__", &FlatIndex::size)
      .def("__eq__", [](const FlatIndex& a, const FlatIndex& b) { return a == b; });

  m.def(
      "generate_corpus",
      [](std::uint64_t seed, std::size_t sources, std::size_t chunks_per_source, std::size_t queries) {
        return corpus_json(generate_synthetic_corpus(seed, {sources, chunks_per_source, queries}));
      },
      py::arg("seed"), py::arg("sources") = 4, py::arg("chunks_per_source") = 500, py::arg("queries") = 100);

  m.def(
      "run_bench",
      [](const std::string& corpus, std::uint64_t seed, const std::optional<std::string>& config) {
        const auto parsed = corpus_from(corpus);
        const auto cfg = config_from(config);
        py::gil_scoped_release release;
        return to_json(run_bench(parsed, cfg, {seed, false})).dump();
      },
      py::arg("corpus"), py::arg("seed"), py::arg("config") = py::none());

  py::class_<PyEngine>(m, "Engine")
      .def_static("from_corpus", &PyEngine::from_corpus, py::arg("corpus"), py::arg("config") = py::none())
      .def_static("open", &PyEngine::open, py::arg("index_dir"), py::arg("config") = py::none(),
                  py::arg("mock_providers") = true)
      .def("query", &PyEngine::query, py::arg("text"), py::arg("top_k") = py::none(), py::arg("profile") = py::none())
      .def("retrieve", &PyEngine::retrieve, py::arg("text"), py::arg("top_k") = py::none(),
           py::arg("profile") = py::none())
      .def("sources", &PyEngine::sources, py::arg("profile") = py::none());
}
