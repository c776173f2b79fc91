#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>
#include <sstream>

#include "titledup.hpp"
#include "titledup/cli.hpp"

namespace py = pybind11;
using namespace titledup;

namespace {

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

PairingConfig make_config(const std::string& strategy, std::size_t delta, std::size_t lambda,
                          std::size_t tau) {
  auto s = parse_strategy(strategy);
  if (!s) throw Error(Errc::invalid_argument, "unknown strategy '" + strategy + "'");
  return {.delta = delta, .lambda = lambda, .tau = tau, .strategy = *s};
}

std::vector<GroundTruthLabel> read_truth_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_failure, "cannot open '" + path.string() + "'");
  return read_truth_csv(in, path.string());
}

Measure measure_arg(const std::string& name) {
  auto m = parse_measure(name);
  if (!m) throw Error(Errc::invalid_argument, "unknown measure '" + name + "'");
  return *m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Candidate-pair generation, scoring and evaluation for title corpora";

  static py::exception<Error> error_type(m, "TitledupError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  // text
  m.def("normalize_title", &normalize_title, py::arg("title"));
  m.def("tokenize", &tokenize, py::arg("normalized"));
  m.def(
      "detect_language",
      [](const std::string& title) {
        const auto tokens = tokenize(normalize_title(title));
        return default_language_detector().detect(tokens);
      },
      py::arg("title"), "ISO 639-1 code or \"unknown\"");

  // corpus
  py::class_<TitleRecord>(m, "TitleRecord")
      .def_readonly("id", &TitleRecord::id)
      .def_readonly("raw_title", &TitleRecord::raw_title)
      .def_readonly("normalized", &TitleRecord::normalized)
      .def_readonly("tokens", &TitleRecord::tokens)
      .def_readonly("word_count", &TitleRecord::word_count)
      .def_readonly("source", &TitleRecord::source)
      .def("__repr__", [](const TitleRecord& r) {
        return "TitleRecord(id=" + py::repr(py::str(r.id)).cast<std::string>() +
               ", word_count=" + std::to_string(r.word_count) + ")";
      });

  py::class_<Corpus>(m, "Corpus")
      .def(py::init([](const std::vector<std::tuple<std::string, std::string, std::string>>& rows) {
             std::vector<TitleRecord> records;
             records.reserve(rows.size());
             for (const auto& [id, title, source] : rows) records.push_back(make_record(id, title, source));
             return Corpus(std::move(records));
           }),
           py::arg("rows"), "Build from (id, title, source) tuples.")
      .def("__len__", &Corpus::size)
      .def("__contains__", [](const Corpus& c, const std::string& id) { return c.find(id) != nullptr; })
      .def("__getitem__", [](const Corpus& c, const std::string& id) { return c.at(id); })
      .def_property_readonly("records", [](const Corpus& c) { return c.records(); })
      .def_property_readonly("ids", [](const Corpus& c) {
        std::vector<std::string> ids;
        for (const auto& r : c.records()) ids.push_back(r.id);
        return ids;
      })
      .def("sources", &Corpus::sources)
      .def("word_count_histogram", &Corpus::word_count_histogram)
      .def("mode_word_count", [](const Corpus& c) { return mode_word_count(c); });

  m.def(
      "load_corpus",
      [](const std::filesystem::path& path, std::optional<std::string> format,
         std::optional<std::string> lang) {
        CorpusFormat f = corpus_format_for(path);
        if (format) {
          auto parsed = parse_corpus_format(*format);
          if (!parsed) throw Error(Errc::invalid_argument, "unknown format '" + *format + "'");
          f = *parsed;
        }
        LoadOptions options;
        options.language_filter = std::move(lang);
        return load_corpus(path, f, options);
      },
      py::arg("path"), py::arg("format") = py::none(), py::arg("lang") = py::none());

  // pairing
  py::class_<CandidatePair>(m, "CandidatePair")
      .def(py::init([](std::string a, std::string b, const std::string& strategy) {
             return make_candidate(std::move(a), std::move(b), make_config(strategy, 5, 2, 3).strategy);
           }),
           py::arg("left_id"), py::arg("right_id"), py::arg("strategy") = "complete")
      .def_readonly("left_id", &CandidatePair::left_id)
      .def_readonly("right_id", &CandidatePair::right_id)
      .def_property_readonly("strategy",
                             [](const CandidatePair& p) { return std::string(to_string(p.strategy)); })
      .def("__eq__", [](const CandidatePair& a, const CandidatePair& b) { return a == b; })
      .def("__hash__", [](const CandidatePair& p) {
        return py::hash(py::make_tuple(p.left_id, p.right_id));
      })
      .def("__iter__", [](const CandidatePair& p) {
        return py::iter(py::make_tuple(p.left_id, p.right_id));
      })
      .def("__repr__", [](const CandidatePair& p) {
        return "CandidatePair('" + p.left_id + "', '" + p.right_id + "')";
      });

  m.def(
      "generate_pairs",
      [](const Corpus& corpus, const std::string& strategy, std::size_t delta, std::size_t lambda,
         std::size_t tau) {
        const auto config = make_config(strategy, delta, lambda, tau);
        py::gil_scoped_release release;
        return generate(corpus, config).collect();
      },
      py::arg("corpus"), py::arg("strategy") = "complete", py::arg("delta") = 5,
      py::arg("lambda_") = 2, py::arg("tau") = 3);
  m.def(
      "count_pairs",
      [](const Corpus& corpus, const std::string& strategy, std::size_t delta, std::size_t lambda,
         std::size_t tau) {
        const auto config = make_config(strategy, delta, lambda, tau);
        py::gil_scoped_release release;
        return generate(corpus, config).count();
      },
      py::arg("corpus"), py::arg("strategy") = "complete", py::arg("delta") = 5,
      py::arg("lambda_") = 2, py::arg("tau") = 3);

  // distance
  m.def("levenshtein", py::overload_cast<std::string_view, std::string_view>(&levenshtein),
        py::arg("a"), py::arg("b"));
  m.def("levenshtein_normalized",
        py::overload_cast<std::string_view, std::string_view>(&levenshtein_normalized), py::arg("a"),
        py::arg("b"));
  m.def(
      "cosine_similarity",
      [](const std::vector<double>& a, const std::vector<double>& b) { return cosine_similarity(a, b); },
      py::arg("a"), py::arg("b"));
  m.def(
      "token_cosine_similarity",
      [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
        return token_cosine_similarity(a, b);
      },
      py::arg("a"), py::arg("b"));

  py::class_<PairScores>(m, "PairScores")
      .def_readonly("left_id", &PairScores::left_id)
      .def_readonly("right_id", &PairScores::right_id)
      .def_readonly("lev_raw", &PairScores::lev_raw)
      .def_readonly("lev_norm", &PairScores::lev_norm)
      .def_readonly("cosine_sim", &PairScores::cosine_sim)
      .def_readonly("cosine_dist", &PairScores::cosine_dist)
      .def_readonly("embed_sim", &PairScores::embed_sim)
      .def_readonly("embed_dist", &PairScores::embed_dist);

  // embedding
  py::class_<EmbeddingStore>(m, "EmbeddingStore")
      .def(py::init([](const std::map<std::string, std::vector<float>>& vectors, std::string model) {
             if (vectors.empty()) throw Error(Errc::invalid_argument, "no vectors given");
             EmbeddingStore::VectorMap map(vectors.begin(), vectors.end());
             const auto dim = static_cast<std::uint32_t>(map.begin()->second.size());
             return EmbeddingStore(dim, std::move(model), std::move(map));
           }),
           py::arg("vectors"), py::arg("model_name") = "")
      .def_property_readonly("dimension", &EmbeddingStore::dimension)
      .def_property_readonly("model_name", &EmbeddingStore::model_name)
      .def("__len__", &EmbeddingStore::size)
      .def("__contains__", &EmbeddingStore::contains)
      .def("__getitem__",
           [](const EmbeddingStore& s, const std::string& id) {
             auto v = s.find(id);
             if (v.empty()) throw py::key_error(id);
             return std::vector<float>(v.begin(), v.end());
           })
      .def("similarity", [](const EmbeddingStore& s, const std::string& a,
                            const std::string& b) { return embed_similarity(s, a, b); })
      .def("save", [](const EmbeddingStore& s, const std::filesystem::path& p) { save_embeddings(s, p); })
      .def("to_bytes", [](const EmbeddingStore& s) { return py::bytes(serialize_embeddings(s)); });
  m.def("load_embeddings", &load_embeddings, py::arg("path"));
  m.def(
      "parse_embeddings", [](const py::bytes& data) { return parse_embeddings(std::string(data), "<bytes>"); },
      py::arg("data"));
  m.def("embed_distance", &embed_distance, py::arg("similarity"));

  m.def(
      "score_pairs",
      [](const std::vector<CandidatePair>& pairs, const Corpus& corpus, const EmbeddingStore* store,
         unsigned threads) {
        py::gil_scoped_release release;
        return score_pairs(pairs, corpus, store, threads);
      },
      py::arg("pairs"), py::arg("corpus"), py::arg("embeddings") = nullptr, py::arg("threads") = 0);

  // evaluation
  m.def(
      "sample_pairs",
      [](const std::vector<CandidatePair>& pairs, std::size_t k, std::uint64_t seed) {
        return sample_pairs(pairs, k, seed);
      },
      py::arg("pairs"), py::arg("k"), py::arg("seed") = 42);
  m.def(
      "evaluate",
      [](const std::vector<PairScores>& scores, const std::filesystem::path& truth,
         const std::string& measure, double threshold) {
        const auto predicted = classify(scores, measure_arg(measure), threshold);
        auto report = confusion(predicted, read_truth_file(truth));
        report.measure = measure_arg(measure);
        report.threshold = threshold;
        return json_to_py(to_json(report));
      },
      py::arg("scores"), py::arg("truth_path"), py::arg("measure") = "lev",
      py::arg("threshold") = 0.2, "Confusion counts and precision/recall/F1 as a dict.");
  m.def(
      "correlate",
      [](const std::vector<PairScores>& scores, const std::string& method) {
        if (method != "pearson" && method != "spearman") {
          throw Error(Errc::invalid_argument, "unknown method '" + method + "'");
        }
        const auto c = correlate(scores, method == "pearson" ? CorrelationMethod::pearson
                                                             : CorrelationMethod::spearman);
        py::dict d;
        d["lev_cos"] = c.lev_cos;
        d["lev_embed"] = c.lev_embed ? py::cast(*c.lev_embed) : py::none();
        d["cos_embed"] = c.cos_embed ? py::cast(*c.cos_embed) : py::none();
        return d;
      },
      py::arg("scores"), py::arg("method") = "pearson");
  m.def(
      "export_scatter",
      [](const std::vector<PairScores>& scores, const std::filesystem::path& out_dir) {
        return json_to_py(to_json(export_scatter(scores, out_dir)));
      },
      py::arg("scores"), py::arg("out_dir"));

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "titledup");
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a CLI command in-process; returns (exit_code, stdout, stderr).");
}
