#include "titledup/cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "titledup/annotation.hpp"
#include "titledup/corpus.hpp"
#include "titledup/distance.hpp"
#include "titledup/embedding.hpp"
#include "titledup/error.hpp"
#include "titledup/evaluation.hpp"
#include "titledup/pairing.hpp"

namespace titledup::cli {
namespace {

namespace fs = std::filesystem;

enum class Level { error, warn, info, debug };

class Log {
 public:
  explicit Log(std::ostream& err) : err_(err) {}
  void set(Level level) { level_ = level; }
  std::ostream* at(Level level) { return level <= level_ ? &err_ : nullptr; }
  template <typename... Args>
  void info(const Args&... args) {
    if (auto* os = at(Level::info)) ((*os << args), ...) << '\n';
  }

 private:
  std::ostream& err_;
  Level level_ = Level::warn;
};

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_failure, "cannot open '" + path.string() + "' for writing");
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw Error(Errc::io_failure, "write to '" + path.string() + "' failed");
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_failure, "cannot open '" + path.string() + "'");
  return in;
}

Corpus load_any_corpus(const fs::path& path, const std::string& format,
                       const std::string& lang) {
  CorpusFormat f = corpus_format_for(path);
  if (!format.empty()) f = *parse_corpus_format(format);
  LoadOptions options;
  if (!lang.empty()) options.language_filter = lang;
  return load_corpus(path, f, options);
}

std::vector<CandidatePair> load_pairs(const fs::path& path) {
  auto in = open_in(path);
  return read_pairs_csv(in, path.string());
}

std::vector<PairScores> load_scores(const fs::path& path) {
  auto in = open_in(path);
  return read_scores_csv(in, path.string());
}

// --- option bundles -----------------------------------------------------------

struct IngestArgs {
  fs::path input, out;
  std::string format, lang;
};

struct PairsArgs {
  fs::path corpus, out;
  std::string strategy = "complete";
  PairingConfig config;
};

struct ScoreArgs {
  fs::path corpus, pairs, embeddings, out;
  unsigned threads = 0;
};

struct SampleArgs {
  fs::path pairs, out;
  std::size_t k = 2000;
  std::uint64_t seed = 42;
};

struct EvaluateArgs {
  fs::path scores, truth, out;
  std::string measure = "lev";
  double threshold = 0.2;
  std::string correlation = "pearson";
};

struct ScatterArgs {
  fs::path scores, out;
};

struct ServeArgs {
  fs::path corpus, pairs, scores, truth, ui;
  std::string host = "127.0.0.1";
  int port = 8080;
  bool hide_distances = false;
};

struct RunAllArgs {
  fs::path input, out_dir, embeddings;
  std::string format, lang;
  std::string strategy = "complete";
  PairingConfig config;
  std::size_t k = 2000;
  std::uint64_t seed = 42;
  unsigned threads = 0;
};

const std::vector<std::string> kStrategyNames = {"complete", "cross-source", "length-diff",
                                                 "mode-window", "short-titles"};

void add_pairing_options(CLI::App* sub, std::string& strategy, PairingConfig& config) {
  sub->add_option("--strategy", strategy, "Pairing strategy")
      ->check(CLI::IsMember(kStrategyNames));
  sub->add_option("--delta", config.delta, "Max word-count difference (length-diff)");
  sub->add_option("--lambda", config.lambda, "Half-width of the window around the mode word count (mode-window)");
  sub->add_option("--tau", config.tau, "Max word count of a short title (short-titles)");
}

// --- subcommands ----------------------------------------------------------------

nlohmann::json corpus_summary(const Corpus& corpus) {
  std::size_t empty = 0;
  for (const auto& r : corpus.records()) empty += r.word_count == 0 ? 1 : 0;
  nlohmann::json j = {
      {"records", corpus.size()},
      {"sources", corpus.sources()},
      {"zero_word_count", empty},
  };
  j["mode_word_count"] = corpus.empty() ? nlohmann::json(nullptr)
                                        : nlohmann::json(mode_word_count(corpus));
  return j;
}

void write_corpus_file(const Corpus& corpus, const fs::path& path) {
  auto out = open_out(path);
  write_corpus_csv(out, corpus);
  close_out(out, path);
}

std::uint64_t write_pair_stream(PairStream stream, const fs::path& path) {
  auto out = open_out(path);
  write_pairs_header(out);
  std::uint64_t n = 0;
  while (auto p = stream.next()) {
    write_pair_row(out, *p);
    ++n;
  }
  close_out(out, path);
  return n;
}

void write_scores_file(std::span<const PairScores> scores, const fs::path& path) {
  auto out = open_out(path);
  write_scores_csv(out, scores);
  close_out(out, path);
}

PairingConfig resolve_config(const std::string& strategy, PairingConfig config) {
  config.strategy = *parse_strategy(strategy);
  return config;
}

int do_ingest(const IngestArgs& a, std::ostream& out, Log& log) {
  const Corpus corpus = load_any_corpus(a.input, a.format, a.lang);
  if (!a.out.empty()) {
    write_corpus_file(corpus, a.out);
    log.info("wrote ", corpus.size(), " records to ", a.out.string());
  }
  out << corpus_summary(corpus).dump() << '\n';
  return kOk;
}

int do_pairs(const PairsArgs& a, std::ostream& out, Log& log) {
  const Corpus corpus = load_any_corpus(a.corpus, "", "");
  const PairingConfig config = resolve_config(a.strategy, a.config);
  const std::uint64_t n = write_pair_stream(generate(corpus, config), a.out);
  log.info("wrote ", n, " ", to_string(config.strategy), " pairs to ", a.out.string());
  out << nlohmann::json{{"strategy", to_string(config.strategy)}, {"pairs", n}}.dump() << '\n';
  return kOk;
}

std::vector<PairScores> score_file_pairs(const Corpus& corpus, std::vector<CandidatePair> pairs,
                                         const fs::path& embeddings_path, unsigned threads) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  std::optional<EmbeddingStore> store;
  if (!embeddings_path.empty()) store = load_embeddings(embeddings_path);
  return score_pairs(pairs, corpus, store ? &*store : nullptr, threads);
}

int do_score(const ScoreArgs& a, std::ostream& out, Log& log) {
  const Corpus corpus = load_any_corpus(a.corpus, "", "");
  const auto scores = score_file_pairs(corpus, load_pairs(a.pairs), a.embeddings, a.threads);
  write_scores_file(scores, a.out);
  log.info("wrote ", scores.size(), " scored pairs to ", a.out.string());
  out << nlohmann::json{{"scored", scores.size()}, {"embeddings", !a.embeddings.empty()}}.dump()
      << '\n';
  return kOk;
}

int do_sample(const SampleArgs& a, std::ostream& out, Log& log) {
  const auto pairs = load_pairs(a.pairs);
  const auto sample = sample_pairs(pairs, a.k, a.seed);
  if (a.out.empty()) {
    write_pairs_csv(out, sample);
  } else {
    auto file = open_out(a.out);
    write_pairs_csv(file, sample);
    close_out(file, a.out);
    out << nlohmann::json{{"sampled", sample.size()}, {"from", pairs.size()}, {"seed", a.seed}}.dump()
        << '\n';
  }
  log.info("sampled ", sample.size(), " of ", pairs.size(), " pairs (seed ", a.seed, ")");
  return kOk;
}

int do_evaluate(const EvaluateArgs& a, std::ostream& out, Log& log) {
  const auto scores = load_scores(a.scores);
  auto truth_in = open_in(a.truth);
  const auto truth = read_truth_csv(truth_in, a.truth.string());
  const Measure measure = *parse_measure(a.measure);

  EvalReport report = confusion(classify(scores, measure, a.threshold), truth);
  report.measure = measure;
  report.threshold = a.threshold;

  const auto method =
      a.correlation == "spearman" ? CorrelationMethod::spearman : CorrelationMethod::pearson;
  try {
    const Correlations c = correlate(scores, method);
    report.pearson["lev_norm/cosine_dist"] = c.lev_cos;
    if (c.lev_embed) report.pearson["lev_norm/embed_dist"] = *c.lev_embed;
    if (c.cos_embed) report.pearson["cosine_dist/embed_dist"] = *c.cos_embed;
  } catch (const Error& e) {
    if (e.code() != Errc::degenerate_variance) throw;
    log.info("correlations skipped: ", e.what());
  }

  nlohmann::json j = to_json(report);
  j["correlation_method"] = a.correlation;
  if (!a.out.empty()) {
    auto file = open_out(a.out);
    file << j.dump(2) << '\n';
    close_out(file, a.out);
  }
  out << j.dump(2) << '\n';
  return kOk;
}

int do_scatter(const ScatterArgs& a, std::ostream& out, Log& log) {
  const auto scores = load_scores(a.scores);
  const ScatterSummary summary = export_scatter(scores, a.out);
  log.info("wrote scatter data for ", summary.rows, " pairs to ", a.out.string());
  out << to_json(summary).dump(2) << '\n';
  return kOk;
}

int do_serve(const ServeArgs& a, std::ostream& out, Log& log) {
  Corpus corpus = load_any_corpus(a.corpus, "", "");
  auto queue = load_pairs(a.pairs);
  std::optional<std::vector<PairScores>> scores;
  if (!a.scores.empty()) scores = load_scores(a.scores);
  AnnotationSession::Options options;
  options.show_distances = !a.hide_distances;
  AnnotationSession session(std::move(corpus), std::move(queue), std::move(scores), a.truth,
                            options);

  std::optional<fs::path> ui;
  if (!a.ui.empty()) ui = a.ui;
  AnnotationServer server(session, ui);

  // Route SIGINT/SIGTERM to sigwait below instead of killing the process.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const int port = server.bind(a.host, a.port);
  const Progress p = session.progress();
  out << "listening on http://" << a.host << ":" << port << std::endl;
  log.info(p.total, " pairs queued, ", p.labeled_any, " already labeled");

  std::thread listener([&server] { server.listen(); });
  int received = 0;
  sigwait(&signals, &received);
  log.info("signal ", received, ", shutting down");
  server.stop();
  listener.join();
  pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
  return kOk;
}

int do_run_all(const RunAllArgs& a, std::ostream& out, Log& log) {
  const PairingConfig config = resolve_config(a.strategy, a.config);
  const fs::path corpus_path = a.out_dir / "corpus.csv";
  const fs::path pairs_path = a.out_dir / "pairs.csv";
  const fs::path sample_path = a.out_dir / "sample.csv";
  const fs::path scores_path = a.out_dir / "scores.csv";
  const fs::path scatter_dir = a.out_dir / "scatter";

  const Corpus corpus = load_any_corpus(a.input, a.format, a.lang);
  write_corpus_file(corpus, corpus_path);
  log.info("ingest: ", corpus.size(), " records");

  const std::uint64_t n = write_pair_stream(generate(corpus, config), pairs_path);
  log.info("pairs: ", n, " ", to_string(config.strategy), " pairs");

  auto stream = generate(corpus, config);
  const auto sample = sample_pairs(stream, a.k, a.seed);
  {
    auto file = open_out(sample_path);
    write_pairs_csv(file, sample);
    close_out(file, sample_path);
  }
  log.info("sample: ", sample.size(), " pairs");

  const auto scores = score_file_pairs(corpus, sample, a.embeddings, a.threads);
  write_scores_file(scores, scores_path);
  log.info("score: ", scores.size(), " rows");

  const ScatterSummary summary = export_scatter(scores, scatter_dir);
  nlohmann::json j = {
      {"records", corpus.size()},
      {"pairs", n},
      {"sampled", sample.size()},
      {"scatter", to_json(summary)},
  };
  out << j.dump(2) << '\n';
  return kOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  Log log(err);
  CLI::App app{"titledup: candidate-pair generation, scoring and evaluation for title corpora"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  std::string level = "warn";
  app.add_option("--log-level", level, "Diagnostics on standard error")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Load, normalize and language-filter a corpus");
  ingest_cmd->add_option("--input", ingest.input, "Corpus file (id,title,source)")->required();
  ingest_cmd->add_option("--format", ingest.format, "csv or jsonl (default: from extension)")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  ingest_cmd->add_option("--lang", ingest.lang, "Keep only this language (plus unknown)");
  ingest_cmd->add_option("--out", ingest.out, "Write the normalized corpus CSV here");

  PairsArgs pairs;
  auto* pairs_cmd = app.add_subcommand("pairs", "Generate candidate pairs");
  add_pairing_options(pairs_cmd, pairs.strategy, pairs.config);
  pairs_cmd->add_option("--corpus", pairs.corpus, "Corpus file")->required();
  pairs_cmd->add_option("--out", pairs.out, "Pair CSV to write")->required();

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Score candidate pairs");
  score_cmd->add_option("--corpus", score.corpus, "Corpus file")->required();
  score_cmd->add_option("--pairs", score.pairs, "Pair CSV")->required();
  score_cmd->add_option("--embeddings", score.embeddings, "DFV1 vector file");
  score_cmd->add_option("--out", score.out, "Scores CSV to write")->required();
  score_cmd->add_option("--threads", score.threads, "Worker threads (0 = all cores)");

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "Reservoir-sample pairs");
  sample_cmd->add_option("--pairs", sample.pairs, "Pair CSV")->required();
  sample_cmd->add_option("-k", sample.k, "Sample size")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", sample.seed, "Random seed");
  sample_cmd->add_option("--out", sample.out, "Pair CSV to write (default: standard output)");

  EvaluateArgs evaluate;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "Threshold one measure and compare against ground truth");
  evaluate_cmd->add_option("--scores", evaluate.scores, "Scores CSV")->required();
  evaluate_cmd->add_option("--truth", evaluate.truth, "Ground-truth CSV")->required();
  evaluate_cmd->add_option("--measure", evaluate.measure, "lev, cos or embed")
      ->check(CLI::IsMember({"lev", "cos", "embed"}));
  evaluate_cmd->add_option("--threshold", evaluate.threshold, "Duplicate iff distance <= threshold")
      ->check(CLI::Range(0.0, 1.0));
  evaluate_cmd->add_option("--correlation", evaluate.correlation, "pearson or spearman")
      ->check(CLI::IsMember({"pearson", "spearman"}));
  evaluate_cmd->add_option("--out", evaluate.out, "Also write the report JSON here");

  ScatterArgs scatter;
  auto* scatter_cmd = app.add_subcommand("scatter", "Export the three-distance scatter data");
  scatter_cmd->add_option("--scores", scatter.scores, "Scores CSV with embeddings")->required();
  scatter_cmd->add_option("--out", scatter.out, "Output directory")->required();

  ServeArgs serve;
  auto* annotate_cmd = app.add_subcommand("annotate", "Human annotation");
  annotate_cmd->require_subcommand(1);
  auto* serve_cmd = annotate_cmd->add_subcommand("serve", "Run the annotation HTTP service");
  serve_cmd->add_option("--corpus", serve.corpus, "Corpus file")->required();
  serve_cmd->add_option("--pairs", serve.pairs, "Pair CSV to annotate, in serving order")->required();
  serve_cmd->add_option("--scores", serve.scores, "Scores CSV shown to raters");
  serve_cmd->add_option("--truth", serve.truth, "Ground-truth CSV to append to")->required();
  serve_cmd->add_option("--host", serve.host, "Bind address");
  serve_cmd->add_option("--port", serve.port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--ui", serve.ui, "Directory of UI assets served at /");
  serve_cmd->add_flag("--hide-distances", serve.hide_distances, "Do not show distances to raters");

  RunAllArgs all;
  auto* all_cmd = app.add_subcommand("run-all", "ingest, pairs, sample, score and scatter in one go");
  all_cmd->add_option("--input", all.input, "Corpus file")->required();
  all_cmd->add_option("--format", all.format, "csv or jsonl (default: from extension)")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  all_cmd->add_option("--lang", all.lang, "Keep only this language (plus unknown)");
  all_cmd->add_option("--out-dir", all.out_dir, "Directory for every stage's output")->required();
  add_pairing_options(all_cmd, all.strategy, all.config);
  all_cmd->add_option("--embeddings", all.embeddings, "DFV1 vector file");
  all_cmd->add_option("-k", all.k, "Sample size")->check(CLI::PositiveNumber);
  all_cmd->add_option("--seed", all.seed, "Random seed");
  all_cmd->add_option("--threads", all.threads, "Worker threads (0 = all cores)");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  if (level == "error") log.set(Level::error);
  else if (level == "info") log.set(Level::info);
  else if (level == "debug") log.set(Level::debug);

  try {
    if (ingest_cmd->parsed()) return do_ingest(ingest, out, log);
    if (pairs_cmd->parsed()) return do_pairs(pairs, out, log);
    if (score_cmd->parsed()) return do_score(score, out, log);
    if (sample_cmd->parsed()) return do_sample(sample, out, log);
    if (evaluate_cmd->parsed()) return do_evaluate(evaluate, out, log);
    if (scatter_cmd->parsed()) return do_scatter(scatter, out, log);
    if (serve_cmd->parsed()) return do_serve(serve, out, log);
    if (all_cmd->parsed()) return do_run_all(all, out, log);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  err << app.help();
  return kUsageError;
}

}  // namespace titledup::cli
