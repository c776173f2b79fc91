#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "titledup/corpus.hpp"
#include "titledup/distance.hpp"
#include "titledup/evaluation.hpp"
#include "titledup/pairing.hpp"

namespace titledup {

struct PairPayload {
  std::string left_id, right_id;
  std::string left_title, right_title;
  std::string left_source, right_source;
  std::optional<PairScores> scores;
};

struct Progress {
  std::size_t total = 0;
  std::size_t labeled_any = 0;
  std::map<std::string, std::size_t> labeled_by_rater;
};

nlohmann::json to_json(const PairPayload& payload);
nlohmann::json to_json(const Progress& progress);

/// Serves queued pairs to raters one at a time and appends their verdicts to
/// a ground-truth CSV. Every append is flushed and fsync'd before
/// submit_label returns, and an existing truth file is replayed on
/// construction, so acknowledged labels survive a restart.
///
/// Reads take a shared lock; submissions are serialized.
class AnnotationSession {
 public:
  struct Options {
    /// Include distances in payloads when scores were supplied.
    bool show_distances = true;
  };

  /// Errors: unknown_id (queued pair not in corpus), malformed_record (bad
  /// existing truth file), io_failure.
  AnnotationSession(Corpus corpus, std::vector<CandidatePair> queue,
                    std::optional<std::vector<PairScores>> scores,
                    std::filesystem::path truth_path, Options options);
  AnnotationSession(Corpus corpus, std::vector<CandidatePair> queue,
                    std::optional<std::vector<PairScores>> scores,
                    std::filesystem::path truth_path);
  ~AnnotationSession();

  AnnotationSession(const AnnotationSession&) = delete;
  AnnotationSession& operator=(const AnnotationSession&) = delete;

  /// First queued pair this rater has not labeled, or nullopt when done.
  std::optional<PairPayload> next_pair(std::string_view rater) const;

  /// Errors: unknown_pair, invalid_verdict, invalid_argument (empty rater),
  /// io_failure. Ids may be given in either order.
  GroundTruthLabel submit_label(std::string_view rater, std::string_view left_id,
                                std::string_view right_id, std::string_view verdict);

  Progress progress() const;

  const std::filesystem::path& truth_path() const noexcept { return truth_path_; }

 private:
  struct KeyHash {
    std::size_t operator()(const PairKey& key) const noexcept;
  };

  void replay_truth_file();
  void open_truth_file();
  void record(const PairKey& key, const std::string& rater);

  Corpus corpus_;
  std::vector<PairKey> queue_;
  std::unordered_map<PairKey, std::size_t, KeyHash> position_;
  std::unordered_map<PairKey, PairScores, KeyHash> scores_;
  std::filesystem::path truth_path_;
  Options options_;

  mutable std::shared_mutex mutex_;
  std::map<std::string, std::set<std::size_t>, std::less<>> labeled_;  // rater -> queue positions
  std::set<std::size_t> labeled_any_;
  int fd_ = -1;
};

/// HTTP front end:
///   GET  /api/next?rater=NAME  -> pair payload or {"done":true}
///   POST /api/label            -> {"ok":true}
///   GET  /api/progress         -> progress counts
///   GET  /                     -> static UI assets from `ui_dir`, if given
class AnnotationServer {
 public:
  AnnotationServer(AnnotationSession& session, std::optional<std::filesystem::path> ui_dir);
  ~AnnotationServer();

  /// Binds; port 0 picks a free port. Returns the bound port.
  /// Throws Error(io_failure) when binding fails.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace titledup
