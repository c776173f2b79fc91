#include "titledup/annotation.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>

#include <httplib.h>

#include "titledup/error.hpp"

namespace titledup {

nlohmann::json to_json(const PairPayload& p) {
  nlohmann::json j = {
      {"done", false},
      {"left_id", p.left_id},
      {"right_id", p.right_id},
      {"left_title", p.left_title},
      {"right_title", p.right_title},
      {"left_source", p.left_source},
      {"right_source", p.right_source},
  };
  if (p.scores) {
    j["distances"] = {
        {"lev_norm", p.scores->lev_norm},
        {"cosine_dist", p.scores->cosine_dist},
        {"embed_dist",
         p.scores->embed_dist ? nlohmann::json(*p.scores->embed_dist) : nlohmann::json(nullptr)},
    };
  }
  return j;
}

nlohmann::json to_json(const Progress& progress) {
  return {
      {"total", progress.total},
      {"labeled_any", progress.labeled_any},
      {"labeled_by_rater", progress.labeled_by_rater},
  };
}

std::size_t AnnotationSession::KeyHash::operator()(const PairKey& key) const noexcept {
  const std::size_t h1 = std::hash<std::string>{}(key.first);
  const std::size_t h2 = std::hash<std::string>{}(key.second);
  return h1 ^ (h2 + 0x9e3779b97f4a7c15ULL + (h1 << 6) + (h1 >> 2));
}

AnnotationSession::AnnotationSession(Corpus corpus, std::vector<CandidatePair> queue,
                                     std::optional<std::vector<PairScores>> scores,
                                     std::filesystem::path truth_path)
    : AnnotationSession(std::move(corpus), std::move(queue), std::move(scores),
                        std::move(truth_path), Options{}) {}

AnnotationSession::AnnotationSession(Corpus corpus, std::vector<CandidatePair> queue,
                                     std::optional<std::vector<PairScores>> scores,
                                     std::filesystem::path truth_path, Options options)
    : corpus_(std::move(corpus)), truth_path_(std::move(truth_path)), options_(options) {
  for (auto& p : queue) {
    corpus_.at(p.left_id);
    corpus_.at(p.right_id);
    PairKey key{std::move(p.left_id), std::move(p.right_id)};
    if (position_.contains(key)) continue;
    position_.emplace(key, queue_.size());
    queue_.push_back(std::move(key));
  }
  if (scores) {
    for (auto& s : *scores) {
      PairKey key{s.left_id, s.right_id};
      if (position_.contains(key)) scores_.insert_or_assign(std::move(key), std::move(s));
    }
  }
  replay_truth_file();
  open_truth_file();
}

AnnotationSession::~AnnotationSession() {
  if (fd_ >= 0) ::close(fd_);
}

void AnnotationSession::record(const PairKey& key, const std::string& rater) {
  auto it = position_.find(key);
  if (it == position_.end()) return;  // label for a pair outside this queue
  auto slot = labeled_.find(rater);
  if (slot == labeled_.end()) slot = labeled_.emplace(rater, std::set<std::size_t>{}).first;
  slot->second.insert(it->second);
  labeled_any_.insert(it->second);
}

void AnnotationSession::replay_truth_file() {
  std::error_code ec;
  if (!std::filesystem::exists(truth_path_, ec) || std::filesystem::file_size(truth_path_, ec) == 0) {
    return;
  }
  std::ifstream in(truth_path_, std::ios::binary);
  if (!in) throw Error(Errc::io_failure, "cannot open '" + truth_path_.string() + "'");
  for (const auto& label : read_truth_csv(in, truth_path_.string())) {
    record(PairKey{label.left_id, label.right_id}, label.rater);
  }
}

void AnnotationSession::open_truth_file() {
  fd_ = ::open(truth_path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw Error(Errc::io_failure,
                "cannot open '" + truth_path_.string() + "' for append: " + std::strerror(errno));
  }
  if (::lseek(fd_, 0, SEEK_END) == 0) {
    std::ostringstream header;
    write_truth_header(header);
    const std::string bytes = header.str();
    if (::write(fd_, bytes.data(), bytes.size()) != static_cast<ssize_t>(bytes.size()) ||
        ::fsync(fd_) != 0) {
      throw Error(Errc::io_failure, "cannot write header to '" + truth_path_.string() + "'");
    }
  }
}

std::optional<PairPayload> AnnotationSession::next_pair(std::string_view rater) const {
  std::shared_lock lock(mutex_);
  const std::set<std::size_t>* done = nullptr;
  if (auto it = labeled_.find(rater); it != labeled_.end()) done = &it->second;
  for (std::size_t i = 0; i < queue_.size(); ++i) {
    if (done && done->contains(i)) continue;
    const auto& [left_id, right_id] = queue_[i];
    const TitleRecord& l = corpus_.at(left_id);
    const TitleRecord& r = corpus_.at(right_id);
    PairPayload p{left_id, right_id, l.raw_title, r.raw_title, l.source, r.source, std::nullopt};
    if (options_.show_distances) {
      if (auto s = scores_.find(queue_[i]); s != scores_.end()) p.scores = s->second;
    }
    return p;
  }
  return std::nullopt;
}

GroundTruthLabel AnnotationSession::submit_label(std::string_view rater, std::string_view left_id,
                                                 std::string_view right_id,
                                                 std::string_view verdict) {
  if (rater.empty()) throw Error(Errc::invalid_argument, "rater name is required");
  const auto parsed = parse_verdict(verdict);
  if (!parsed) throw Error(Errc::invalid_verdict, "unknown verdict '" + std::string(verdict) + "'");
  PairKey key{std::string(left_id), std::string(right_id)};
  if (key.second < key.first) std::swap(key.first, key.second);
  if (!position_.contains(key)) {
    throw Error(Errc::unknown_pair,
                "pair (" + key.first + ", " + key.second + ") is not in the annotation queue");
  }

  std::unique_lock lock(mutex_);
  GroundTruthLabel label{key.first, key.second, *parsed, std::string(rater), utc_now()};
  std::ostringstream row;
  write_truth_row(row, label);
  const std::string bytes = row.str();
  std::size_t written = 0;
  while (written < bytes.size()) {
    const ssize_t n = ::write(fd_, bytes.data() + written, bytes.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::io_failure,
                  "append to '" + truth_path_.string() + "' failed: " + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) {
    throw Error(Errc::io_failure, "fsync of '" + truth_path_.string() + "' failed");
  }
  record(key, label.rater);
  return label;
}

Progress AnnotationSession::progress() const {
  std::shared_lock lock(mutex_);
  Progress p;
  p.total = queue_.size();
  p.labeled_any = labeled_any_.size();
  for (const auto& [rater, done] : labeled_) p.labeled_by_rater.emplace(rater, done.size());
  return p;
}

// --- HTTP ---------------------------------------------------------------------

struct AnnotationServer::Impl {
  explicit Impl(AnnotationSession& s) : session(s) {}
  AnnotationSession& session;
  httplib::Server server;
};

namespace {

void reply(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, std::string_view message) {
  reply(res, status, {{"ok", false}, {"error", message}});
}

}  // namespace

AnnotationServer::AnnotationServer(AnnotationSession& session,
                                   std::optional<std::filesystem::path> ui_dir)
    : impl_(std::make_unique<Impl>(session)) {
  auto& server = impl_->server;
  auto& s = impl_->session;

  server.Get("/api/next", [&s](const httplib::Request& req, httplib::Response& res) {
    const std::string rater = req.get_param_value("rater");
    if (rater.empty()) return reply_error(res, 400, "missing 'rater' query parameter");
    if (auto pair = s.next_pair(rater)) return reply(res, 200, to_json(*pair));
    reply(res, 200, {{"done", true}});
  });

  server.Post("/api/label", [&s](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error&) {
      return reply_error(res, 400, "request body is not JSON");
    }
    auto field = [&](const char* name) -> std::optional<std::string> {
      if (!body.is_object()) return std::nullopt;
      auto it = body.find(name);
      if (it == body.end() || !it->is_string()) return std::nullopt;
      return it->get<std::string>();
    };
    const auto rater = field("rater"), left = field("left_id"), right = field("right_id"),
               verdict = field("verdict");
    if (!rater || !left || !right || !verdict) {
      return reply_error(res, 400, "body needs string fields rater, left_id, right_id, verdict");
    }
    try {
      s.submit_label(*rater, *left, *right, *verdict);
      reply(res, 200, {{"ok", true}});
    } catch (const Error& e) {
      switch (e.code()) {
        case Errc::unknown_pair: return reply_error(res, 404, e.what());
        case Errc::invalid_verdict:
        case Errc::invalid_argument: return reply_error(res, 400, e.what());
        default: return reply_error(res, 500, e.what());
      }
    }
  });

  server.Get("/api/progress", [&s](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, to_json(s.progress()));
  });

  if (ui_dir && server.set_mount_point("/", ui_dir->string())) return;
  server.Get("/", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(
        "<!doctype html><title>titledup annotate</title>"
        "<p>No UI assets configured. Start the server with <code>--ui DIR</code>; "
        "the JSON API is under <code>/api/</code>.</p>",
        "text/html");
  });
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  auto& server = impl_->server;
  if (port == 0) {
    const int bound = server.bind_to_any_port(host);
    if (bound < 0) throw Error(Errc::io_failure, "cannot bind " + host);
    return bound;
  }
  if (!server.bind_to_port(host, port)) {
    throw Error(Errc::io_failure, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void AnnotationServer::listen() { impl_->server.listen_after_bind(); }

void AnnotationServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace titledup
