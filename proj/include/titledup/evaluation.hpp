#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "titledup/distance.hpp"
#include "titledup/pairing.hpp"

namespace titledup {

enum class Verdict { duplicate, not_duplicate, unsure };

std::string_view to_string(Verdict verdict) noexcept;
std::optional<Verdict> parse_verdict(std::string_view text);

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// ISO-8601 UTC with milliseconds, e.g. "2024-05-01T12:30:00.250Z".
std::string format_timestamp(Timestamp t);
/// Accepts "YYYY-MM-DDTHH:MM:SS[.fff]Z".
std::optional<Timestamp> parse_timestamp(std::string_view text);
Timestamp utc_now();

struct GroundTruthLabel {
  std::string left_id;
  std::string right_id;
  Verdict verdict = Verdict::unsure;
  std::string rater;
  Timestamp labeled_at{};
};

/// `left_id,right_id,verdict,rater,labeled_at`
void write_truth_header(std::ostream& out);
void write_truth_row(std::ostream& out, const GroundTruthLabel& label);
void write_truth_csv(std::ostream& out, std::span<const GroundTruthLabel> labels);
std::vector<GroundTruthLabel> read_truth_csv(std::istream& in, std::string_view origin);

using PairKey = std::pair<std::string, std::string>;

/// One effective verdict per pair. Per rater the latest timestamp wins (file
/// order breaks equal timestamps). Across raters the most frequent verdict
/// wins and a tie for first place becomes unsure.
std::map<PairKey, Verdict> resolve_truth(std::span<const GroundTruthLabel> labels);

enum class Measure { lev_norm, cosine_dist, embed_dist };

std::string_view to_string(Measure measure) noexcept;
/// Accepts "lev", "cos", "embed" and the full column names.
std::optional<Measure> parse_measure(std::string_view text);
std::optional<double> measure_value(const PairScores& scores, Measure measure);

struct Prediction {
  std::string left_id;
  std::string right_id;
  bool duplicate = false;
};

/// Duplicate iff distance <= threshold. Throws Error(missing_measure).
std::vector<Prediction> classify(std::span<const PairScores> scores, Measure measure,
                                 double threshold);

struct EvalReport {
  Measure measure = Measure::lev_norm;
  double threshold = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  /// Keyed "lev_norm/cosine_dist" etc.
  std::map<std::string, double> pearson;
  std::size_t sample_size = 0;
};

/// Counts predictions against resolved truth; unlabeled and unsure pairs are
/// skipped. Throws Error(no_overlap) when nothing is left to count.
EvalReport confusion(std::span<const Prediction> predicted,
                     const std::map<PairKey, Verdict>& truth);
EvalReport confusion(std::span<const Prediction> predicted,
                     std::span<const GroundTruthLabel> truth);

nlohmann::json to_json(const EvalReport& report);

enum class CorrelationMethod { pearson, spearman };

/// Throws Error(degenerate_variance) for fewer than two rows or a constant
/// input, Error(invalid_argument) on length mismatch.
double pearson(std::span<const double> x, std::span<const double> y);
/// Pearson over average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

struct Correlations {
  double lev_cos = 0.0;
  /// Present only when every row carries an embedding distance.
  std::optional<double> lev_embed;
  std::optional<double> cos_embed;
};

Correlations correlate(std::span<const PairScores> scores,
                       CorrelationMethod method = CorrelationMethod::pearson);

/// Uniform draw in [0, bound) by rejection over the raw engine output, so the
/// sequence is the same with every standard library.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

/// Algorithm R over a single pass. Deterministic for a fixed seed and input
/// order.
template <typename T>
class ReservoirSampler {
 public:
  ReservoirSampler(std::size_t k, std::uint64_t seed) : k_(k), rng_(seed) {
    reservoir_.reserve(k);
  }

  void offer(T item) {
    ++seen_;
    if (reservoir_.size() < k_) {
      reservoir_.push_back(std::move(item));
      return;
    }
    const std::uint64_t slot = uniform_below(rng_, seen_);
    if (slot < k_) reservoir_[slot] = std::move(item);
  }

  std::uint64_t seen() const noexcept { return seen_; }
  std::vector<T> take() && { return std::move(reservoir_); }

 private:
  std::size_t k_;
  std::mt19937_64 rng_;
  std::uint64_t seen_ = 0;
  std::vector<T> reservoir_;
};

/// Uniform sample of min(k, stream length) pairs, returned in canonical
/// order. Throws Error(invalid_argument) for k == 0.
std::vector<CandidatePair> sample_pairs(PairStream& pairs, std::size_t k, std::uint64_t seed);
std::vector<CandidatePair> sample_pairs(std::span<const CandidatePair> pairs, std::size_t k,
                                        std::uint64_t seed);

inline constexpr double kBottomLeftThreshold = 0.2;

struct AxisSummary {
  double min = 0.0, max = 0.0, mean = 0.0;
};

struct ScatterSummary {
  std::size_t rows = 0;
  std::optional<AxisSummary> lev_norm, cosine_dist, embed_dist;
  /// Share of rows with all three distances < kBottomLeftThreshold.
  std::optional<double> bottom_left_fraction;
};

/// Throws Error(missing_measure) if any row lacks the embedding distance.
ScatterSummary summarize_scatter(std::span<const PairScores> scores);
nlohmann::json to_json(const ScatterSummary& summary);

inline constexpr std::string_view kScatterCsvName = "scatter.csv";
inline constexpr std::string_view kScatterSummaryName = "scatter_summary.json";

/// Writes `left_id,right_id,lev_norm,cosine_dist,embed_dist` and the summary
/// JSON into `out_dir` (created if needed). Errors: missing_measure,
/// io_failure. Nothing is written when a row is incomplete.
ScatterSummary export_scatter(std::span<const PairScores> scores,
                              const std::filesystem::path& out_dir);

}  // namespace titledup
