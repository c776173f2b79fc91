#include "titledup/evaluation.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "titledup/csv.hpp"
#include "titledup/error.hpp"

namespace titledup {

std::string_view to_string(Verdict verdict) noexcept {
  switch (verdict) {
    case Verdict::duplicate: return "duplicate";
    case Verdict::not_duplicate: return "not_duplicate";
    case Verdict::unsure: return "unsure";
  }
  return "unsure";
}

std::optional<Verdict> parse_verdict(std::string_view text) {
  if (text == "duplicate") return Verdict::duplicate;
  if (text == "not_duplicate") return Verdict::not_duplicate;
  if (text == "unsure") return Verdict::unsure;
  return std::nullopt;
}

// --- timestamps -------------------------------------------------------------

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  std::array<char, 40> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ",
                              static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                              static_cast<unsigned>(ymd.day()),
                              static_cast<int>(hms.hours().count()),
                              static_cast<int>(hms.minutes().count()),
                              static_cast<int>(hms.seconds().count()),
                              static_cast<int>(hms.subseconds().count()));
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  auto number = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    if (pos + len > text.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (text[i] < '0' || text[i] > '9') return std::nullopt;
      v = v * 10 + (text[i] - '0');
    }
    return v;
  };
  auto expect = [&](std::size_t pos, char c) { return pos < text.size() && text[pos] == c; };

  if (!(expect(4, '-') && expect(7, '-') && expect(10, 'T') && expect(13, ':') &&
        expect(16, ':'))) {
    return std::nullopt;
  }
  const auto y = number(0, 4), mo = number(5, 2), d = number(8, 2);
  const auto h = number(11, 2), mi = number(14, 2), s = number(17, 2);
  if (!y || !mo || !d || !h || !mi || !s) return std::nullopt;

  std::size_t pos = 19;
  int millis = 0;
  if (expect(pos, '.')) {
    ++pos;
    int digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (digits < 3) millis = millis * 10 + (text[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) return std::nullopt;
    for (int i = digits; i < 3; ++i) millis *= 10;
  }
  if (!(expect(pos, 'Z') && pos + 1 == text.size())) return std::nullopt;

  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)},
                           day{static_cast<unsigned>(*d)}};
  if (!ymd.ok() || *h > 23 || *mi > 59 || *s > 60) return std::nullopt;
  return sys_days{ymd} + hours{*h} + minutes{*mi} + seconds{*s} + milliseconds{millis};
}

Timestamp utc_now() {
  return std::chrono::floor<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

// --- ground truth -------------------------------------------------------------

void write_truth_header(std::ostream& out) {
  csv::write_row(out, {"left_id", "right_id", "verdict", "rater", "labeled_at"});
}

void write_truth_row(std::ostream& out, const GroundTruthLabel& label) {
  const std::string ts = format_timestamp(label.labeled_at);
  csv::write_row(out, {label.left_id, label.right_id, to_string(label.verdict), label.rater, ts});
}

void write_truth_csv(std::ostream& out, std::span<const GroundTruthLabel> labels) {
  write_truth_header(out);
  for (const auto& l : labels) write_truth_row(out, l);
}

std::vector<GroundTruthLabel> read_truth_csv(std::istream& in, std::string_view origin) {
  std::vector<GroundTruthLabel> labels;
  csv::Reader reader(in, std::string(origin));
  csv::Row row;
  if (!reader.next(row)) return labels;
  const csv::Header header(row);
  const std::size_t left = header.require("left_id", origin);
  const std::size_t right = header.require("right_id", origin);
  const std::size_t verdict = header.require("verdict", origin);
  const std::size_t rater = header.require("rater", origin);
  const std::size_t at_col = header.require("labeled_at", origin);
  const std::size_t needed = std::max({left, right, verdict, rater, at_col}) + 1;
  while (reader.next(row)) {
    const std::string at = std::string(origin) + ":" + std::to_string(reader.line());
    if (row.size() < needed) throw Error(Errc::malformed_record, at + ": too few fields");
    GroundTruthLabel l;
    l.left_id = row[left];
    l.right_id = row[right];
    if (!(l.left_id < l.right_id)) {
      throw Error(Errc::malformed_record, at + ": pair key is not canonical");
    }
    auto v = parse_verdict(row[verdict]);
    if (!v) throw Error(Errc::invalid_verdict, at + ": unknown verdict '" + row[verdict] + "'");
    l.verdict = *v;
    l.rater = row[rater];
    auto ts = parse_timestamp(row[at_col]);
    if (!ts) throw Error(Errc::malformed_record, at + ": bad timestamp '" + row[at_col] + "'");
    l.labeled_at = *ts;
    labels.push_back(std::move(l));
  }
  return labels;
}

std::map<PairKey, Verdict> resolve_truth(std::span<const GroundTruthLabel> labels) {
  // (pair, rater) -> latest label
  std::map<std::pair<PairKey, std::string>, const GroundTruthLabel*> latest;
  for (const auto& l : labels) {
    auto& slot = latest[{PairKey{l.left_id, l.right_id}, l.rater}];
    if (slot == nullptr || l.labeled_at >= slot->labeled_at) slot = &l;
  }
  std::map<PairKey, std::array<std::size_t, 3>> votes;
  for (const auto& [key, label] : latest) {
    ++votes[key.first][static_cast<std::size_t>(label->verdict)];
  }
  std::map<PairKey, Verdict> resolved;
  for (const auto& [pair, tally] : votes) {
    const std::size_t top = *std::max_element(tally.begin(), tally.end());
    if (std::count(tally.begin(), tally.end(), top) > 1) {
      resolved.emplace(pair, Verdict::unsure);
    } else {
      const auto winner = std::find(tally.begin(), tally.end(), top) - tally.begin();
      resolved.emplace(pair, static_cast<Verdict>(winner));
    }
  }
  return resolved;
}

// --- classification -----------------------------------------------------------

std::string_view to_string(Measure measure) noexcept {
  switch (measure) {
    case Measure::lev_norm: return "lev_norm";
    case Measure::cosine_dist: return "cosine_dist";
    case Measure::embed_dist: return "embed_dist";
  }
  return "lev_norm";
}

std::optional<Measure> parse_measure(std::string_view text) {
  if (text == "lev" || text == "lev_norm") return Measure::lev_norm;
  if (text == "cos" || text == "cosine_dist") return Measure::cosine_dist;
  if (text == "embed" || text == "embed_dist") return Measure::embed_dist;
  return std::nullopt;
}

std::optional<double> measure_value(const PairScores& scores, Measure measure) {
  switch (measure) {
    case Measure::lev_norm: return scores.lev_norm;
    case Measure::cosine_dist: return scores.cosine_dist;
    case Measure::embed_dist: return scores.embed_dist;
  }
  return std::nullopt;
}

std::vector<Prediction> classify(std::span<const PairScores> scores, Measure measure,
                                 double threshold) {
  std::vector<Prediction> out;
  out.reserve(scores.size());
  for (const auto& s : scores) {
    const auto value = measure_value(s, measure);
    if (!value) {
      throw Error(Errc::missing_measure, "pair (" + s.left_id + ", " + s.right_id + ") has no " +
                                             std::string(to_string(measure)));
    }
    out.push_back({s.left_id, s.right_id, *value <= threshold});
  }
  return out;
}

EvalReport confusion(std::span<const Prediction> predicted,
                     const std::map<PairKey, Verdict>& truth) {
  EvalReport report;
  report.sample_size = predicted.size();
  bool any = false;
  for (const auto& p : predicted) {
    auto it = truth.find(PairKey{p.left_id, p.right_id});
    if (it == truth.end() || it->second == Verdict::unsure) continue;
    any = true;
    const bool actual = it->second == Verdict::duplicate;
    if (p.duplicate && actual) ++report.tp;
    else if (p.duplicate) ++report.fp;
    else if (actual) ++report.fn;
    else ++report.tn;
  }
  if (!any) throw Error(Errc::no_overlap, "no predicted pair has a duplicate/not_duplicate label");

  if (report.tp + report.fp > 0) {
    report.precision = static_cast<double>(report.tp) / static_cast<double>(report.tp + report.fp);
  }
  if (report.tp + report.fn > 0) {
    report.recall = static_cast<double>(report.tp) / static_cast<double>(report.tp + report.fn);
  }
  if (report.precision && report.recall) {
    const double sum = *report.precision + *report.recall;
    report.f1 = sum > 0.0 ? 2.0 * *report.precision * *report.recall / sum : 0.0;
  }
  return report;
}

EvalReport confusion(std::span<const Prediction> predicted,
                     std::span<const GroundTruthLabel> truth) {
  return confusion(predicted, resolve_truth(truth));
}

nlohmann::json to_json(const EvalReport& report) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {
      {"measure", to_string(report.measure)},
      {"threshold", report.threshold},
      {"tp", report.tp},
      {"fp", report.fp},
      {"fn", report.fn},
      {"tn", report.tn},
      {"precision", opt(report.precision)},
      {"recall", opt(report.recall)},
      {"f1", opt(report.f1)},
      {"pearson", report.pearson},
      {"sample_size", report.sample_size},
  };
}

// --- correlation --------------------------------------------------------------

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(Errc::invalid_argument, "pearson: length mismatch");
  }
  if (x.size() < 2) throw Error(Errc::degenerate_variance, "pearson: fewer than two rows");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(Errc::degenerate_variance, "pearson: a measure is constant");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(Errc::invalid_argument, "spearman: length mismatch");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

Correlations correlate(std::span<const PairScores> scores, CorrelationMethod method) {
  std::vector<double> lev, cos, emb;
  bool all_embed = true;
  for (const auto& s : scores) {
    lev.push_back(s.lev_norm);
    cos.push_back(s.cosine_dist);
    if (s.embed_dist) emb.push_back(*s.embed_dist);
    else all_embed = false;
  }
  auto r = [method](std::span<const double> a, std::span<const double> b) {
    return method == CorrelationMethod::pearson ? pearson(a, b) : spearman(a, b);
  };
  Correlations out;
  out.lev_cos = r(lev, cos);
  if (all_embed && !scores.empty()) {
    out.lev_embed = r(lev, emb);
    out.cos_embed = r(cos, emb);
  }
  return out;
}

// --- sampling -----------------------------------------------------------------

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  // Largest multiple of `bound` that fits; draws at or above it are rejected.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % bound;
}

std::vector<CandidatePair> sample_pairs(PairStream& pairs, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw Error(Errc::invalid_argument, "sample size k must be at least 1");
  ReservoirSampler<CandidatePair> sampler(k, seed);
  while (auto p = pairs.next()) sampler.offer(std::move(*p));
  auto sample = std::move(sampler).take();
  std::sort(sample.begin(), sample.end());
  return sample;
}

std::vector<CandidatePair> sample_pairs(std::span<const CandidatePair> pairs, std::size_t k,
                                        std::uint64_t seed) {
  if (k == 0) throw Error(Errc::invalid_argument, "sample size k must be at least 1");
  ReservoirSampler<CandidatePair> sampler(k, seed);
  for (const auto& p : pairs) sampler.offer(p);
  auto sample = std::move(sampler).take();
  std::sort(sample.begin(), sample.end());
  return sample;
}

// --- scatter export -----------------------------------------------------------

ScatterSummary summarize_scatter(std::span<const PairScores> scores) {
  ScatterSummary summary;
  summary.rows = scores.size();
  for (const auto& s : scores) {
    if (!s.embed_dist) {
      throw Error(Errc::missing_measure, "pair (" + s.left_id + ", " + s.right_id +
                                             ") has no embed_dist; scatter needs all three axes");
    }
  }
  if (scores.empty()) return summary;

  auto axis = [&](auto get) {
    AxisSummary a{get(scores.front()), get(scores.front()), 0.0};
    double sum = 0.0;
    for (const auto& s : scores) {
      const double v = get(s);
      a.min = std::min(a.min, v);
      a.max = std::max(a.max, v);
      sum += v;
    }
    a.mean = sum / static_cast<double>(scores.size());
    return a;
  };
  summary.lev_norm = axis([](const PairScores& s) { return s.lev_norm; });
  summary.cosine_dist = axis([](const PairScores& s) { return s.cosine_dist; });
  summary.embed_dist = axis([](const PairScores& s) { return *s.embed_dist; });

  const auto corner = std::count_if(scores.begin(), scores.end(), [](const PairScores& s) {
    return s.lev_norm < kBottomLeftThreshold && s.cosine_dist < kBottomLeftThreshold &&
           *s.embed_dist < kBottomLeftThreshold;
  });
  summary.bottom_left_fraction = static_cast<double>(corner) / static_cast<double>(scores.size());
  return summary;
}

nlohmann::json to_json(const ScatterSummary& summary) {
  auto axis = [](const std::optional<AxisSummary>& a) -> nlohmann::json {
    if (!a) return {{"min", nullptr}, {"max", nullptr}, {"mean", nullptr}};
    return {{"min", a->min}, {"max", a->max}, {"mean", a->mean}};
  };
  return {
      {"rows", summary.rows},
      {"lev_norm", axis(summary.lev_norm)},
      {"cosine_dist", axis(summary.cosine_dist)},
      {"embed_dist", axis(summary.embed_dist)},
      {"bottom_left_threshold", kBottomLeftThreshold},
      {"bottom_left_fraction", summary.bottom_left_fraction
                                   ? nlohmann::json(*summary.bottom_left_fraction)
                                   : nlohmann::json(nullptr)},
  };
}

ScatterSummary export_scatter(std::span<const PairScores> scores,
                              const std::filesystem::path& out_dir) {
  const ScatterSummary summary = summarize_scatter(scores);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::io_failure, "cannot create '" + out_dir.string() + "': " + ec.message());

  const auto csv_path = out_dir / kScatterCsvName;
  std::ofstream csv_out(csv_path, std::ios::binary | std::ios::trunc);
  csv::write_row(csv_out, {"left_id", "right_id", "lev_norm", "cosine_dist", "embed_dist"});
  for (const auto& s : scores) {
    const std::string lev = format_real(s.lev_norm);
    const std::string cos = format_real(s.cosine_dist);
    const std::string emb = format_real(*s.embed_dist);
    csv::write_row(csv_out, {s.left_id, s.right_id, lev, cos, emb});
  }
  csv_out.close();
  if (!csv_out) throw Error(Errc::io_failure, "cannot write '" + csv_path.string() + "'");

  const auto json_path = out_dir / kScatterSummaryName;
  std::ofstream json_out(json_path, std::ios::binary | std::ios::trunc);
  json_out << to_json(summary).dump(2) << '\n';
  json_out.close();
  if (!json_out) throw Error(Errc::io_failure, "cannot write '" + json_path.string() + "'");
  return summary;
}

}  // namespace titledup
