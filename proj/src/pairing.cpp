#include "titledup/pairing.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

#include "titledup/csv.hpp"
#include "titledup/error.hpp"

namespace titledup {

std::string_view to_string(Strategy strategy) noexcept {
  switch (strategy) {
    case Strategy::complete: return "complete";
    case Strategy::cross_source: return "cross-source";
    case Strategy::length_diff: return "length-diff";
    case Strategy::mode_window: return "mode-window";
    case Strategy::short_titles: return "short-titles";
  }
  return "complete";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '_', '-');
  for (auto st : {Strategy::complete, Strategy::cross_source, Strategy::length_diff,
                  Strategy::mode_window, Strategy::short_titles}) {
    if (s == to_string(st)) return st;
  }
  return std::nullopt;
}

CandidatePair make_candidate(std::string a, std::string b, Strategy strategy) {
  if (a == b) throw Error(Errc::invalid_argument, "self pair '" + a + "'");
  if (b < a) std::swap(a, b);
  return CandidatePair{std::move(a), std::move(b), strategy};
}

/// Eligible records in id order, grouped into buckets. A left record at
/// position i pairs with every position j > i in the buckets listed for its
/// group.
struct PairStream::Plan {
  Strategy strategy = Strategy::complete;
  std::vector<std::string> ids;          // sorted
  std::vector<std::uint32_t> group;      // per position
  std::vector<std::vector<std::uint32_t>> buckets;   // group -> ascending positions
  std::vector<std::vector<std::uint32_t>> partners;  // group -> partner groups
};

namespace {

using Plan = PairStream::Plan;

struct Eligible {
  const TitleRecord* record;
  std::uint32_t key;  // raw grouping key before compaction
};

// Sorts the eligible records by id, compacts keys into dense group indices
// and fills the buckets. `partner_keys` maps a raw key to its partner raw
// keys.
template <typename PartnerFn>
std::shared_ptr<const Plan> build_plan(Strategy strategy, std::vector<Eligible> eligible,
                                       PartnerFn partner_keys) {
  if (eligible.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(Errc::invalid_argument, "corpus too large for pairing");
  }
  std::sort(eligible.begin(), eligible.end(),
            [](const Eligible& a, const Eligible& b) { return a.record->id < b.record->id; });

  auto plan = std::make_shared<Plan>();
  plan->strategy = strategy;
  std::map<std::uint32_t, std::uint32_t> dense;
  for (const auto& e : eligible) dense.emplace(e.key, 0);
  std::uint32_t next = 0;
  for (auto& [key, index] : dense) index = next++;

  plan->buckets.resize(dense.size());
  plan->ids.reserve(eligible.size());
  plan->group.reserve(eligible.size());
  for (std::uint32_t pos = 0; pos < eligible.size(); ++pos) {
    const std::uint32_t g = dense.at(eligible[pos].key);
    plan->ids.push_back(eligible[pos].record->id);
    plan->group.push_back(g);
    plan->buckets[g].push_back(pos);
  }

  plan->partners.resize(dense.size());
  for (const auto& [key, g] : dense) {
    for (std::uint32_t other : partner_keys(key, dense)) {
      if (auto it = dense.find(other); it != dense.end()) plan->partners[g].push_back(it->second);
    }
  }
  return plan;
}

using KeyMap = std::map<std::uint32_t, std::uint32_t>;

std::vector<std::uint32_t> all_keys(const KeyMap& dense) {
  std::vector<std::uint32_t> keys;
  for (const auto& [key, g] : dense) keys.push_back(key);
  return keys;
}

std::vector<std::uint32_t> all_other_keys(std::uint32_t self, const KeyMap& dense) {
  std::vector<std::uint32_t> keys;
  for (const auto& [key, g] : dense) {
    if (key != self) keys.push_back(key);
  }
  return keys;
}

std::uint32_t narrow_count(std::size_t word_count) {
  return static_cast<std::uint32_t>(
      std::min<std::size_t>(word_count, std::numeric_limits<std::uint32_t>::max()));
}

// Dense source indices in sorted source order.
std::map<std::string_view, std::uint32_t> source_index(const Corpus& corpus) {
  std::map<std::string_view, std::uint32_t> index;
  std::uint32_t next = 0;
  for (const auto& s : corpus.sources()) index.emplace(s, next++);
  return index;
}

}  // namespace

PairStream::PairStream(std::shared_ptr<const Plan> plan) : plan_(std::move(plan)) {}

Strategy PairStream::strategy() const noexcept { return plan_->strategy; }

void PairStream::load_cursors() {
  heap_.clear();
  const auto left = static_cast<std::uint32_t>(left_);
  for (std::uint32_t g : plan_->partners[plan_->group[left_]]) {
    const auto& bucket = plan_->buckets[g];
    auto it = std::upper_bound(bucket.begin(), bucket.end(), left);
    if (it != bucket.end()) {
      heap_.push_back(Cursor{g, static_cast<std::uint32_t>(it - bucket.begin())});
    }
  }
  std::make_heap(heap_.begin(), heap_.end(), [this](const Cursor& a, const Cursor& b) {
    return plan_->buckets[a.bucket][a.offset] > plan_->buckets[b.bucket][b.offset];
  });
  loaded_ = true;
}

std::optional<CandidatePair> PairStream::next() {
  auto later = [this](const Cursor& a, const Cursor& b) {
    return plan_->buckets[a.bucket][a.offset] > plan_->buckets[b.bucket][b.offset];
  };
  while (left_ < plan_->ids.size()) {
    if (!loaded_) load_cursors();
    if (heap_.empty()) {
      ++left_;
      loaded_ = false;
      continue;
    }
    std::pop_heap(heap_.begin(), heap_.end(), later);
    Cursor& c = heap_.back();
    const auto& bucket = plan_->buckets[c.bucket];
    const std::uint32_t right = bucket[c.offset];
    if (++c.offset < bucket.size()) {
      std::push_heap(heap_.begin(), heap_.end(), later);
    } else {
      heap_.pop_back();
    }
    return CandidatePair{plan_->ids[left_], plan_->ids[right], plan_->strategy};
  }
  return std::nullopt;
}

std::vector<CandidatePair> PairStream::collect() {
  std::vector<CandidatePair> out;
  while (auto p = next()) out.push_back(std::move(*p));
  return out;
}

std::uint64_t PairStream::count() {
  std::uint64_t n = 0;
  while (next()) ++n;
  return n;
}

PairStream complete_pairs(const Corpus& corpus) {
  std::vector<Eligible> eligible;
  for (const auto& r : corpus.records()) {
    if (r.word_count >= 1) eligible.push_back({&r, 0});
  }
  return PairStream(build_plan(Strategy::complete, std::move(eligible),
                               [](std::uint32_t, const KeyMap& d) { return all_keys(d); }));
}

PairStream cross_source_pairs(const Corpus& corpus) {
  const auto sources = source_index(corpus);
  std::vector<Eligible> eligible;
  for (const auto& r : corpus.records()) {
    if (r.word_count >= 1) eligible.push_back({&r, sources.at(r.source)});
  }
  return PairStream(build_plan(Strategy::cross_source, std::move(eligible), all_other_keys));
}

PairStream length_diff_pairs(const Corpus& corpus, const PairingConfig& config) {
  std::vector<Eligible> eligible;
  for (const auto& r : corpus.records()) {
    if (r.word_count >= 1) eligible.push_back({&r, narrow_count(r.word_count)});
  }
  const std::uint64_t delta = config.delta;
  return PairStream(build_plan(
      Strategy::length_diff, std::move(eligible), [delta](std::uint32_t w, const KeyMap& d) {
        std::vector<std::uint32_t> keys;
        const std::uint64_t lo = w > delta ? w - delta : 0;
        for (auto it = d.lower_bound(static_cast<std::uint32_t>(lo));
             it != d.end() && it->first <= w + delta; ++it) {
          keys.push_back(it->first);
        }
        return keys;
      }));
}

PairStream mode_window_pairs(const Corpus& corpus, const PairingConfig& config) {
  const std::size_t mu = mode_word_count(corpus);
  const auto sources = source_index(corpus);
  std::vector<Eligible> eligible;
  for (const auto& r : corpus.records()) {
    if (r.word_count == 0) continue;
    const std::size_t gap = r.word_count > mu ? r.word_count - mu : mu - r.word_count;
    if (gap <= config.lambda) eligible.push_back({&r, sources.at(r.source)});
  }
  // All in-window records are mutually compatible by count; groups are
  // sources so that same-source pairs are never merged.
  return PairStream(build_plan(Strategy::mode_window, std::move(eligible), all_other_keys));
}

PairStream short_title_pairs(const Corpus& corpus, const PairingConfig& config) {
  std::vector<Eligible> eligible;
  for (const auto& r : corpus.records()) {
    if (r.word_count >= 1 && r.word_count <= config.tau) eligible.push_back({&r, 0});
  }
  return PairStream(build_plan(Strategy::short_titles, std::move(eligible),
                               [](std::uint32_t, const KeyMap& d) { return all_keys(d); }));
}

PairStream generate(const Corpus& corpus, const PairingConfig& config) {
  switch (config.strategy) {
    case Strategy::complete: return complete_pairs(corpus);
    case Strategy::cross_source: return cross_source_pairs(corpus);
    case Strategy::length_diff: return length_diff_pairs(corpus, config);
    case Strategy::mode_window: return mode_window_pairs(corpus, config);
    case Strategy::short_titles: return short_title_pairs(corpus, config);
  }
  throw Error(Errc::invalid_argument, "unknown pairing strategy");
}

void write_pairs_header(std::ostream& out) {
  csv::write_row(out, {"left_id", "right_id", "strategy"});
}

void write_pair_row(std::ostream& out, const CandidatePair& pair) {
  csv::write_row(out, {pair.left_id, pair.right_id, to_string(pair.strategy)});
}

void write_pairs_csv(std::ostream& out, std::span<const CandidatePair> pairs) {
  write_pairs_header(out);
  for (const auto& p : pairs) write_pair_row(out, p);
}

std::vector<CandidatePair> read_pairs_csv(std::istream& in, std::string_view origin) {
  std::vector<CandidatePair> pairs;
  csv::Reader reader(in, std::string(origin));
  csv::Row row;
  if (!reader.next(row)) return pairs;
  const csv::Header header(row);
  const std::size_t left_col = header.require("left_id", origin);
  const std::size_t right_col = header.require("right_id", origin);
  const std::size_t strategy_col = header.require("strategy", origin);
  const std::size_t needed = std::max({left_col, right_col, strategy_col}) + 1;
  while (reader.next(row)) {
    const std::string at = std::string(origin) + ":" + std::to_string(reader.line());
    if (row.size() < needed) throw Error(Errc::malformed_record, at + ": too few fields");
    auto strategy = parse_strategy(row[strategy_col]);
    if (!strategy) {
      throw Error(Errc::malformed_record, at + ": unknown strategy '" + row[strategy_col] + "'");
    }
    if (!(row[left_col] < row[right_col])) {
      throw Error(Errc::malformed_record, at + ": pair (" + row[left_col] + ", " +
                                              row[right_col] + ") is not in canonical order");
    }
    pairs.push_back(CandidatePair{std::move(row[left_col]), std::move(row[right_col]), *strategy});
  }
  return pairs;
}

}  // namespace titledup
