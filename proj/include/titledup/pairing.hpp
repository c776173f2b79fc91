#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <iterator>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "titledup/corpus.hpp"

namespace titledup {

enum class Strategy { complete, cross_source, length_diff, mode_window, short_titles };

/// CLI / file spelling: "complete", "cross-source", "length-diff",
/// "mode-window", "short-titles".
std::string_view to_string(Strategy strategy) noexcept;
/// Accepts the hyphenated and the underscored spellings.
std::optional<Strategy> parse_strategy(std::string_view name);

struct PairingConfig {
  std::size_t delta = 5;   // max word-count difference (length-diff)
  std::size_t lambda = 2;  // half-width of the window around the mode (mode-window)
  std::size_t tau = 3;     // max word count of a short title (short-titles)
  Strategy strategy = Strategy::complete;
};

/// Unordered record pair in canonical form: left_id < right_id bytewise.
struct CandidatePair {
  std::string left_id;
  std::string right_id;
  Strategy strategy = Strategy::complete;

  /// Orders and compares by (left_id, right_id); strategy is provenance only.
  friend std::strong_ordering operator<=>(const CandidatePair& a, const CandidatePair& b) {
    if (auto c = a.left_id <=> b.left_id; c != 0) return c;
    return a.right_id <=> b.right_id;
  }
  friend bool operator==(const CandidatePair& a, const CandidatePair& b) {
    return a.left_id == b.left_id && a.right_id == b.right_id;
  }
};

/// Canonicalizes (a, b). Throws Error(invalid_argument) when a == b.
CandidatePair make_candidate(std::string a, std::string b, Strategy strategy);

/// Pull-based pair stream in canonical (left_id, right_id) order.
///
/// Eligible records are sorted by id and grouped into buckets. For each left
/// record the stream merges the compatible buckets from just past the left
/// position, so the work done is proportional to the pairs emitted rather
/// than to n^2. The stream owns a copy of what it needs and does not
/// reference the corpus after construction.
class PairStream {
 public:
  struct Plan;

  explicit PairStream(std::shared_ptr<const Plan> plan);

  std::optional<CandidatePair> next();
  Strategy strategy() const noexcept;

  /// Drains the remaining pairs.
  std::vector<CandidatePair> collect();
  std::uint64_t count();

  class iterator {
   public:
    using value_type = CandidatePair;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    explicit iterator(PairStream* stream) : stream_(stream) { ++*this; }

    const CandidatePair& operator*() const { return *current_; }
    const CandidatePair* operator->() const { return &*current_; }
    iterator& operator++() {
      current_ = stream_->next();
      return *this;
    }
    void operator++(int) { ++*this; }
    friend bool operator==(const iterator& it, std::default_sentinel_t) {
      return !it.current_.has_value();
    }

   private:
    PairStream* stream_ = nullptr;
    std::optional<CandidatePair> current_;
  };

  iterator begin() { return iterator(this); }
  std::default_sentinel_t end() const noexcept { return {}; }

 private:
  struct Cursor {
    std::uint32_t bucket;
    std::uint32_t offset;
  };

  void load_cursors();

  std::shared_ptr<const Plan> plan_;
  std::size_t left_ = 0;
  bool loaded_ = false;
  std::vector<Cursor> heap_;
};

PairStream complete_pairs(const Corpus& corpus);
PairStream cross_source_pairs(const Corpus& corpus);
PairStream length_diff_pairs(const Corpus& corpus, const PairingConfig& config);
/// Throws Error(empty_corpus).
PairStream mode_window_pairs(const Corpus& corpus, const PairingConfig& config);
PairStream short_title_pairs(const Corpus& corpus, const PairingConfig& config);

/// Dispatches on config.strategy.
PairStream generate(const Corpus& corpus, const PairingConfig& config);

/// n(n-1)/2
constexpr std::uint64_t complete_pair_count(std::uint64_t n) noexcept {
  return n < 2 ? 0 : n * (n - 1) / 2;
}

/// `left_id,right_id,strategy`
void write_pairs_header(std::ostream& out);
void write_pair_row(std::ostream& out, const CandidatePair& pair);
void write_pairs_csv(std::ostream& out, std::span<const CandidatePair> pairs);
/// Throws Error(malformed_record) on bad rows, unknown strategies or
/// non-canonical keys.
std::vector<CandidatePair> read_pairs_csv(std::istream& in, std::string_view origin);

}  // namespace titledup
