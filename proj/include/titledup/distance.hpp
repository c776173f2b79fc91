#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "titledup/corpus.hpp"
#include "titledup/embedding.hpp"
#include "titledup/error.hpp"
#include "titledup/pairing.hpp"

namespace titledup {

/// Exact edit distance over Unicode scalar values. Uses a bit-parallel
/// kernel when the shorter string (after trimming a common prefix and
/// suffix) fits in 64 code points, and a two-row DP otherwise.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);
/// UTF-8 convenience overload.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// levenshtein / max length, 0 when both are empty.
double levenshtein_normalized(std::u32string_view a, std::u32string_view b);
double levenshtein_normalized(std::string_view a, std::string_view b);

/// Per-token occurrence counts of `tokens` over `vocab`, which must be sorted
/// and contain every token (throws Error(invalid_argument) otherwise).
std::vector<std::uint32_t> token_count_vector(std::span<const std::string> tokens,
                                              std::span<const std::string> vocab);

/// Sorted union of both token lists.
std::vector<std::string> pair_vocabulary(std::span<const std::string> a,
                                         std::span<const std::string> b);

template <typename T>
  requires std::is_arithmetic_v<T>
double cosine_similarity(std::span<const T> v1, std::span<const T> v2) {
  if (v1.size() != v2.size()) {
    throw Error(Errc::invalid_argument, "cosine_similarity: dimension mismatch (" +
                                            std::to_string(v1.size()) + " vs " +
                                            std::to_string(v2.size()) + ")");
  }
  double dot = 0.0, n1 = 0.0, n2 = 0.0;
  for (std::size_t i = 0; i < v1.size(); ++i) {
    const double x = static_cast<double>(v1[i]);
    const double y = static_cast<double>(v2[i]);
    dot += x * y;
    n1 += x * x;
    n2 += y * y;
  }
  if (n1 == 0.0 || n2 == 0.0) {
    throw Error(Errc::zero_vector, "cosine_similarity: zero-norm vector");
  }
  return std::clamp(dot / (std::sqrt(n1) * std::sqrt(n2)), -1.0, 1.0);
}

template <typename T>
  requires std::is_arithmetic_v<T>
double cosine_similarity(const std::vector<T>& v1, const std::vector<T>& v2) {
  return cosine_similarity(std::span<const T>(v1), std::span<const T>(v2));
}

/// Bag-of-words cosine over raw token counts. Throws Error(zero_vector) when
/// either side has no tokens.
double token_cosine_similarity(std::span<const std::string> a, std::span<const std::string> b);

struct PairScores {
  std::string left_id;
  std::string right_id;
  std::size_t lev_raw = 0;
  double lev_norm = 0.0;
  double cosine_sim = 0.0;
  double cosine_dist = 0.0;
  std::optional<double> embed_sim;
  std::optional<double> embed_dist;
};

/// Scores one pair over normalized titles. Errors: unknown_id,
/// missing_embedding (store given but an id is absent), zero_vector.
PairScores score_pair(const CandidatePair& pair, const Corpus& corpus,
                      const EmbeddingStore* embeddings = nullptr);

/// Batch scoring with per-record caches, split across `threads` workers
/// (0 = hardware concurrency). Output order matches `pairs`.
std::vector<PairScores> score_pairs(std::span<const CandidatePair> pairs, const Corpus& corpus,
                                    const EmbeddingStore* embeddings = nullptr,
                                    unsigned threads = 0);

/// Reals are written with 9 significant digits; embed columns are empty when
/// absent.
void write_scores_csv(std::ostream& out, std::span<const PairScores> scores);
std::vector<PairScores> read_scores_csv(std::istream& in, std::string_view origin);

/// "%.9g"
std::string format_real(double value);

}  // namespace titledup
