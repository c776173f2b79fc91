#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "titledup/corpus.hpp"
#include "titledup/embedding.hpp"

namespace titledup::testing {

/// Directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

/// Lowercase pseudo-word of 3..9 letters.
std::string random_word(std::mt19937_64& rng);

/// Corpus of random titles with word counts in [min_words, max_words] spread
/// over `sources` tags ("S0", "S1", ...). Ids are zero-padded "r00042".
Corpus random_corpus(std::size_t n, std::size_t sources, std::size_t min_words,
                     std::size_t max_words, std::uint64_t seed);

struct SyntheticCorpus {
  Corpus corpus;
  /// Canonical id pairs of the injected near-duplicates.
  std::set<std::pair<std::string, std::string>> injected;
};

/// `total` distinct random titles across `sources` sources, of which
/// `duplicates` are copies of another title with 1-2 letter substitutions,
/// placed in a different source. Every title is at least 11 characters.
SyntheticCorpus synthetic_with_duplicates(std::size_t total, std::size_t sources,
                                          std::size_t duplicates, std::uint64_t seed);

/// Random unit-norm vectors for every record in `corpus`.
EmbeddingStore random_unit_embeddings(const Corpus& corpus, std::uint32_t dimension,
                                      std::uint64_t seed);

/// Writes `corpus` in the input schema (id,title,source).
void write_input_csv(const std::filesystem::path& path, const Corpus& corpus);

}  // namespace titledup::testing
