#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "titledup/language.hpp"

namespace titledup {

struct TitleRecord {
  std::string id;
  std::string raw_title;
  std::string normalized;
  std::vector<std::string> tokens;
  std::size_t word_count = 0;
  std::string source;
};

/// Builds a record, deriving the normalized form, tokens and word count.
TitleRecord make_record(std::string id, std::string raw_title, std::string source);

std::string detect_language(const TitleRecord& record,
                            const LanguageDetector& detector = default_language_detector());

/// Immutable collection of records with unique ids.
class Corpus {
 public:
  Corpus() = default;
  /// Throws Error(duplicate_id) naming the first repeated id.
  explicit Corpus(std::vector<TitleRecord> records);

  const std::vector<TitleRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  const TitleRecord* find(std::string_view id) const;
  /// Throws Error(unknown_id).
  const TitleRecord& at(std::string_view id) const;

  const std::set<std::string>& sources() const noexcept { return sources_; }
  const std::map<std::size_t, std::size_t>& word_count_histogram() const noexcept {
    return histogram_;
  }

 private:
  std::vector<TitleRecord> records_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::set<std::string> sources_;
  std::map<std::size_t, std::size_t> histogram_;
};

enum class CorpusFormat { csv, jsonl };

std::optional<CorpusFormat> parse_corpus_format(std::string_view name);
/// `.jsonl` selects JSONL, everything else CSV.
CorpusFormat corpus_format_for(const std::filesystem::path& path);

struct LoadOptions {
  /// Drop records whose detected language differs from this code, keeping
  /// "unknown" ones.
  std::optional<std::string> language_filter;
  /// Defaults to default_language_detector().
  const LanguageDetector* detector = nullptr;
};

/// Errors: malformed_record, duplicate_id, io_failure.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   const LoadOptions& options = {});
Corpus read_corpus(std::istream& in, CorpusFormat format, std::string_view origin,
                   const LoadOptions& options = {});

/// Writes `id,title,source,normalized,word_count,language`. The first three
/// columns are the input schema, so the output can be loaded again.
void write_corpus_csv(std::ostream& out, const Corpus& corpus,
                      const LanguageDetector& detector = default_language_detector());

/// Most frequent word count; ties go to the smallest count.
/// Throws Error(empty_corpus).
std::size_t mode_word_count(const Corpus& corpus);

}  // namespace titledup
