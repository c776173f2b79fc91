#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace titledup {

inline constexpr std::string_view kUnknownLanguage = "unknown";

/// Pluggable language guesser over normalized tokens. Returns an ISO-639-1
/// code or kUnknownLanguage.
class LanguageDetector {
 public:
  virtual ~LanguageDetector() = default;
  virtual std::string detect(std::span<const std::string> tokens) const = 0;
};

/// Stopword-ratio heuristic over built-in lists for en, es, fr, de.
///
/// Each language scores the fraction of tokens found in its stopword list and
/// the highest score wins. Titles with four or more tokens are "unknown" when
/// every score is zero. Shorter titles are "unknown" unless every token is a
/// stopword of the winning language. A tie for the highest score is
/// "unknown".
class StopwordDetector final : public LanguageDetector {
 public:
  std::string detect(std::span<const std::string> tokens) const override;

  static constexpr std::size_t kMinTokensForRatio = 4;
};

const LanguageDetector& default_language_detector();

/// Languages shipped with StopwordDetector, in scoring order.
std::span<const std::string_view> stopword_languages();

/// Built-in stopword list for `lang`; empty for unsupported codes.
std::span<const std::string_view> stopwords(std::string_view lang);

}  // namespace titledup
