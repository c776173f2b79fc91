#include "titledup/language.hpp"

#include <algorithm>
#include <array>

namespace titledup {
namespace {

constexpr auto kEnglish = std::to_array<std::string_view>({
    "a",     "about", "after", "against", "all",   "among", "an",    "and",   "are",  "as",
    "at",    "be",    "before", "between", "both", "but",   "by",    "can",   "do",   "does",
    "during", "for",  "from",  "has",     "have",  "how",   "if",    "in",    "into", "is",
    "it",    "its",   "more",  "new",     "not",   "of",    "on",    "or",    "our",  "over",
    "should", "than", "that",  "the",     "their", "there", "these", "this",  "through",
    "to",    "under", "was",   "we",      "were",  "what",  "when",  "where", "which", "who",
    "why",   "will",  "with",  "within",  "without", "you",
});

constexpr auto kSpanish = std::to_array<std::string_view>({
    "a",     "al",    "ante",  "como",  "con",   "contra", "cual",  "de",    "del",   "desde",
    "donde", "el",    "en",    "entre", "es",    "esta",  "este",  "hacia", "hasta", "la",
    "las",   "lo",    "los",   "más",   "no",    "o",     "para",  "pero",  "por",   "que",
    "se",    "sin",   "sobre", "su",    "sus",   "tras",  "un",    "una",   "unas",  "uno",
    "unos",  "y",
});

constexpr auto kFrench = std::to_array<std::string_view>({
    "à",     "au",    "aux",   "avec",  "ce",    "ces",   "comme", "dans",  "de",    "des",
    "du",    "elle",  "en",    "entre", "est",   "et",    "il",    "la",    "le",    "les",
    "leur",  "leurs", "mais",  "ne",    "ou",    "où",    "par",   "pas",   "pour",  "qu",
    "que",   "qui",   "sa",    "sans",  "se",    "ses",   "son",   "sont",  "sur",   "un",
    "une",
});

constexpr auto kGerman = std::to_array<std::string_view>({
    "am",    "an",    "auf",   "aus",   "bei",   "das",   "dem",   "den",   "der",   "des",
    "die",   "durch", "ein",   "eine",  "einem", "einen", "einer", "eines", "für",   "im",
    "in",    "ist",   "mit",   "nach",  "nicht", "oder",  "über",  "um",    "und",   "unter",
    "vom",   "von",   "vor",   "während", "wie", "zu",    "zum",   "zur",   "zwischen",
});

constexpr auto kLanguages = std::to_array<std::string_view>({"en", "es", "fr", "de"});

std::span<const std::string_view> list_for(std::size_t index) {
  switch (index) {
    case 0: return kEnglish;
    case 1: return kSpanish;
    case 2: return kFrench;
    case 3: return kGerman;
    default: return {};
  }
}

bool contains(std::span<const std::string_view> list, std::string_view token) {
  return std::find(list.begin(), list.end(), token) != list.end();
}

}  // namespace

std::span<const std::string_view> stopword_languages() { return kLanguages; }

std::span<const std::string_view> stopwords(std::string_view lang) {
  for (std::size_t i = 0; i < kLanguages.size(); ++i) {
    if (kLanguages[i] == lang) return list_for(i);
  }
  return {};
}

std::string StopwordDetector::detect(std::span<const std::string> tokens) const {
  if (tokens.empty()) return std::string(kUnknownLanguage);

  std::array<std::size_t, kLanguages.size()> hits{};
  for (std::size_t lang = 0; lang < kLanguages.size(); ++lang) {
    const auto list = list_for(lang);
    hits[lang] = static_cast<std::size_t>(std::count_if(
        tokens.begin(), tokens.end(), [&](const std::string& t) { return contains(list, t); }));
  }

  // Equal denominators, so comparing hit counts compares ratios.
  const std::size_t best = *std::max_element(hits.begin(), hits.end());
  if (best == 0) return std::string(kUnknownLanguage);
  if (tokens.size() < kMinTokensForRatio && best != tokens.size()) {
    return std::string(kUnknownLanguage);
  }
  if (std::count(hits.begin(), hits.end(), best) > 1) return std::string(kUnknownLanguage);
  const auto winner = static_cast<std::size_t>(
      std::find(hits.begin(), hits.end(), best) - hits.begin());
  return std::string(kLanguages[winner]);
}

const LanguageDetector& default_language_detector() {
  static const StopwordDetector detector;
  return detector;
}

}  // namespace titledup
