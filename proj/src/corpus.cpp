#include "titledup/corpus.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "titledup/csv.hpp"
#include "titledup/error.hpp"
#include "titledup/text.hpp"

namespace titledup {

TitleRecord make_record(std::string id, std::string raw_title, std::string source) {
  TitleRecord r;
  r.id = std::move(id);
  r.raw_title = std::move(raw_title);
  r.normalized = normalize_title(r.raw_title);
  r.tokens = tokenize(r.normalized);
  r.word_count = r.tokens.size();
  r.source = std::move(source);
  return r;
}

std::string detect_language(const TitleRecord& record, const LanguageDetector& detector) {
  return detector.detect(record.tokens);
}

Corpus::Corpus(std::vector<TitleRecord> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (!by_id_.emplace(r.id, i).second) {
      throw Error(Errc::duplicate_id, "duplicate record id '" + r.id + "'");
    }
    sources_.insert(r.source);
    ++histogram_[r.word_count];
  }
}

const TitleRecord* Corpus::find(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

const TitleRecord& Corpus::at(std::string_view id) const {
  if (const auto* r = find(id)) return *r;
  throw Error(Errc::unknown_id, "no record with id '" + std::string(id) + "'");
}

std::optional<CorpusFormat> parse_corpus_format(std::string_view name) {
  if (name == "csv") return CorpusFormat::csv;
  if (name == "jsonl") return CorpusFormat::jsonl;
  return std::nullopt;
}

CorpusFormat corpus_format_for(const std::filesystem::path& path) {
  return path.extension() == ".jsonl" ? CorpusFormat::jsonl : CorpusFormat::csv;
}

namespace {

std::string where(std::string_view origin, std::size_t line) {
  return std::string(origin) + ":" + std::to_string(line);
}

void read_csv_records(std::istream& in, std::string_view origin,
                      std::vector<TitleRecord>& out) {
  csv::Reader reader(in, std::string(origin));
  csv::Row row;
  if (!reader.next(row)) return;  // empty file, no header
  const csv::Header header(row);
  const std::size_t id_col = header.require("id", origin);
  const std::size_t title_col = header.require("title", origin);
  const std::size_t source_col = header.require("source", origin);
  const std::size_t needed = std::max({id_col, title_col, source_col}) + 1;

  while (reader.next(row)) {
    if (row.size() < needed) {
      throw Error(Errc::malformed_record, where(origin, reader.line()) + ": expected at least " +
                                              std::to_string(needed) + " fields, got " +
                                              std::to_string(row.size()));
    }
    if (row[id_col].empty()) {
      throw Error(Errc::malformed_record, where(origin, reader.line()) + ": empty id");
    }
    out.push_back(make_record(std::move(row[id_col]), std::move(row[title_col]),
                              std::move(row[source_col])));
  }
}

void read_jsonl_records(std::istream& in, std::string_view origin,
                        std::vector<TitleRecord>& out) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::malformed_record, where(origin, line_no) + ": " + e.what());
    }
    if (!obj.is_object()) {
      throw Error(Errc::malformed_record, where(origin, line_no) + ": not a JSON object");
    }
    auto field = [&](const char* name) -> std::string {
      auto it = obj.find(name);
      if (it == obj.end() || !it->is_string()) {
        throw Error(Errc::malformed_record, where(origin, line_no) + ": missing string field '" +
                                                name + "'");
      }
      return it->get<std::string>();
    };
    std::string id = field("id");
    if (id.empty()) throw Error(Errc::malformed_record, where(origin, line_no) + ": empty id");
    std::string title = field("title");
    std::string source = field("source");
    out.push_back(make_record(std::move(id), std::move(title), std::move(source)));
  }
}

}  // namespace

Corpus read_corpus(std::istream& in, CorpusFormat format, std::string_view origin,
                   const LoadOptions& options) {
  std::vector<TitleRecord> records;
  if (format == CorpusFormat::csv) {
    read_csv_records(in, origin, records);
  } else {
    read_jsonl_records(in, origin, records);
  }
  if (in.bad()) throw Error(Errc::io_failure, std::string(origin) + ": read error");

  if (options.language_filter) {
    const LanguageDetector& detector =
        options.detector ? *options.detector : default_language_detector();
    std::erase_if(records, [&](const TitleRecord& r) {
      const std::string lang = detector.detect(r.tokens);
      return lang != kUnknownLanguage && lang != *options.language_filter;
    });
  }
  try {
    return Corpus(std::move(records));
  } catch (const Error& e) {
    throw Error(e.code(), std::string(origin) + ": " + e.what());
  }
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_failure, "cannot open '" + path.string() + "'");
  return read_corpus(in, format, path.string(), options);
}

void write_corpus_csv(std::ostream& out, const Corpus& corpus, const LanguageDetector& detector) {
  csv::write_row(out, {"id", "title", "source", "normalized", "word_count", "language"});
  for (const auto& r : corpus.records()) {
    const std::string count = std::to_string(r.word_count);
    const std::string lang = detector.detect(r.tokens);
    csv::write_row(out, {r.id, r.raw_title, r.source, r.normalized, count, lang});
  }
}

std::size_t mode_word_count(const Corpus& corpus) {
  if (corpus.empty()) throw Error(Errc::empty_corpus, "mode_word_count on an empty corpus");
  std::size_t best_count = 0;
  std::size_t best_freq = 0;
  // Ascending keys; strict > keeps the smallest count on ties.
  for (const auto& [count, freq] : corpus.word_count_histogram()) {
    if (freq > best_freq) {
      best_count = count;
      best_freq = freq;
    }
  }
  return best_count;
}

}  // namespace titledup
