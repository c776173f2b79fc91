#pragma once

#include <cstddef>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

// Minimal RFC-4180 reader/writer. Fields are quoted on output only when they
// contain a comma, quote, CR or LF, so well-formed files round-trip.
namespace titledup::csv {

using Row = std::vector<std::string>;

class Reader {
 public:
  /// `origin` names the input in error messages (usually the file path).
  Reader(std::istream& in, std::string origin);

  /// Reads the next record. Blank lines are skipped. Returns false at EOF.
  /// Throws Error(malformed_record) on an unterminated quoted field.
  bool next(Row& row);

  /// 1-based physical line on which the last returned record started.
  std::size_t line() const noexcept { return record_line_; }
  const std::string& origin() const noexcept { return origin_; }

 private:
  std::istream& in_;
  std::string origin_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

/// Column lookup over a header row.
class Header {
 public:
  Header() = default;
  explicit Header(const Row& names);

  /// Index of `name`, or throws Error(malformed_record) naming `origin`.
  std::size_t require(std::string_view name, std::string_view origin) const;
  bool contains(std::string_view name) const;

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

std::string escape(std::string_view field);

void write_row(std::ostream& out, std::span<const std::string_view> fields);
void write_row(std::ostream& out, std::initializer_list<std::string_view> fields);

}  // namespace titledup::csv
