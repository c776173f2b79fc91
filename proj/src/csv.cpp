#include "titledup/csv.hpp"

#include "titledup/error.hpp"

namespace titledup::csv {

Reader::Reader(std::istream& in, std::string origin) : in_(in), origin_(std::move(origin)) {}

bool Reader::next(Row& row) {
  row.clear();
  std::string line;
  while (true) {
    if (!std::getline(in_, line)) return false;
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) break;
  }
  record_line_ = line_;

  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i == line.size()) {
      if (!quoted) break;
      // Quoted field continues on the next physical line.
      std::string more;
      if (!std::getline(in_, more)) {
        throw Error(Errc::malformed_record, origin_ + ":" + std::to_string(record_line_) +
                                                ": unterminated quoted field");
      }
      ++line_;
      if (!more.empty() && more.back() == '\r') more.pop_back();
      field.push_back('\n');
      line = std::move(more);
      i = 0;
      continue;
    }
    const char c = line[i++];
    if (quoted) {
      if (c == '"') {
        if (i < line.size() && line[i] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  row.push_back(std::move(field));
  return true;
}

Header::Header(const Row& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::string name = names[i];
    // Tolerate a UTF-8 byte-order mark on the first column.
    if (i == 0 && name.starts_with("\xEF\xBB\xBF")) name.erase(0, 3);
    index_.emplace(std::move(name), i);
  }
}

std::size_t Header::require(std::string_view name, std::string_view origin) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    throw Error(Errc::malformed_record,
                std::string(origin) + ": header lacks column '" + std::string(name) + "'");
  }
  return it->second;
}

bool Header::contains(std::string_view name) const {
  return index_.contains(std::string(name));
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, std::span<const std::string_view> fields) {
  bool first = true;
  for (auto field : fields) {
    if (!first) out << ',';
    first = false;
    out << escape(field);
  }
  out << '\n';
}

void write_row(std::ostream& out, std::initializer_list<std::string_view> fields) {
  write_row(out, std::span<const std::string_view>(fields.begin(), fields.size()));
}

}  // namespace titledup::csv
