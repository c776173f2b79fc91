#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace titledup {

/// NFC, lowercase, every non-alphanumeric character mapped to a space,
/// whitespace collapsed and trimmed. Idempotent.
std::string normalize_title(std::string_view raw);

/// Splits an already normalized title on single spaces.
std::vector<std::string> tokenize(std::string_view normalized);

/// Decodes UTF-8 into Unicode scalar values; ill-formed sequences become U+FFFD.
std::u32string to_code_points(std::string_view utf8);

}  // namespace titledup
