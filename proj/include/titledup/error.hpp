#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace titledup {

/// Failure categories surfaced by the library. The CLI maps every one of
/// these to exit code 2 (data/validation error).
enum class Errc {
  io_failure,
  malformed_record,
  duplicate_id,
  empty_corpus,
  unknown_id,
  zero_vector,
  missing_embedding,
  bad_magic,
  dimension_mismatch,
  truncated_file,
  trailing_data,
  non_finite_value,
  missing_measure,
  no_overlap,
  degenerate_variance,
  unknown_pair,
  invalid_verdict,
  invalid_argument,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace titledup
