#include "titledup/error.hpp"

namespace titledup {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::io_failure: return "IoFailure";
    case Errc::malformed_record: return "MalformedRecord";
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::empty_corpus: return "EmptyCorpus";
    case Errc::unknown_id: return "UnknownId";
    case Errc::zero_vector: return "ZeroVector";
    case Errc::missing_embedding: return "MissingEmbedding";
    case Errc::bad_magic: return "BadMagic";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::truncated_file: return "TruncatedFile";
    case Errc::trailing_data: return "TrailingData";
    case Errc::non_finite_value: return "NonFiniteValue";
    case Errc::missing_measure: return "MissingMeasure";
    case Errc::no_overlap: return "NoOverlap";
    case Errc::degenerate_variance: return "DegenerateVariance";
    case Errc::unknown_pair: return "UnknownPair";
    case Errc::invalid_verdict: return "InvalidVerdict";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace titledup
