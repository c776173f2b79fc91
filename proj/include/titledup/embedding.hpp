#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace titledup {

/// Id-keyed fixed-dimension float vectors, immutable once built.
///
/// On disk (DFV1, all integers little-endian u32):
///   "DFV1" | dimension | count | name_len | model name (UTF-8)
///   then `count` entries sorted by id bytes:
///   id_len | id (UTF-8) | dimension x IEEE-754 binary32 (little-endian)
class EmbeddingStore {
 public:
  using VectorMap = std::map<std::string, std::vector<float>, std::less<>>;

  EmbeddingStore() = default;

  /// Validates every vector: length == dimension, finite, not all-zero.
  /// Errors: dimension_mismatch, zero_vector, non_finite_value.
  EmbeddingStore(std::uint32_t dimension, std::string model_name, VectorMap vectors);

  std::uint32_t dimension() const noexcept { return dimension_; }
  const std::string& model_name() const noexcept { return model_name_; }
  std::size_t size() const noexcept { return vectors_.size(); }
  bool contains(std::string_view id) const { return vectors_.find(id) != vectors_.end(); }

  /// Empty span when absent.
  std::span<const float> find(std::string_view id) const;
  const VectorMap& vectors() const noexcept { return vectors_; }

 private:
  std::uint32_t dimension_ = 0;
  std::string model_name_;
  VectorMap vectors_;
};

inline constexpr std::string_view kVectorFileMagic = "DFV1";

/// Errors: bad_magic, dimension_mismatch, zero_vector, duplicate_id,
/// truncated_file, trailing_data, non_finite_value, io_failure.
EmbeddingStore load_embeddings(const std::filesystem::path& path);
EmbeddingStore parse_embeddings(std::string_view bytes, std::string_view origin);

/// Canonical DFV1 bytes (entries in id order).
std::string serialize_embeddings(const EmbeddingStore& store);
void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& path);

/// Cosine of the two stored vectors, clamped to [-1, 1].
/// Throws Error(missing_embedding).
double embed_similarity(const EmbeddingStore& store, std::string_view id1, std::string_view id2);

/// Maps a similarity in [-1, 1] to a distance in [0, 1].
double embed_distance(double similarity) noexcept;

}  // namespace titledup
