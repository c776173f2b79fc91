#include "titledup/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include "titledup/error.hpp"

namespace titledup {

EmbeddingStore::EmbeddingStore(std::uint32_t dimension, std::string model_name,
                               VectorMap vectors)
    : dimension_(dimension), model_name_(std::move(model_name)), vectors_(std::move(vectors)) {
  if (dimension_ == 0) throw Error(Errc::dimension_mismatch, "dimension must be positive");
  for (const auto& [id, v] : vectors_) {
    if (v.size() != dimension_) {
      throw Error(Errc::dimension_mismatch, "vector '" + id + "' has " + std::to_string(v.size()) +
                                                " components, expected " +
                                                std::to_string(dimension_));
    }
    if (!std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); })) {
      throw Error(Errc::non_finite_value, "vector '" + id + "' has a non-finite component");
    }
    if (std::all_of(v.begin(), v.end(), [](float x) { return x == 0.0f; })) {
      throw Error(Errc::zero_vector, "vector '" + id + "' is all zeros");
    }
  }
}

std::span<const float> EmbeddingStore::find(std::string_view id) const {
  auto it = vectors_.find(id);
  if (it == vectors_.end()) return {};
  return it->second;
}

namespace {

class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::string_view origin) : bytes_(bytes), origin_(origin) {}

  std::uint32_t u32(std::string_view what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
      v = (v << 8) | static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)]);
    }
    pos_ += 4;
    return v;
  }

  float f32(std::string_view what) { return std::bit_cast<float>(u32(what)); }

  std::string_view take(std::size_t n, std::string_view what) {
    need(n, what);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, std::string_view what) const {
    if (remaining() < n) {
      throw Error(Errc::truncated_file, std::string(origin_) + ": file ends inside " +
                                            std::string(what) + " at byte " +
                                            std::to_string(pos_));
    }
  }

  std::string_view bytes_;
  std::string_view origin_;
  std::size_t pos_ = 0;
};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t checked_u32(std::size_t n, std::string_view what) {
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(Errc::invalid_argument, std::string(what) + " exceeds 2^32-1 bytes");
  }
  return static_cast<std::uint32_t>(n);
}

}  // namespace

EmbeddingStore parse_embeddings(std::string_view bytes, std::string_view origin) {
  ByteReader in(bytes, origin);
  if (bytes.size() < kVectorFileMagic.size() ||
      bytes.substr(0, kVectorFileMagic.size()) != kVectorFileMagic) {
    throw Error(Errc::bad_magic, std::string(origin) + ": not a DFV1 vector file");
  }
  in.take(kVectorFileMagic.size(), "magic");
  const std::uint32_t dimension = in.u32("header");
  const std::uint32_t count = in.u32("header");
  const std::uint32_t name_len = in.u32("header");
  std::string model(in.take(name_len, "model name"));
  if (dimension == 0) {
    throw Error(Errc::dimension_mismatch, std::string(origin) + ": dimension is 0");
  }

  EmbeddingStore::VectorMap vectors;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t id_len = in.u32("entry id length");
    std::string id(in.take(id_len, "entry id"));
    std::vector<float> v(dimension);
    for (auto& x : v) x = in.f32("vector '" + id + "'");
    if (vectors.contains(id)) {
      throw Error(Errc::duplicate_id, std::string(origin) + ": duplicate vector id '" + id + "'");
    }
    vectors.emplace(std::move(id), std::move(v));
  }
  if (in.remaining() != 0) {
    throw Error(Errc::trailing_data, std::string(origin) + ": " + std::to_string(in.remaining()) +
                                         " bytes after the last entry");
  }
  try {
    return EmbeddingStore(dimension, std::move(model), std::move(vectors));
  } catch (const Error& e) {
    throw Error(e.code(), std::string(origin) + ": " + e.what());
  }
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_failure, "cannot open '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::io_failure, "read error on '" + path.string() + "'");
  return parse_embeddings(bytes, path.string());
}

std::string serialize_embeddings(const EmbeddingStore& store) {
  std::string out(kVectorFileMagic);
  put_u32(out, store.dimension());
  put_u32(out, checked_u32(store.size(), "vector count"));
  put_u32(out, checked_u32(store.model_name().size(), "model name"));
  out += store.model_name();
  for (const auto& [id, v] : store.vectors()) {
    put_u32(out, checked_u32(id.size(), "id"));
    out += id;
    for (float x : v) put_u32(out, std::bit_cast<std::uint32_t>(x));
  }
  return out;
}

void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& path) {
  const std::string bytes = serialize_embeddings(store);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io_failure, "cannot write '" + path.string() + "'");
}

double embed_similarity(const EmbeddingStore& store, std::string_view id1, std::string_view id2) {
  const auto a = store.find(id1);
  const auto b = store.find(id2);
  if (a.empty() || b.empty()) {
    throw Error(Errc::missing_embedding,
                "no embedding for record '" + std::string(a.empty() ? id1 : id2) + "'");
  }
  // Summation order fixed so (a, b) and (b, a) give identical bits.
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i];
    const double y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  const double lo = std::min(na, nb);
  const double hi = std::max(na, nb);
  return std::clamp(dot / (std::sqrt(lo) * std::sqrt(hi)), -1.0, 1.0);
}

double embed_distance(double similarity) noexcept {
  return std::clamp((1.0 - similarity) / 2.0, 0.0, 1.0);
}

}  // namespace titledup
