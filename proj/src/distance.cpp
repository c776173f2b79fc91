#include "titledup/distance.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <ostream>
#include <exception>
#include <thread>
#include <unordered_map>

#include "titledup/csv.hpp"
#include "titledup/text.hpp"

namespace titledup {
namespace {

// Match masks for a pattern of at most 64 code points.
class PatternMasks {
 public:
  explicit PatternMasks(std::u32string_view pattern) {
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      const std::uint64_t bit = std::uint64_t{1} << i;
      const char32_t c = pattern[i];
      if (c < ascii_.size()) {
        ascii_[c] |= bit;
        continue;
      }
      auto it = std::lower_bound(other_.begin(), other_.end(), c,
                                 [](const auto& e, char32_t v) { return e.first < v; });
      if (it != other_.end() && it->first == c) {
        it->second |= bit;
      } else {
        other_.insert(it, {c, bit});
      }
    }
  }

  std::uint64_t operator[](char32_t c) const {
    if (c < ascii_.size()) return ascii_[c];
    auto it = std::lower_bound(other_.begin(), other_.end(), c,
                               [](const auto& e, char32_t v) { return e.first < v; });
    return (it != other_.end() && it->first == c) ? it->second : 0;
  }

 private:
  std::array<std::uint64_t, 128> ascii_{};
  std::vector<std::pair<char32_t, std::uint64_t>> other_;
};

// Hyyrö's bit-parallel formulation of Myers' algorithm; `pattern` is the
// shorter string, 1..64 code points.
std::size_t levenshtein_bitparallel(std::u32string_view pattern, std::u32string_view text) {
  const PatternMasks masks(pattern);
  const std::size_t m = pattern.size();
  const std::uint64_t last = std::uint64_t{1} << (m - 1);
  std::uint64_t vp = m == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1;
  std::uint64_t vn = 0;
  std::size_t dist = m;
  for (char32_t c : text) {
    const std::uint64_t eq = masks[c];
    const std::uint64_t x = eq | vn;
    const std::uint64_t d0 = (((x & vp) + vp) ^ vp) | x;
    std::uint64_t hp = vn | ~(d0 | vp);
    std::uint64_t hn = vp & d0;
    if (hp & last) ++dist;
    if (hn & last) --dist;
    hp = (hp << 1) | 1;
    hn <<= 1;
    vp = hn | ~(d0 | hp);
    vn = hp & d0;
  }
  return dist;
}

std::size_t levenshtein_rows(std::u32string_view shorter, std::u32string_view longer) {
  std::vector<std::size_t> row(shorter.size() + 1);
  for (std::size_t i = 0; i <= shorter.size(); ++i) row[i] = i;
  for (std::size_t j = 1; j <= longer.size(); ++j) {
    std::size_t diag = row[0];
    row[0] = j;
    for (std::size_t i = 1; i <= shorter.size(); ++i) {
      const std::size_t up = row[i];
      const std::size_t cost = shorter[i - 1] == longer[j - 1] ? 0 : 1;
      row[i] = std::min({row[i - 1] + 1, up + 1, diag + cost});
      diag = up;
    }
  }
  return row[shorter.size()];
}

}  // namespace

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  while (!a.empty() && !b.empty() && a.front() == b.front()) {
    a.remove_prefix(1);
    b.remove_prefix(1);
  }
  while (!a.empty() && !b.empty() && a.back() == b.back()) {
    a.remove_suffix(1);
    b.remove_suffix(1);
  }
  if (a.size() > b.size()) std::swap(a, b);
  if (a.empty()) return b.size();
  if (a.size() <= 64) return levenshtein_bitparallel(a, b);
  return levenshtein_rows(a, b);
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(std::u32string_view(to_code_points(a)),
                     std::u32string_view(to_code_points(b)));
}

double levenshtein_normalized(std::u32string_view a, std::u32string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 0.0;
  return static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

double levenshtein_normalized(std::string_view a, std::string_view b) {
  const auto ca = to_code_points(a);
  const auto cb = to_code_points(b);
  return levenshtein_normalized(std::u32string_view(ca), std::u32string_view(cb));
}

std::vector<std::string> pair_vocabulary(std::span<const std::string> a,
                                         std::span<const std::string> b) {
  std::vector<std::string> vocab(a.begin(), a.end());
  vocab.insert(vocab.end(), b.begin(), b.end());
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  return vocab;
}

std::vector<std::uint32_t> token_count_vector(std::span<const std::string> tokens,
                                              std::span<const std::string> vocab) {
  std::vector<std::uint32_t> counts(vocab.size(), 0);
  for (const auto& t : tokens) {
    auto it = std::lower_bound(vocab.begin(), vocab.end(), t);
    if (it == vocab.end() || *it != t) {
      throw Error(Errc::invalid_argument, "token '" + t + "' missing from vocabulary");
    }
    ++counts[static_cast<std::size_t>(it - vocab.begin())];
  }
  return counts;
}

double token_cosine_similarity(std::span<const std::string> a, std::span<const std::string> b) {
  const auto vocab = pair_vocabulary(a, b);
  const auto va = token_count_vector(a, vocab);
  const auto vb = token_count_vector(b, vocab);
  return cosine_similarity(va, vb);
}

namespace {

struct CachedRecord {
  const TitleRecord* record = nullptr;
  std::u32string code_points;
};

PairScores score_cached(const CandidatePair& pair, const CachedRecord& left,
                        const CachedRecord& right, const EmbeddingStore* embeddings) {
  PairScores s;
  s.left_id = pair.left_id;
  s.right_id = pair.right_id;
  s.lev_raw = levenshtein(std::u32string_view(left.code_points),
                          std::u32string_view(right.code_points));
  const std::size_t longest = std::max(left.code_points.size(), right.code_points.size());
  s.lev_norm = longest == 0 ? 0.0 : static_cast<double>(s.lev_raw) / static_cast<double>(longest);
  try {
    s.cosine_sim = token_cosine_similarity(left.record->tokens, right.record->tokens);
  } catch (const Error& e) {
    throw Error(e.code(), "pair (" + pair.left_id + ", " + pair.right_id +
                              "): a title has no tokens");
  }
  s.cosine_dist = 1.0 - s.cosine_sim;
  if (embeddings) {
    s.embed_sim = embed_similarity(*embeddings, pair.left_id, pair.right_id);
    s.embed_dist = embed_distance(*s.embed_sim);
  }
  return s;
}

void require_embeddings(const CandidatePair& pair, const EmbeddingStore& store) {
  for (const auto& id : {pair.left_id, pair.right_id}) {
    if (!store.contains(id)) {
      throw Error(Errc::missing_embedding, "no embedding for record '" + id + "'");
    }
  }
}

}  // namespace

PairScores score_pair(const CandidatePair& pair, const Corpus& corpus,
                      const EmbeddingStore* embeddings) {
  const TitleRecord& l = corpus.at(pair.left_id);
  const TitleRecord& r = corpus.at(pair.right_id);
  if (embeddings) require_embeddings(pair, *embeddings);
  return score_cached(pair, {&l, to_code_points(l.normalized)},
                      {&r, to_code_points(r.normalized)}, embeddings);
}

std::vector<PairScores> score_pairs(std::span<const CandidatePair> pairs, const Corpus& corpus,
                                    const EmbeddingStore* embeddings, unsigned threads) {
  // Resolve everything up front so workers never throw on lookups.
  std::unordered_map<std::string_view, std::size_t> slot;
  std::vector<CachedRecord> cache;
  std::vector<std::pair<std::size_t, std::size_t>> refs;
  refs.reserve(pairs.size());
  auto resolve = [&](const std::string& id) {
    auto [it, inserted] = slot.try_emplace(id, cache.size());
    if (inserted) {
      const TitleRecord& r = corpus.at(id);
      cache.push_back({&r, to_code_points(r.normalized)});
    }
    return it->second;
  };
  for (const auto& p : pairs) {
    refs.emplace_back(resolve(p.left_id), resolve(p.right_id));
    if (embeddings) require_embeddings(p, *embeddings);
  }

  std::vector<PairScores> out(pairs.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, std::max<std::size_t>(1, pairs.size() / 256)));

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = score_cached(pairs[i], cache[refs[i].first], cache[refs[i].second], embeddings);
    }
  };
  if (threads <= 1) {
    work(0, pairs.size());
    return out;
  }

  std::vector<std::exception_ptr> failures(threads);
  {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (pairs.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = std::min(pairs.size(), t * chunk);
      const std::size_t end = std::min(pairs.size(), begin + chunk);
      workers.emplace_back([&, t, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          failures[t] = std::current_exception();
        }
      });
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return out;
}

std::string format_real(double value) {
  std::array<char, 32> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.9g", value);
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

void write_scores_csv(std::ostream& out, std::span<const PairScores> scores) {
  csv::write_row(out, {"left_id", "right_id", "lev_raw", "lev_norm", "cosine_sim", "cosine_dist",
                       "embed_sim", "embed_dist"});
  for (const auto& s : scores) {
    const std::string raw = std::to_string(s.lev_raw);
    const std::string lev = format_real(s.lev_norm);
    const std::string cs = format_real(s.cosine_sim);
    const std::string cd = format_real(s.cosine_dist);
    const std::string es = s.embed_sim ? format_real(*s.embed_sim) : std::string();
    const std::string ed = s.embed_dist ? format_real(*s.embed_dist) : std::string();
    csv::write_row(out, {s.left_id, s.right_id, raw, lev, cs, cd, es, ed});
  }
}

namespace {

double parse_real(const std::string& text, const std::string& at, std::string_view column) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(Errc::malformed_record,
                at + ": column " + std::string(column) + " is not a number: '" + text + "'");
  }
  return value;
}

}  // namespace

std::vector<PairScores> read_scores_csv(std::istream& in, std::string_view origin) {
  std::vector<PairScores> scores;
  csv::Reader reader(in, std::string(origin));
  csv::Row row;
  if (!reader.next(row)) return scores;
  const csv::Header header(row);
  constexpr std::array<std::string_view, 8> kColumns = {
      "left_id", "right_id", "lev_raw", "lev_norm", "cosine_sim", "cosine_dist",
      "embed_sim", "embed_dist"};
  std::array<std::size_t, 8> col{};
  std::size_t needed = 0;
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    col[i] = header.require(kColumns[i], origin);
    needed = std::max(needed, col[i] + 1);
  }
  while (reader.next(row)) {
    const std::string at = std::string(origin) + ":" + std::to_string(reader.line());
    if (row.size() < needed) throw Error(Errc::malformed_record, at + ": too few fields");
    PairScores s;
    s.left_id = row[col[0]];
    s.right_id = row[col[1]];
    const double raw = parse_real(row[col[2]], at, kColumns[2]);
    if (raw < 0 || raw != static_cast<double>(static_cast<std::size_t>(raw))) {
      throw Error(Errc::malformed_record, at + ": lev_raw must be a non-negative integer");
    }
    s.lev_raw = static_cast<std::size_t>(raw);
    s.lev_norm = parse_real(row[col[3]], at, kColumns[3]);
    s.cosine_sim = parse_real(row[col[4]], at, kColumns[4]);
    s.cosine_dist = parse_real(row[col[5]], at, kColumns[5]);
    if (!row[col[6]].empty()) s.embed_sim = parse_real(row[col[6]], at, kColumns[6]);
    if (!row[col[7]].empty()) s.embed_dist = parse_real(row[col[7]], at, kColumns[7]);
    if (s.embed_sim.has_value() != s.embed_dist.has_value()) {
      throw Error(Errc::malformed_record, at + ": embed_sim and embed_dist must both be present");
    }
    scores.push_back(std::move(s));
  }
  return scores;
}

}  // namespace titledup
