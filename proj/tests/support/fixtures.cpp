#include "fixtures.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include "titledup/csv.hpp"

namespace titledup::testing {

TempDir::TempDir() {
  std::string pattern = (std::filesystem::temp_directory_path() / "titledup-XXXXXX").string();
  if (::mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << contents;
}

std::string random_word(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(3, 9);
  std::uniform_int_distribution<int> letter(0, 25);
  std::string w(static_cast<std::size_t>(len(rng)), 'a');
  for (auto& c : w) c = static_cast<char>('a' + letter(rng));
  return w;
}

namespace {

std::string make_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "r%05zu", i);
  return buf;
}

std::string random_title(std::mt19937_64& rng, std::size_t words) {
  std::string t;
  for (std::size_t w = 0; w < words; ++w) {
    if (w) t += ' ';
    t += random_word(rng);
  }
  return t;
}

}  // namespace

Corpus random_corpus(std::size_t n, std::size_t sources, std::size_t min_words,
                     std::size_t max_words, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> words(min_words, max_words);
  std::uniform_int_distribution<std::size_t> src(0, sources - 1);
  std::vector<TitleRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    records.push_back(make_record(make_id(i), random_title(rng, words(rng)),
                                  "S" + std::to_string(src(rng))));
  }
  return Corpus(std::move(records));
}

SyntheticCorpus synthetic_with_duplicates(std::size_t total, std::size_t sources,
                                          std::size_t duplicates, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> words(4, 12);
  std::uniform_int_distribution<std::size_t> src(0, sources - 1);
  std::uniform_int_distribution<int> letter(0, 25);
  std::uniform_int_distribution<int> edits(1, 2);

  const std::size_t originals = total - duplicates;
  std::vector<TitleRecord> records;
  std::set<std::string> seen;
  while (records.size() < originals) {
    std::string title = random_title(rng, words(rng));
    if (title.size() < 11 || !seen.insert(title).second) continue;
    records.push_back(make_record(make_id(records.size()), title, "S" + std::to_string(src(rng))));
  }

  SyntheticCorpus out;
  for (std::size_t d = 0; d < duplicates; ++d) {
    // Distinct originals: every tenth record.
    const TitleRecord& base = records[d * (originals / duplicates)];
    std::string title = base.raw_title;
    const int n_edits = edits(rng);
    for (int e = 0; e < n_edits; ++e) {
      std::uniform_int_distribution<std::size_t> pos(0, title.size() - 1);
      std::size_t p;
      do {
        p = pos(rng);
      } while (title[p] == ' ');
      char c;
      do {
        c = static_cast<char>('a' + letter(rng));
      } while (c == title[p]);
      title[p] = c;
    }
    const std::size_t base_src = static_cast<std::size_t>(std::stoul(base.source.substr(1)));
    const std::string source = "S" + std::to_string((base_src + 1 + d % (sources - 1)) % sources);
    const std::string id = make_id(originals + d);
    out.injected.emplace(base.id, id);
    records.push_back(make_record(id, title, source));
  }
  out.corpus = Corpus(std::move(records));
  return out;
}

EmbeddingStore random_unit_embeddings(const Corpus& corpus, std::uint32_t dimension,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  EmbeddingStore::VectorMap vectors;
  for (const auto& r : corpus.records()) {
    std::vector<double> v(dimension);
    double norm = 0.0;
    for (auto& x : v) {
      x = gauss(rng);
      norm += x * x;
    }
    norm = std::sqrt(norm);
    std::vector<float> f(dimension);
    for (std::size_t i = 0; i < dimension; ++i) f[i] = static_cast<float>(v[i] / norm);
    vectors.emplace(r.id, std::move(f));
  }
  return EmbeddingStore(dimension, "random-unit-fixture", std::move(vectors));
}

void write_input_csv(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  csv::write_row(out, {"id", "title", "source"});
  for (const auto& r : corpus.records()) csv::write_row(out, {r.id, r.raw_title, r.source});
}

}  // namespace titledup::testing
