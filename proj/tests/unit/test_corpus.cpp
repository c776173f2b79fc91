#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "titledup/corpus.hpp"
#include "titledup/error.hpp"

using namespace titledup;

namespace {

Errc code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected titledup::Error");
  return Errc::invalid_argument;
}

Corpus from_csv(const std::string& text, LoadOptions options = {}) {
  std::istringstream in(text);
  return read_corpus(in, CorpusFormat::csv, "test.csv", options);
}

Corpus with_counts(const std::vector<std::size_t>& counts) {
  std::vector<TitleRecord> rs;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::string title;
    for (std::size_t w = 0; w < counts[i]; ++w) title += "w" + std::to_string(w) + " ";
    rs.push_back(make_record("id" + std::to_string(i), title, "S"));
  }
  return Corpus(std::move(rs));
}

}  // namespace

TEST_CASE("make_record derives normalized text, tokens and word count") {
  const auto r = make_record("t1", "  The  ECONOMIC Growth!! ", "JSTOR");
  CHECK(r.normalized == "the economic growth");
  CHECK(r.word_count == 3);
  CHECK(r.tokens.size() == r.word_count);
  CHECK(r.source == "JSTOR");
}

TEST_CASE("CSV corpus loading") {
  SUBCASE("three distinct rows") {
    const Corpus c = from_csv("id,title,source\nt1,Alpha beta,A\nt2,\"Gamma, delta\",B\nt3,eps,A\n");
    CHECK(c.size() == 3);
    CHECK(c.sources() == std::set<std::string>{"A", "B"});
    CHECK(c.at("t2").raw_title == "Gamma, delta");
    CHECK(c.word_count_histogram() == std::map<std::size_t, std::size_t>{{1, 1}, {2, 2}});
  }
  SUBCASE("column order and extra columns do not matter") {
    const Corpus c = from_csv("source,extra,title,id\nA,x,Hello world,t9\n");
    CHECK(c.at("t9").normalized == "hello world");
  }
  SUBCASE("repeated id") {
    CHECK(code_of([] { from_csv("id,title,source\nt1,a,A\nt1,b,B\n"); }) == Errc::duplicate_id);
  }
  SUBCASE("row missing a field") {
    CHECK(code_of([] { from_csv("id,title,source\nt1,a\n"); }) == Errc::malformed_record);
  }
  SUBCASE("header missing a column") {
    CHECK(code_of([] { from_csv("id,title\nt1,a\n"); }) == Errc::malformed_record);
  }
  SUBCASE("empty file and header-only file give empty corpora") {
    CHECK(from_csv("").empty());
    CHECK(from_csv("id,title,source\n").empty());
  }
  SUBCASE("empty titles are retained with word count 0") {
    const Corpus c = from_csv("id,title,source\nt1,!!!,A\n");
    CHECK(c.at("t1").word_count == 0);
  }
}

TEST_CASE("JSONL corpus loading") {
  std::istringstream ok(
      "{\"id\":\"a\",\"title\":\"One two\",\"source\":\"X\",\"year\":2001}\n\n"
      "{\"id\":\"b\",\"title\":\"Three\",\"source\":\"Y\"}\n");
  const Corpus c = read_corpus(ok, CorpusFormat::jsonl, "t.jsonl");
  CHECK(c.size() == 2);

  std::istringstream missing("{\"id\":\"a\",\"title\":\"x\"}\n");
  CHECK(code_of([&] { read_corpus(missing, CorpusFormat::jsonl, "t.jsonl"); }) ==
        Errc::malformed_record);
  std::istringstream bad("{not json\n");
  CHECK(code_of([&] { read_corpus(bad, CorpusFormat::jsonl, "t.jsonl"); }) ==
        Errc::malformed_record);
  std::istringstream dup("{\"id\":\"a\",\"title\":\"x\",\"source\":\"s\"}\n"
                         "{\"id\":\"a\",\"title\":\"y\",\"source\":\"s\"}\n");
  CHECK(code_of([&] { read_corpus(dup, CorpusFormat::jsonl, "t.jsonl"); }) == Errc::duplicate_id);
}

TEST_CASE("missing file is an IoFailure") {
  CHECK(code_of([] { load_corpus("/nonexistent/corpus.csv", CorpusFormat::csv); }) ==
        Errc::io_failure);
}

TEST_CASE("language filter keeps the requested language plus unknown") {
  // Hand labels: 4 en, 3 es, 1 fr, 2 unknown.
  const std::string text =
      "id,title,source\n"
      "e1,The impact of microfinance on poverty,A\n"
      "e2,Evidence from a randomized trial in Kenya,A\n"
      "e3,What works for the poor and why,B\n"
      "e4,Returns to schooling in the long run,B\n"
      "s1,El impacto de las microfinanzas,A\n"
      "s2,Evidencia de un experimento en el Peru,B\n"
      "s3,Los efectos del microcredito sobre la pobreza,A\n"
      "f1,Les effets du microcrédit sur la pauvreté,B\n"
      "u1,Microfinance,A\n"
      "u2,Poverty traps revisited again,B\n";
  LoadOptions options;
  options.language_filter = "en";
  const Corpus c = from_csv(text, options);
  std::set<std::string> ids;
  for (const auto& r : c.records()) ids.insert(r.id);
  CHECK(ids == std::set<std::string>{"e1", "e2", "e3", "e4", "u1", "u2"});
  CHECK(from_csv(text).size() == 10);
}

TEST_CASE("mode_word_count") {
  CHECK(mode_word_count(with_counts({5, 7, 7, 9})) == 7);
  CHECK(mode_word_count(with_counts({5, 5, 7, 7})) == 5);
  CHECK(mode_word_count(with_counts({3})) == 3);
  CHECK(code_of([] { mode_word_count(Corpus{}); }) == Errc::empty_corpus);
}

TEST_CASE("mode_word_count matches direct counting on random corpora") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Corpus c = testing::random_corpus(40, 3, 1, 6, seed);
    CHECK(mode_word_count(c) == oracle::mode_word_count(c));
    const auto mu = mode_word_count(c);
    for (const auto& [count, freq] : c.word_count_histogram()) {
      CHECK(c.word_count_histogram().at(mu) >= freq);
    }
  }
}

TEST_CASE("N well-formed rows load as N records") {
  for (std::size_t n : {0u, 1u, 7u, 250u}) {
    const Corpus src = testing::random_corpus(n, 2, 1, 8, n + 11);
    testing::TempDir dir;
    testing::write_input_csv(dir / "c.csv", src);
    const Corpus loaded = load_corpus(dir / "c.csv", CorpusFormat::csv);
    CHECK(loaded.size() == n);
    std::size_t sum = 0;
    for (const auto& [count, freq] : loaded.word_count_histogram()) sum += freq;
    CHECK(sum == n);
  }
}

TEST_CASE("corpus CSV survives write, read, write byte-identically") {
  std::vector<TitleRecord> rs = {
      make_record("a", "Quotes \"inside\", and commas", "X"),
      make_record("b", "Multi\nline title", "Y"),
      make_record("c", "Plain", "X"),
  };
  const Corpus c(std::move(rs));
  std::ostringstream first;
  write_corpus_csv(first, c);
  std::istringstream in(first.str());
  const Corpus back = read_corpus(in, CorpusFormat::csv, "roundtrip");
  std::ostringstream second;
  write_corpus_csv(second, back);
  CHECK(first.str() == second.str());
}
