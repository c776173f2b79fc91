#include <doctest.h>

#include <fstream>
#include <random>

#include <json.hpp>

#include "titledup/text.hpp"

using namespace titledup;

TEST_CASE("normalize_title applies the normalization rule") {
  CHECK(normalize_title("  The  ECONOMIC Growth!! ") == "the economic growth");
  CHECK(normalize_title("") == "");
  CHECK(normalize_title("A/B Testing: RCTs") == "a b testing rcts");
  CHECK(normalize_title("!!!") == "");
  CHECK(normalize_title("tab\tand\nnewline") == "tab and newline");
  CHECK(normalize_title("GDP-2020") == "gdp 2020");
}

TEST_CASE("normalize_title handles non-ASCII text") {
  // Decomposed e + combining acute composes to U+00E9.
  CHECK(normalize_title("Caf\x65\xCC\x81 ÉCONOMIE") == "café économie");
  CHECK(normalize_title("Über Wachstum") == "über wachstum");
  CHECK(normalize_title("\xE2\x80\x9CQuoted\xE2\x80\x9D title") == "quoted title");
  CHECK(normalize_title("non\xC2\xA0" "breaking") == "non breaking");
}

TEST_CASE("normalize_title is idempotent over random strings") {
  const std::vector<std::string> palette = {
      "a", "Z", "7", " ", "  ", "\t", "!", "-", "/", "é", "E\xCC\x81", "\xCC\x81", "Ü",
      "ß", "İ", "Σ", "ς", "中", "\xEF\xBC\xA1" /* fullwidth A */, "\xE1\x84\x80" /* jamo */,
      "\xE1\x85\xA1", "\xC2\xA0", "\xF0\x9F\x98\x80", "ﬁ", "Ⅻ", "²", "\xFF"};
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, palette.size() - 1);
  std::uniform_int_distribution<int> len(0, 16);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s;
    for (int i = len(rng); i > 0; --i) s += palette[pick(rng)];
    const std::string once = normalize_title(s);
    CAPTURE(s);
    CHECK(normalize_title(once) == once);
    CHECK(once.find("  ") == std::string::npos);
    if (!once.empty()) {
      CHECK(once.front() != ' ');
      CHECK(once.back() != ' ');
    }
    for (const auto& token : tokenize(once)) CHECK_FALSE(token.empty());
  }
}

TEST_CASE("tokenize splits on single spaces") {
  CHECK(tokenize("the economic growth") == std::vector<std::string>{"the", "economic", "growth"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("rct") == std::vector<std::string>{"rct"});
}

TEST_CASE("to_code_points decodes UTF-8 scalars") {
  CHECK(to_code_points("aé中") == U"aé中");
  CHECK(to_code_points("\xF0\x9F\x98\x80").size() == 1);
  CHECK(to_code_points("a\xFF" "b") == U"a�b");
}

TEST_CASE("shared normalization vectors") {
  std::ifstream in(TITLEDUP_TEST_DATA_DIR "/normalization_vectors.json");
  REQUIRE(in);
  const auto doc = nlohmann::json::parse(in);
  REQUIRE(doc["vectors"].size() >= 20);
  for (const auto& v : doc["vectors"]) {
    const std::string input = v["input"];
    CAPTURE(input);
    CHECK(normalize_title(input) == v["normalized"].get<std::string>());
    CHECK(tokenize(normalize_title(input)) == v["tokens"].get<std::vector<std::string>>());
  }
}
