#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "titledup/error.hpp"
#include "titledup/evaluation.hpp"

using namespace titledup;

namespace {

PairScores row(std::string l, std::string r, double lev, double cos,
               std::optional<double> emb = std::nullopt) {
  PairScores s;
  s.left_id = std::move(l);
  s.right_id = std::move(r);
  s.lev_norm = lev;
  s.cosine_dist = cos;
  s.cosine_sim = 1.0 - cos;
  if (emb) {
    s.embed_dist = *emb;
    s.embed_sim = 1.0 - 2.0 * *emb;
  }
  return s;
}

GroundTruthLabel label(std::string l, std::string r, Verdict v, std::string rater, int second) {
  return {std::move(l), std::move(r), v, std::move(rater),
          Timestamp{std::chrono::seconds{1'700'000'000 + second}}};
}

Errc code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected titledup::Error");
  return Errc::invalid_argument;
}

}  // namespace

TEST_CASE("timestamps format and parse as ISO-8601 UTC") {
  const Timestamp t = Timestamp{std::chrono::milliseconds{1'714'566'600'250}};
  CHECK(format_timestamp(t) == "2024-05-01T12:30:00.250Z");
  CHECK(parse_timestamp("2024-05-01T12:30:00.250Z") == t);
  CHECK(parse_timestamp("2024-05-01T12:30:00Z") == t - std::chrono::milliseconds{250});
  CHECK(parse_timestamp("2024-05-01T12:30:00.25Z") == t);
  CHECK_FALSE(parse_timestamp("2024-05-01 12:30:00Z").has_value());
  CHECK_FALSE(parse_timestamp("2024-02-30T00:00:00Z").has_value());
  CHECK_FALSE(parse_timestamp("2024-05-01T12:30:00").has_value());
}

TEST_CASE("classify uses distance <= threshold") {
  const std::vector<PairScores> s = {row("a", "b", 0.0, 1), row("a", "c", 0.21, 1),
                                     row("a", "d", 0.2, 1)};
  const auto p = classify(s, Measure::lev_norm, 0.2);
  CHECK(p[0].duplicate);
  CHECK_FALSE(p[1].duplicate);
  CHECK(p[2].duplicate);
  CHECK(code_of([&] { classify(s, Measure::embed_dist, 0.2); }) == Errc::missing_measure);
}

TEST_CASE("classify is monotone in threshold") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<PairScores> s;
  for (int i = 0; i < 200; ++i) s.push_back(row("a" + std::to_string(i), "b", u(rng), u(rng)));
  for (double t = 0.0; t < 1.0; t += 0.05) {
    const auto lo = classify(s, Measure::cosine_dist, t);
    const auto hi = classify(s, Measure::cosine_dist, t + 0.05);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (lo[i].duplicate) CHECK(hi[i].duplicate);
    }
  }
}

TEST_CASE("confusion counts and derived metrics") {
  SUBCASE("2 TP, 1 FP, 1 FN, 0 TN") {
    const std::vector<Prediction> p = {
        {"a", "b", true}, {"a", "c", true}, {"a", "d", true}, {"a", "e", false}};
    const std::map<PairKey, Verdict> t = {{{"a", "b"}, Verdict::duplicate},
                                          {{"a", "c"}, Verdict::duplicate},
                                          {{"a", "d"}, Verdict::not_duplicate},
                                          {{"a", "e"}, Verdict::duplicate}};
    const auto r = confusion(p, t);
    CHECK(r.tp == 2);
    CHECK(r.fp == 1);
    CHECK(r.fn == 1);
    CHECK(r.tn == 0);
    CHECK(*r.precision == doctest::Approx(2.0 / 3.0));
    CHECK(*r.recall == doctest::Approx(2.0 / 3.0));
    CHECK(*r.f1 == doctest::Approx(2.0 / 3.0));
  }
  SUBCASE("perfect prediction") {
    std::vector<Prediction> p;
    std::map<PairKey, Verdict> t;
    for (int i = 0; i < 10; ++i) {
      const bool dup = i % 3 == 0;
      p.push_back({"a", "b" + std::to_string(i), dup});
      t[{"a", "b" + std::to_string(i)}] = dup ? Verdict::duplicate : Verdict::not_duplicate;
    }
    const auto r = confusion(p, t);
    CHECK(*r.precision == 1.0);
    CHECK(*r.recall == 1.0);
    CHECK(r.tp + r.fp + r.fn + r.tn == 10);
  }
  SUBCASE("all-unsure truth") {
    const std::vector<Prediction> p = {{"a", "b", true}};
    const std::map<PairKey, Verdict> t = {{{"a", "b"}, Verdict::unsure}};
    CHECK(code_of([&] { confusion(p, t); }) == Errc::no_overlap);
  }
  SUBCASE("undefined precision") {
    const std::vector<Prediction> p = {{"a", "b", false}};
    const std::map<PairKey, Verdict> t = {{{"a", "b"}, Verdict::duplicate}};
    const auto r = confusion(p, t);
    CHECK_FALSE(r.precision.has_value());
    CHECK(*r.recall == 0.0);
    CHECK_FALSE(r.f1.has_value());
    CHECK(to_json(r)["precision"].is_null());
  }
}

TEST_CASE("confusion invariants on random inputs") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Prediction> p;
    std::map<PairKey, Verdict> t;
    std::size_t counted = 0;
    for (int i = 0; i < 30; ++i) {
      const std::string r = "r" + std::to_string(i);
      p.push_back({"a", r, rng() % 2 == 0});
      const auto v = static_cast<Verdict>(rng() % 3);
      if (rng() % 5 != 0) {
        t[{"a", r}] = v;
        counted += v == Verdict::unsure ? 0 : 1;
      }
    }
    if (counted == 0) continue;
    const auto rep = confusion(p, t);
    CHECK(rep.tp + rep.fp + rep.fn + rep.tn == counted);
    if (rep.precision && rep.recall && *rep.precision + *rep.recall > 0) {
      const double h = 2 * *rep.precision * *rep.recall / (*rep.precision + *rep.recall);
      CHECK(std::abs(*rep.f1 - h) <= 1e-12);
      CHECK(*rep.f1 >= 0.0);
      CHECK(*rep.f1 <= 1.0);
    }
  }
}

TEST_CASE("resolve_truth: latest per rater, then majority, ties unsure") {
  const std::vector<GroundTruthLabel> labels = {
      label("a", "b", Verdict::not_duplicate, "r1", 0),
      label("a", "b", Verdict::duplicate, "r1", 5),  // supersedes
      label("a", "b", Verdict::duplicate, "r2", 1),
      label("a", "c", Verdict::duplicate, "r1", 0),
      label("a", "c", Verdict::not_duplicate, "r2", 0),  // 1-1 tie
      label("a", "d", Verdict::duplicate, "r1", 9),
      label("a", "d", Verdict::not_duplicate, "r1", 3),  // older, ignored
      label("a", "e", Verdict::unsure, "r1", 0),
      label("a", "e", Verdict::duplicate, "r2", 0),
      label("a", "e", Verdict::duplicate, "r3", 0),
  };
  const auto t = resolve_truth(labels);
  CHECK(t.at({"a", "b"}) == Verdict::duplicate);
  CHECK(t.at({"a", "c"}) == Verdict::unsure);
  CHECK(t.at({"a", "d"}) == Verdict::duplicate);
  CHECK(t.at({"a", "e"}) == Verdict::duplicate);
}

TEST_CASE("equal timestamps resolve to the later row") {
  const std::vector<GroundTruthLabel> labels = {label("a", "b", Verdict::duplicate, "r", 0),
                                                label("a", "b", Verdict::not_duplicate, "r", 0)};
  CHECK(resolve_truth(labels).at({"a", "b"}) == Verdict::not_duplicate);
}

TEST_CASE("truth CSV round trip and validation") {
  std::vector<GroundTruthLabel> labels = {label("a", "b", Verdict::duplicate, "ann, the rater", 0),
                                          label("a", "c", Verdict::unsure, "bo", 1)};
  labels[1].labeled_at += std::chrono::milliseconds{7};
  std::ostringstream first;
  write_truth_csv(first, labels);
  std::istringstream in(first.str());
  const auto back = read_truth_csv(in, "truth");
  REQUIRE(back.size() == 2);
  CHECK(back[0].rater == "ann, the rater");
  CHECK(back[1].labeled_at == labels[1].labeled_at);
  std::ostringstream second;
  write_truth_csv(second, back);
  CHECK(first.str() == second.str());

  std::istringstream bad("left_id,right_id,verdict,rater,labeled_at\na,b,maybe,r,2024-01-01T00:00:00Z\n");
  CHECK(code_of([&] { read_truth_csv(bad, "t"); }) == Errc::invalid_verdict);
}

TEST_CASE("pearson and correlate") {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> y = {2, 3, 4, 0, 1};
  CHECK(oracle::pearson(x, y) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(std::abs(pearson(x, y) + 0.5) <= 1e-9);
  CHECK(pearson(x, x) == doctest::Approx(1.0));
  CHECK(code_of([&] { pearson(x, std::vector<double>(5, 0.3)); }) == Errc::degenerate_variance);
  CHECK(code_of([&] { pearson(std::vector<double>{1}, std::vector<double>{2}); }) ==
        Errc::degenerate_variance);

  std::vector<PairScores> rows;
  for (std::size_t i = 0; i < x.size(); ++i) {
    rows.push_back(row("a", "b" + std::to_string(i), x[i] / 10, y[i] / 10, x[i] / 10));
  }
  const auto c = correlate(rows);
  CHECK(std::abs(c.lev_cos + 0.5) <= 1e-9);
  CHECK(*c.lev_embed == doctest::Approx(1.0));
  CHECK(std::abs(*c.cos_embed + 0.5) <= 1e-9);

  rows[2].embed_dist.reset();
  CHECK_FALSE(correlate(rows).lev_embed.has_value());
}

TEST_CASE("pearson is symmetric and affine invariant") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(20), y(20), ax(20);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = g(rng);
      y[i] = 0.5 * x[i] + g(rng);
      ax[i] = 3.5 * x[i] + 11.0;
    }
    const double r = pearson(x, y);
    CHECK(std::abs(r - pearson(y, x)) <= 1e-12);
    CHECK(std::abs(r - pearson(ax, y)) <= 1e-9);
    CHECK(std::abs(r - oracle::pearson(x, y)) <= 1e-9);
  }
}

TEST_CASE("spearman uses average ranks") {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> cubed = {1, 8, 27, 64, 125};
  CHECK(spearman(x, cubed) == doctest::Approx(1.0));
  // Ties: ranks of {1,1,2} are {1.5,1.5,3}.
  CHECK(spearman(std::vector<double>{1, 1, 2}, std::vector<double>{1.5, 1.5, 3}) ==
        doctest::Approx(1.0));
}

TEST_CASE("reservoir sampling") {
  std::vector<CandidatePair> five;
  for (int i = 0; i < 5; ++i) five.push_back(make_candidate("a", "b" + std::to_string(i), Strategy::complete));
  CHECK(sample_pairs(five, 10, 1) == five);

  const Corpus c = testing::random_corpus(142, 2, 1, 5, 1);  // 10011 pairs
  auto all = complete_pairs(c).collect();
  REQUIRE(all.size() >= 10'000);
  all.resize(10'000);
  const auto s1 = sample_pairs(all, 2000, 42);
  CHECK(s1.size() == 2000);
  CHECK(std::adjacent_find(s1.begin(), s1.end()) == s1.end());
  CHECK(sample_pairs(all, 2000, 42) == s1);
  CHECK(sample_pairs(all, 2000, 43) != s1);

  auto stream = complete_pairs(c);
  const auto from_stream = sample_pairs(stream, 50, 42);
  CHECK(from_stream == sample_pairs(complete_pairs(c).collect(), 50, 42));
  CHECK(code_of([&] { sample_pairs(all, 0, 1); }) == Errc::invalid_argument);
}

TEST_CASE("reservoir sampling is close to uniform") {
  // Each of 20 items should land in a size-5 sample a quarter of the time.
  std::vector<int> hits(20, 0);
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    ReservoirSampler<int> s(5, static_cast<std::uint64_t>(t));
    for (int i = 0; i < 20; ++i) s.offer(i);
    for (int i : std::move(s).take()) ++hits[static_cast<std::size_t>(i)];
  }
  for (int h : hits) CHECK(std::abs(h / double(trials) - 0.25) < 0.02);
}

TEST_CASE("uniform_below stays in range and is reproducible") {
  std::mt19937_64 a(5), b(5);
  for (std::uint64_t bound : {1ull, 2ull, 3ull, 1000ull, (1ull << 63) + 1}) {
    for (int i = 0; i < 100; ++i) {
      const auto x = uniform_below(a, bound);
      CHECK(x < bound);
      CHECK(x == uniform_below(b, bound));
    }
  }
}

TEST_CASE("scatter export") {
  testing::TempDir dir;
  SUBCASE("rows and summary") {
    const std::vector<PairScores> rows = {row("a", "b", 0.1, 0.1, 0.1), row("a", "c", 0.5, 0.9, 0.4),
                                          row("b", "c", 0.1, 0.3, 0.0)};
    const auto summary = export_scatter(rows, dir.path());
    CHECK(summary.rows == 3);
    CHECK(*summary.bottom_left_fraction == doctest::Approx(1.0 / 3.0));
    CHECK(summary.lev_norm->max == 0.5);
    const auto csv = testing::read_file(dir / std::string(kScatterCsvName));
    CHECK(csv ==
          "left_id,right_id,lev_norm,cosine_dist,embed_dist\n"
          "a,b,0.1,0.1,0.1\na,c,0.5,0.9,0.4\nb,c,0.1,0.3,0\n");
    const auto j = nlohmann::json::parse(testing::read_file(dir / std::string(kScatterSummaryName)));
    CHECK(j["rows"] == 3);
    CHECK(j["cosine_dist"]["mean"].get<double>() == doctest::Approx(1.3 / 3));
  }
  SUBCASE("zero rows") {
    const auto summary = export_scatter({}, dir.path());
    CHECK(summary.rows == 0);
    CHECK(testing::read_file(dir / std::string(kScatterCsvName)) ==
          "left_id,right_id,lev_norm,cosine_dist,embed_dist\n");
    const auto j = nlohmann::json::parse(testing::read_file(dir / std::string(kScatterSummaryName)));
    CHECK(j["bottom_left_fraction"].is_null());
    CHECK(j["lev_norm"]["min"].is_null());
  }
  SUBCASE("missing embedding refuses without writing") {
    const std::vector<PairScores> rows = {row("a", "b", 0.1, 0.1)};
    CHECK(code_of([&] { export_scatter(rows, dir / "out"); }) == Errc::missing_measure);
    CHECK_FALSE(std::filesystem::exists(dir / "out"));
  }
}
