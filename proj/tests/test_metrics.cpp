#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "essaykit/essaykit.hpp"
#include "test_support.hpp"

using namespace essaykit;

// Independent kappa route: agreement weights and the (po - pe) / (1 - pe)
// form over normalized matrices.
static double oracle_qwk(const std::vector<double>& pred,
                         const std::vector<double>& gold, const ScoreGrid& grid) {
  const std::size_t k = grid.size();
  auto index_of = [&](double x) {
    for (std::size_t i = 0; i < k; ++i)
      if (std::abs(x - grid.values[i]) < 1e-9) return i;
    throw Error("oracle: off grid");
  };
  const double n = static_cast<double>(pred.size());
  std::vector<std::vector<double>> obs(k, std::vector<double>(k, 0.0));
  std::vector<double> pm(k, 0.0), gm(k, 0.0);
  for (std::size_t t = 0; t < pred.size(); ++t) {
    const std::size_t i = index_of(pred[t]);
    const std::size_t j = index_of(gold[t]);
    obs[i][j] += 1.0 / n;
    pm[i] += 1.0 / n;
    gm[j] += 1.0 / n;
  }
  double po = 0.0, pe = 0.0;
  const double kk = static_cast<double>((k - 1) * (k - 1));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const double di = static_cast<double>(i) - static_cast<double>(j);
      const double agree = 1.0 - di * di / kk;
      po += agree * obs[i][j];
      pe += agree * pm[i] * gm[j];
    }
  return (po - pe) / (1.0 - pe);
}

static std::vector<double> random_grid_vector(std::size_t n, const ScoreGrid& g,
                                              StableRng& rng) {
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(g.values[rng.index(g.values.size())]);
  return out;
}

TEST_CASE("bin_score picks the nearest class, ties upward") {
  const ScoreGrid g = ScoreGrid::half_point();
  CHECK(bin_score(3.2, g) == 4);    // 3.0
  CHECK(bin_score(3.25, g) == 5);   // tie -> 3.5
  CHECK(bin_score(5.0, g) == 8);
  CHECK(bin_score(0.2, g) == 0);
  CHECK(bin_score(9.9, g) == 8);
  CHECK(g.values[bin_score(3.2, g)] == 3.0);
}

TEST_CASE("qwk is 1 on perfect agreement") {
  const ScoreGrid g = ScoreGrid::half_point();
  StableRng rng(3);
  for (int iter = 0; iter < 20; ++iter) {
    const auto x = random_grid_vector(50, g, rng);
    CHECK(qwk(x, x, g) == 1.0);
  }
}

TEST_CASE("qwk on total disagreement concentrated in two classes") {
  const ScoreGrid g = ScoreGrid::half_point();
  const std::vector<double> pred{1.0, 1.0};
  const std::vector<double> gold{5.0, 5.0};
  const double expect = oracle_qwk(pred, gold, g);
  CHECK(qwk(pred, gold, g) == Catch::Approx(expect).epsilon(0).margin(1e-12));
  // with all mass at maximal distance, chance equals observation
  CHECK(qwk(pred, gold, g) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("qwk agrees with the independent oracle and is symmetric") {
  const ScoreGrid g = ScoreGrid::half_point();
  StableRng rng(101);
  for (int iter = 0; iter < 50; ++iter) {
    const auto a = random_grid_vector(100, g, rng);
    const auto b = random_grid_vector(100, g, rng);
    const double v = qwk(a, b, g);
    CHECK(v == Catch::Approx(oracle_qwk(a, b, g)).epsilon(0).margin(1e-12));
    CHECK(v == Catch::Approx(qwk(b, a, g)).epsilon(0).margin(1e-12));
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("qwk input validation") {
  const ScoreGrid g = ScoreGrid::half_point();
  CHECK_THROWS_AS(qwk({1.0}, {1.0, 2.0}, g), Error);
  CHECK_THROWS_AS(qwk({}, {}, g), Error);
  CHECK_THROWS_AS(qwk({1.2}, {1.0}, g), Error);  // off-grid
  // degenerate: all mass in one identical cell
  CHECK(qwk({3.0, 3.0}, {3.0, 3.0}, g) == 1.0);
}

TEST_CASE("jointly permuting paired samples leaves qwk unchanged") {
  const ScoreGrid g = ScoreGrid::half_point();
  StableRng rng(7);
  const auto a = random_grid_vector(60, g, rng);
  const auto b = random_grid_vector(60, g, rng);
  const double base = qwk(a, b, g);
  std::vector<std::size_t> perm(a.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  stable_shuffle(perm, rng);
  std::vector<double> pa, pb;
  for (std::size_t i : perm) {
    pa.push_back(a[i]);
    pb.push_back(b[i]);
  }
  CHECK(qwk(pa, pb, g) == Catch::Approx(base).epsilon(0).margin(1e-12));
}

static AnalyticsLexicons tiny_lexicons() {
  AnalyticsLexicons lex;
  lex.stopwords = {"the", "a", "and", "of", "to"};
  lex.transitions = {{"however"}, {"in", "addition"}, {"for", "example"}};
  lex.dictionary = {"the",  "cat", "sat",  "on",   "mat", "dog",  "ran",
                    "fast", "and", "then", "fell", "red", "hat",  "with",
                    "a",    "very", "good", "day",  "in",  "addition",
                    "however", "it", "was"};
  return lex;
}

TEST_CASE("analyze counts on a tiny fixture") {
  Essay e;
  e.id = "f";
  e.text = "The cat sat.";
  e.sentences = segment_sentences(e.text);
  const auto rep = analyze(e, tiny_lexicons());
  CHECK(rep.n_sentences == 1);
  CHECK(rep.n_tokens == 3);
  REQUIRE(rep.ttr);
  CHECK(*rep.ttr == 1.0);
  CHECK(rep.n_typos == 0);
  CHECK(rep.n_tokens_no_stopwords == 2);  // "the" is a stopword
}

TEST_CASE("flesch reading ease on ten monosyllabic words in one sentence") {
  Essay e;
  e.id = "fre";
  e.text = "The cat sat on the mat with the red hat.";
  e.sentences = segment_sentences(e.text);
  REQUIRE(e.sentences.size() == 1);
  const auto rep = analyze(e, tiny_lexicons());
  REQUIRE(rep.n_tokens == 10);
  REQUIRE(rep.flesch_reading_ease);
  // 206.835 - 1.015*10 - 84.6*1
  CHECK(*rep.flesch_reading_ease == Catch::Approx(112.085).epsilon(0).margin(1e-9));
  REQUIRE(rep.fk_grade);
  CHECK(*rep.fk_grade == Catch::Approx(0.39 * 10 + 11.8 - 15.59).margin(1e-9));
}

TEST_CASE("typos are dictionary misses without digits") {
  Essay e;
  e.id = "t";
  e.text = "Teh cat sat on teh mat in 1999 and x9 times.";
  e.sentences = segment_sentences(e.text);
  const auto rep = analyze(e, tiny_lexicons());
  // "teh" twice, "times" once; "1999" and "x9" carry digits and never count
  CHECK(rep.n_typos == 3);
}

TEST_CASE("hyphenated compounds are spelled if every part is") {
  AnalyticsLexicons lex = tiny_lexicons();
  Essay e;
  e.id = "h";
  e.text = "A red-hat day.";
  e.sentences = segment_sentences(e.text);
  CHECK(analyze(e, lex).n_typos == 0);
  e.text = "A red-zzz day.";
  CHECK(analyze(e, lex).n_typos == 1);
}

TEST_CASE("transition phrases are counted over the token sequence") {
  Essay e;
  e.id = "tr";
  e.text = "However, the dog ran. In addition, the cat sat. For example, it was good.";
  e.sentences = segment_sentences(e.text);
  const auto rep = analyze(e, tiny_lexicons());
  CHECK(rep.n_transition_signals == 3);
}

TEST_CASE("analyze on an empty essay reports absent ratios, zero counts") {
  Essay e;
  e.id = "empty";
  e.text = "";
  e.sentences = segment_sentences(e.text);
  const auto rep = analyze(e, tiny_lexicons());
  CHECK(rep.n_sentences == 0);
  CHECK(rep.n_tokens == 0);
  CHECK_FALSE(rep.ttr);
  CHECK_FALSE(rep.flesch_reading_ease);
  CHECK_FALSE(rep.fk_grade);
}

TEST_CASE("analytics invariants on random essays") {
  StableRng rng(202);
  const auto lex = tiny_lexicons();
  for (int iter = 0; iter < 300; ++iter) {
    Essay e = testsupport::make_essay("r", "p", 1 + static_cast<int>(rng.below(12)), rng);
    const auto rep = analyze(e, lex);
    CHECK(rep.n_tokens_no_stopwords <= rep.n_tokens);
    if (rep.n_tokens > 0) {
      REQUIRE(rep.ttr);
      CHECK(*rep.ttr > 0.0);
      CHECK(*rep.ttr <= 1.0);
    }
    // deduplicating tokens can only raise the ratio
    if (rep.ttr) {
      std::set<std::string> uniq;
      std::string dedup_text;
      for (const auto& t : tokenize(e.text))
        if (uniq.insert(t).second) dedup_text += t + " ";
      Essay d;
      d.id = "d";
      d.text = dedup_text;
      d.sentences = segment_sentences(d.text);
      const auto drep = analyze(d, lex);
      if (drep.ttr) CHECK(*drep.ttr >= *rep.ttr - 1e-12);
    }
  }
}

TEST_CASE("syllable heuristic spot checks") {
  CHECK(count_syllables("the") == 1);
  CHECK(count_syllables("cat") == 1);
  CHECK(count_syllables("little") == 2);
  CHECK(count_syllables("liked") == 1);
  CHECK(count_syllables("wanted") == 2);
  CHECK(count_syllables("make") == 1);
  CHECK(count_syllables("education") == 4);
  CHECK(count_syllables("syllable") == 3);
  CHECK(count_syllables("") == 1);  // non-letter tokens count as one beat
}

// Independent route: F from SS_total - SS_between.
static double oracle_f(const std::vector<std::vector<double>>& groups) {
  double grand = 0.0;
  std::size_t n = 0;
  for (const auto& g : groups)
    for (double v : g) {
      grand += v;
      ++n;
    }
  grand /= static_cast<double>(n);
  double sst = 0.0, ssb = 0.0;
  for (const auto& g : groups) {
    double mean = 0.0;
    for (double v : g) mean += v;
    mean /= static_cast<double>(g.size());
    ssb += static_cast<double>(g.size()) * (mean - grand) * (mean - grand);
    for (double v : g) sst += (v - grand) * (v - grand);
  }
  const double ssw = sst - ssb;
  const double dfb = static_cast<double>(groups.size() - 1);
  const double dfw = static_cast<double>(n - groups.size());
  return (ssb / dfb) / (ssw / dfw);
}

TEST_CASE("anova F is zero for identical groups") {
  const auto r = one_way_anova({{1, 2, 3}, {1, 2, 3}});
  CHECK(r.f == 0.0);
  CHECK(r.df_between == 1);
  CHECK(r.df_within == 4);
}

TEST_CASE("anova saturates at infinity when within-variance is zero") {
  const auto r = one_way_anova({{1, 1}, {2, 2}});
  CHECK(std::isinf(r.f));
  CHECK(r.ss_within == 0.0);
}

TEST_CASE("anova agrees with the sum-of-squares oracle") {
  StableRng rng(303);
  for (int iter = 0; iter < 50; ++iter) {
    std::vector<std::vector<double>> groups(3);
    for (auto& g : groups) {
      const int m = 3 + static_cast<int>(rng.below(10));
      for (int i = 0; i < m; ++i)
        g.push_back(static_cast<double>(rng.below(1000)) / 100.0 - 5.0);
    }
    const auto r = one_way_anova(groups);
    CHECK(r.f == Catch::Approx(oracle_f(groups)).epsilon(0).margin(1e-9));
  }
}

TEST_CASE("anova input validation") {
  CHECK_THROWS_AS(one_way_anova({{1.0, 2.0}}), Error);
  CHECK_THROWS_AS(one_way_anova({{1.0}, {}}), Error);
  CHECK_THROWS_AS(one_way_anova({{1.0}, {2.0}}), Error);  // n == groups
}
