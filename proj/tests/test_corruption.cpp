#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <sstream>

#include "essaykit/essaykit.hpp"
#include "test_support.hpp"

using namespace essaykit;
using testsupport::TempDir;
using testsupport::write_file;

// Independent route for the corruption count: exact integer arithmetic over
// tenths, with the same round-half-away tie rule.
static int oracle_corruption_count(int n, double target) {
  const long long t2 = std::llround(target * 2.0);  // grid scores are exact halves
  const long long num = static_cast<long long>(n) * (10 - t2);
  return static_cast<int>(num / 10 + (num % 10 >= 5 ? 1 : 0));
}

TEST_CASE("corruption_count evaluates the corruption equation") {
  CHECK(corruption_count(20, 3.0) == 8);
  CHECK(corruption_count(21, 4.5) == 2);   // 2.1 rounds down
  CHECK(corruption_count(25, 4.5) == 3);   // 2.5 rounds away from zero
  for (int n = 0; n <= 50; ++n) CHECK(corruption_count(n, 5.0) == 0);
}

TEST_CASE("corruption_count agrees with the integer oracle exhaustively") {
  for (int n = 0; n <= 200; ++n)
    for (int g = 0; g < 9; ++g) {
      const double target = 1.0 + 0.5 * g;
      CHECK(corruption_count(n, target) == oracle_corruption_count(n, target));
    }
}

TEST_CASE("corruption_count monotonicity") {
  for (int n = 0; n <= 200; ++n) {
    for (int g = 1; g < 9; ++g)
      CHECK(corruption_count(n, 1.0 + 0.5 * g) <=
            corruption_count(n, 1.0 + 0.5 * (g - 1)));
  }
  for (int g = 0; g < 9; ++g) {
    const double target = 1.0 + 0.5 * g;
    for (int n = 1; n <= 200; ++n)
      CHECK(corruption_count(n, target) >= corruption_count(n - 1, target));
  }
}

TEST_CASE("select_well_written filters per rubric at 4.5") {
  StableRng rng(3);
  Corpus c = testsupport::make_scored_corpus(3, 2, rng);
  c.essays[0].scores.set(Rubric::content, 5.0);
  c.essays[1].scores.set(Rubric::content, 4.5);
  c.essays[2].scores.set(Rubric::content, 4.0);
  const auto pool = select_well_written(c, Rubric::content);
  REQUIRE(pool.essays.size() == 2);
  CHECK(pool.essays[0]->id == c.essays[0].id);

  // per-rubric membership: high content, low language
  c.essays[0].scores.set(Rubric::language, 3.0);
  c.essays[1].scores.set(Rubric::language, 3.0);
  c.essays[2].scores.set(Rubric::language, 3.0);
  CHECK_THROWS_WITH(select_well_written(c, Rubric::language),
                    Catch::Matchers::ContainsSubstring("cannot augment"));
}

static Corpus content_fixture(StableRng& rng, int n_sentences = 20) {
  Corpus c;
  c.prompts = {{"pa", "Prompt A"}, {"pb", "Prompt B"}, {"pc", "Prompt C"}};
  c.essays.push_back(testsupport::make_essay("src", "pa", n_sentences, rng));
  c.essays.back().scores.set(Rubric::content, 5.0);
  for (int i = 0; i < 4; ++i) {
    const std::string prompt = i % 2 ? "pb" : "pc";
    c.essays.push_back(
        testsupport::make_essay("donor" + std::to_string(i), prompt, 10, rng));
    c.essays.back().scores.set(Rubric::content, i % 2 ? 4.5 : 5.0);
  }
  return c;
}

TEST_CASE("corrupt_content with target 5.0 is the identity") {
  StableRng rng(17);
  const Corpus c = content_fixture(rng);
  const auto pool = select_well_written(c, Rubric::content);
  const Essay out = corrupt_content(c.essays[0], 5.0, pool, 99);
  CHECK(out.text == c.essays[0].text);
  CHECK(out.scores.content == 5.0);
  CHECK_FALSE(out.scores.organization);
  CHECK_FALSE(out.scores.language);
  REQUIRE(out.corruption);
  CHECK(out.corruption->n_corruptions == 0);
  CHECK(out.provenance == Provenance::synthetic);
  CHECK(out.source_ids == std::vector<std::string>{"src"});
}

TEST_CASE("corrupt_content replaces k positions with out-of-prompt sentences") {
  StableRng rng(23);
  const Corpus c = content_fixture(rng, 20);
  const auto pool = select_well_written(c, Rubric::content);
  const Essay& src = c.essays[0];
  const Essay out = corrupt_content(src, 1.0, pool, 1234);

  REQUIRE(out.corruption);
  const CorruptionRecord& rec = *out.corruption;
  CHECK(rec.n_corruptions == 16);  // 20 * (5-1)/5
  CHECK(rec.affected_indices.size() == 16);
  CHECK(rec.donors.size() == 16);
  CHECK(out.sentences.size() == src.sentences.size());

  std::set<int> distinct(rec.affected_indices.begin(), rec.affected_indices.end());
  CHECK(distinct.size() == 16);
  for (int idx : rec.affected_indices) {
    CHECK(idx >= 0);
    CHECK(idx < static_cast<int>(src.sentences.size()));
  }
  for (std::size_t i = 0; i < rec.donors.size(); ++i) {
    const Essay* donor = c.find(rec.donors[i]);
    REQUIRE(donor != nullptr);
    CHECK(donor->prompt_id != src.prompt_id);
    // the replacement text really comes from that donor
    const std::string& replaced =
        out.sentences[static_cast<std::size_t>(rec.affected_indices[i])].text;
    bool found = false;
    for (const auto& s : donor->sentences) found = found || s.text == replaced;
    CHECK(found);
  }
  // untouched positions keep the source text
  for (std::size_t i = 0; i < out.sentences.size(); ++i)
    if (!distinct.count(static_cast<int>(i)))
      CHECK(out.sentences[i].text == src.sentences[i].text);
  // source ids: base essay plus donors, no duplicates
  CHECK(out.source_ids.front() == "src");
  std::set<std::string> unique_sources(out.source_ids.begin(), out.source_ids.end());
  CHECK(unique_sources.size() == out.source_ids.size());

  // determinism
  const Essay again = corrupt_content(src, 1.0, pool, 1234);
  CHECK(again == out);
  const Essay other = corrupt_content(src, 1.0, pool, 1235);
  CHECK(other.text != out.text);  // overwhelmingly likely under a different stream
}

TEST_CASE("corrupt_content requires an out-of-prompt donor") {
  StableRng rng(29);
  Corpus c;
  c.essays.push_back(testsupport::make_essay("src", "pa", 10, rng));
  c.essays.back().scores.set(Rubric::content, 5.0);
  c.essays.push_back(testsupport::make_essay("same", "pa", 10, rng));
  c.essays.back().scores.set(Rubric::content, 4.5);
  const auto pool = select_well_written(c, Rubric::content);
  CHECK_THROWS_WITH(corrupt_content(c.essays[0], 2.0, pool, 7),
                    Catch::Matchers::ContainsSubstring("out-of-domain"));
}

TEST_CASE("corrupt_organization swaps preserve the sentence multiset") {
  StableRng rng(31);
  const Essay src = testsupport::make_essay("e", "p", 10, rng);

  SECTION("target 5.0 is the identity") {
    const Essay out = corrupt_organization(src, 5.0, 5);
    CHECK(out.text == src.text);
    CHECK(out.corruption->affected_indices.empty());
  }

  SECTION("target 2.5 on 10 sentences records exactly 5 swap pairs") {
    const Essay out = corrupt_organization(src, 2.5, 5);
    REQUIRE(out.corruption);
    CHECK(out.corruption->n_corruptions == 5);
    REQUIRE(out.corruption->affected_indices.size() == 10);  // flattened pairs
    for (std::size_t p = 0; p < 10; p += 2) {
      const int i = out.corruption->affected_indices[p];
      const int j = out.corruption->affected_indices[p + 1];
      CHECK(i != j);
      CHECK(i >= 0);
      CHECK(j >= 0);
      CHECK(i < 10);
      CHECK(j < 10);
    }
    CHECK(out.scores.organization == 2.5);
    CHECK_FALSE(out.scores.content);
  }

  SECTION("multiset preservation over random targets") {
    StableRng seeds(77);
    for (int iter = 0; iter < 100; ++iter) {
      const double target = 1.0 + 0.5 * static_cast<double>(seeds.below(9));
      const Essay out = corrupt_organization(src, target, seeds.next());
      auto a = [](const Essay& e) {
        std::vector<std::string> t;
        for (const auto& s : e.sentences) t.push_back(s.text);
        std::sort(t.begin(), t.end());
        return t;
      };
      CHECK(a(out) == a(src));
    }
  }
}

TEST_CASE("corrupt_organization needs two sentences when k >= 1") {
  StableRng rng(37);
  const Essay one = testsupport::make_essay("one", "p", 1, rng);
  CHECK_THROWS_AS(corrupt_organization(one, 1.0, 3), Error);
  CHECK_NOTHROW(corrupt_organization(one, 5.0, 3));  // k == 0
}

TEST_CASE("corrupt_language draws replacements from the pool") {
  StableRng rng(41);
  const Essay src = testsupport::make_essay("e", "p", 15, rng);
  const UngrammaticalPool pool = testsupport::make_pool(20, rng);

  SECTION("identity at 5.0") {
    const Essay out = corrupt_language(src, 5.0, pool, 1);
    CHECK(out.text == src.text);
  }

  SECTION("k positions carry pool text, donors are pool ids") {
    const Essay out = corrupt_language(src, 4.0, pool, 2);  // k = 3
    REQUIRE(out.corruption);
    const auto& rec = *out.corruption;
    CHECK(rec.n_corruptions == 3);
    CHECK_FALSE(rec.with_replacement);
    REQUIRE(rec.donors.size() == 3);
    std::set<std::string> donor_set(rec.donors.begin(), rec.donors.end());
    CHECK(donor_set.size() == 3);  // without replacement
    for (std::size_t i = 0; i < 3; ++i) {
      const PoolSentence* ps = pool.find(rec.donors[i]);
      REQUIRE(ps != nullptr);
      CHECK(out.sentences[static_cast<std::size_t>(rec.affected_indices[i])].text ==
            ps->text);
    }
    CHECK(out.scores.language == 4.0);
    CHECK(out.source_ids == std::vector<std::string>{"e"});  // pool ids are not essays
  }

  SECTION("small pools fall back to with-replacement and say so") {
    const UngrammaticalPool tiny = testsupport::make_pool(2, rng);
    const Essay out = corrupt_language(src, 1.0, tiny, 3);  // k = 12 > 2
    REQUIRE(out.corruption);
    CHECK(out.corruption->with_replacement);
    CHECK(out.corruption->donors.size() == 12);
  }

  SECTION("empty pool is an error") {
    const UngrammaticalPool empty;
    CHECK_THROWS_WITH(corrupt_language(src, 3.0, empty, 4),
                      Catch::Matchers::ContainsSubstring("pool is empty"));
  }
}

static const char* kM2Fixture =
    "S This sentence have nine edit here for the test .\n"
    "A 0 1|||R:DET|||The|||REQUIRED|||-NONE-|||0\n"
    "A 2 3|||R:VERB:SVA|||has|||REQUIRED|||-NONE-|||0\n"
    "A 3 4|||R:ADJ|||many|||REQUIRED|||-NONE-|||0\n"
    "A 4 5|||R:NOUN:NUM|||edits|||REQUIRED|||-NONE-|||0\n"
    "A 5 6|||R:ADV|||right|||REQUIRED|||-NONE-|||0\n"
    "A 6 7|||R:PREP|||in|||REQUIRED|||-NONE-|||0\n"
    "A 7 8|||R:DET|||this|||REQUIRED|||-NONE-|||0\n"
    "A 8 9|||R:NOUN|||case|||REQUIRED|||-NONE-|||0\n"
    "A 9 10|||R:PUNCT|||.|||REQUIRED|||-NONE-|||0\n"
    "\n"
    "S Ten edits in this sentence .\n"
    "A 0 1|||R:X|||a|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||b|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||c|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||d|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||e|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||f|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||g|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||h|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||i|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||j|||REQUIRED|||-NONE-|||0\n"
    "\n"
    "S Eleven lines but one noop .\n"
    "A 0 1|||R:X|||a|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||b|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||c|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||d|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||e|||REQUIRED|||-NONE-|||0\n"
    "A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||f|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||g|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||h|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||i|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||j|||REQUIRED|||-NONE-|||0\n"
    "\n"
    "S Twelve edits make this one very ungrammatical indeed .\n"
    "A 0 1|||R:X|||a|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||b|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||c|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||d|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||e|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||f|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||g|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||h|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||i|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||j|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||k|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:X|||l|||REQUIRED|||-NONE-|||0\n";

TEST_CASE("build_ungrammatical_pool keeps only sentences with > threshold edits") {
  std::istringstream in(kM2Fixture);
  const UngrammaticalPool pool = build_ungrammatical_pool(in, 10);
  REQUIRE(pool.sentences.size() == 1);
  CHECK(pool.sentences[0].text ==
        "Twelve edits make this one very ungrammatical indeed .");
  CHECK(pool.sentences[0].edit_count == 12);
  CHECK(pool.sentences[0].id == "m2:37");  // S line number in the fixture
}

TEST_CASE("build_ungrammatical_pool boundary and noop handling") {
  // exactly threshold edits are excluded ("over 10" is strict)
  std::istringstream in(kM2Fixture);
  const UngrammaticalPool t9 = build_ungrammatical_pool(in, 9);
  REQUIRE(t9.sentences.size() == 3);  // 10, 10-effective and 12-edit blocks
  CHECK(t9.sentences[0].edit_count == 10);
  // the 11-line block counts 10 effective edits because of the noop
  std::istringstream in2(kM2Fixture);
  const UngrammaticalPool t10 = build_ungrammatical_pool(in2, 10);
  for (const auto& s : t10.sentences) CHECK(s.edit_count > 10);
}

TEST_CASE("build_ungrammatical_pool rejects an A-line before any S-line") {
  std::istringstream in("A 0 1|||R:X|||a|||REQUIRED|||-NONE-|||0\n");
  CHECK_THROWS_WITH(build_ungrammatical_pool(in, 10),
                    Catch::Matchers::ContainsSubstring("A-line before S-line"));
}

TEST_CASE("generate_balanced emits equal counts per score class") {
  StableRng rng(55);
  Corpus c = testsupport::make_augmentable_corpus(10, 3, Rubric::organization, rng);

  BalancedOptions opts;
  opts.rubric = Rubric::organization;
  opts.n_aug = 2.0;
  opts.seed = 7;
  const Corpus out = generate_balanced(c, opts);
  CHECK(out.essays.size() == 180);  // 9 classes x 20

  std::map<double, int> per_class;
  std::set<std::string> ids;
  for (const auto& e : out.essays) {
    REQUIRE(e.scores.organization);
    per_class[*e.scores.organization]++;
    ids.insert(e.id);
  }
  REQUIRE(per_class.size() == 9);
  for (const auto& [score, count] : per_class) CHECK(count == 20);
  CHECK(ids.size() == out.essays.size());
}

TEST_CASE("generate_balanced rounding policy for small n_aug") {
  StableRng rng(56);
  Corpus c = testsupport::make_augmentable_corpus(10, 3, Rubric::organization, rng);
  BalancedOptions opts;
  opts.rubric = Rubric::organization;
  opts.n_aug = 0.125;  // 1.25 per class rounds to 1
  opts.seed = 7;
  const Corpus out = generate_balanced(c, opts);
  CHECK(out.essays.size() == 9);
}

TEST_CASE("generate_balanced is deterministic for a fixed seed") {
  StableRng rng(57);
  Corpus c = testsupport::make_augmentable_corpus(8, 3, Rubric::content, rng);
  BalancedOptions opts;
  opts.rubric = Rubric::content;
  opts.n_aug = 1.0;
  opts.seed = 99;
  const Corpus a = generate_balanced(c, opts);
  const Corpus b = generate_balanced(c, opts);
  std::ostringstream sa, sb;
  write_jsonl(a, sa);
  write_jsonl(b, sb);
  CHECK(sa.str() == sb.str());
  opts.seed = 100;
  const Corpus d = generate_balanced(c, opts);
  std::ostringstream sd;
  write_jsonl(d, sd);
  CHECK(sd.str() != sa.str());
}

TEST_CASE("generate_balanced language path requires a pool") {
  StableRng rng(58);
  Corpus c = testsupport::make_augmentable_corpus(5, 2, Rubric::language, rng);
  BalancedOptions opts;
  opts.rubric = Rubric::language;
  opts.n_aug = 0.5;
  CHECK_THROWS_WITH(generate_balanced(c, opts),
                    Catch::Matchers::ContainsSubstring("pool"));
  const UngrammaticalPool pool = testsupport::make_pool(30, rng);
  opts.pool = &pool;
  const Corpus out = generate_balanced(c, opts);
  CHECK(out.essays.size() == 9 * 3);  // round(0.5 * 5) = 3 per class
  for (const auto& e : out.essays) {
    REQUIRE(e.corruption);
    for (const auto& d : e.corruption->donors) CHECK(pool.find(d) != nullptr);
  }
}
