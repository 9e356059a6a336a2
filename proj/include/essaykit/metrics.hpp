#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "essaykit/corpus.hpp"
#include "essaykit/text.hpp"

namespace essaykit {

// ---------------------------------------------------------------------------
// Quadratic weighted kappa over an ordinal score grid
// ---------------------------------------------------------------------------

// Index of the grid value nearest to x; a tie goes to the higher index.
inline std::size_t bin_score(double x, const ScoreGrid& grid) {
  grid.validate();
  const auto& g = grid.values;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double mid = 0.5 * (g[i] + g[i + 1]);
    if (x < mid) return i;
  }
  return g.size() - 1;
}

namespace detail {

inline std::size_t grid_index_exact(double x, const ScoreGrid& grid) {
  for (std::size_t i = 0; i < grid.values.size(); ++i)
    if (std::abs(x - grid.values[i]) <= 1e-9) return i;
  throw Error("score " + std::to_string(x) + " is not on the grid");
}

}  // namespace detail

// Cohen's kappa with quadratic weights w_ij = (i-j)^2 / (K-1)^2 and the
// expected matrix from the outer product of the marginals. When the
// weighted expectation is zero (all mass in one cell for both raters) the
// value is 1.0 for identical vectors and an error otherwise.
inline double qwk(const std::vector<double>& pred, const std::vector<double>& gold,
                  const ScoreGrid& grid = ScoreGrid::half_point()) {
  grid.validate();
  if (pred.size() != gold.size())
    throw Error("qwk: prediction and gold lengths differ (" +
                std::to_string(pred.size()) + " vs " + std::to_string(gold.size()) + ")");
  if (pred.empty()) throw Error("qwk: empty input");

  const std::size_t k = grid.size();
  std::vector<std::vector<double>> observed(k, std::vector<double>(k, 0.0));
  for (std::size_t t = 0; t < pred.size(); ++t) {
    const std::size_t i = detail::grid_index_exact(pred[t], grid);
    const std::size_t j = detail::grid_index_exact(gold[t], grid);
    observed[i][j] += 1.0;
  }
  std::vector<double> row(k, 0.0), col(k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      row[i] += observed[i][j];
      col[j] += observed[i][j];
    }
  const double n = static_cast<double>(pred.size());
  const double denom_scale = static_cast<double>((k - 1) * (k - 1));
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const double d = static_cast<double>(i) - static_cast<double>(j);
      const double w = d * d / denom_scale;
      num += w * observed[i][j];
      den += w * row[i] * col[j] / n;
    }
  if (den == 0.0) {
    if (pred == gold) return 1.0;
    throw Error("qwk: undefined (no weighted expected disagreement)");
  }
  return 1.0 - num / den;
}

// ---------------------------------------------------------------------------
// Corpus analytics
// ---------------------------------------------------------------------------

struct AnalyticsLexicons {
  std::unordered_set<std::string> stopwords;
  std::vector<std::vector<std::string>> transitions;  // tokenized phrases
  std::unordered_set<std::string> dictionary;
};

// One entry per line, UTF-8, '#' comments. Entries are lowercased.
inline std::vector<std::string> load_lexicon_lines(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::size_t b = 0, e = line.size();
    while (b < e && (line[b] == ' ' || line[b] == '\t' || line[b] == '\r')) ++b;
    while (e > b && (line[e - 1] == ' ' || line[e - 1] == '\t' || line[e - 1] == '\r')) --e;
    if (b == e) continue;
    std::string entry = line.substr(b, e - b);
    for (char& c : entry)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    out.push_back(std::move(entry));
  }
  return out;
}

inline std::unordered_set<std::string> load_word_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon '" + path.string() + "'");
  std::unordered_set<std::string> out;
  for (auto& w : load_lexicon_lines(in)) out.insert(std::move(w));
  return out;
}

inline std::vector<std::vector<std::string>> load_phrase_list(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon '" + path.string() + "'");
  std::vector<std::vector<std::string>> out;
  for (const auto& lineent : load_lexicon_lines(in)) {
    auto toks = tokenize(lineent);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

// Frozen syllable heuristic: count vowel groups (aeiouy) over the token's
// letters, drop a silent final 'e' (but not '-le') and a silent '-ed'
// (but not '-ted'/'-ded'), floor at one. Deterministic by construction;
// close to, but not identical with, any particular published tool.
inline int count_syllables(const std::string& token) {
  std::string w;
  for (char c : token) {
    if (c >= 'a' && c <= 'z') w.push_back(c);
    else if (c >= 'A' && c <= 'Z') w.push_back(static_cast<char>(c - 'A' + 'a'));
  }
  if (w.empty()) return 1;
  auto vowel = [](char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
  };
  int groups = 0;
  bool in_group = false;
  for (char c : w) {
    if (vowel(c)) {
      if (!in_group) ++groups;
      in_group = true;
    } else {
      in_group = false;
    }
  }
  auto ends_with = [&](const char* suf) {
    const std::size_t len = std::char_traits<char>::length(suf);
    return w.size() >= len && w.compare(w.size() - len, len, suf) == 0;
  };
  if (groups > 1 && ends_with("e") && !ends_with("le")) --groups;
  if (groups > 1 && ends_with("ed") && !ends_with("ted") && !ends_with("ded")) --groups;
  return std::max(groups, 1);
}

struct AnalyticsReport {
  std::size_t n_sentences = 0;
  std::size_t n_tokens = 0;
  std::size_t n_tokens_no_stopwords = 0;
  std::size_t n_transition_signals = 0;
  std::size_t n_typos = 0;
  std::optional<double> ttr;                  // unique / total tokens
  std::optional<double> flesch_reading_ease;  // 206.835 - 1.015 w/s - 84.6 syl/w
  std::optional<double> fk_grade;             // 0.39 w/s + 11.8 syl/w - 15.59
};

namespace detail {

inline bool has_digit(const std::string& t) {
  for (char c : t)
    if (c >= '0' && c <= '9') return true;
  return false;
}

inline bool has_ascii_letter(const std::string& t) {
  for (char c : t)
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return true;
  return false;
}

// A hyphenated compound counts as spelled if every part is in the
// dictionary, so "well-written" needs no dedicated entry.
inline bool in_dictionary(const std::string& t,
                          const std::unordered_set<std::string>& dict) {
  if (dict.count(t)) return true;
  if (t.find('-') == std::string::npos) return false;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dash = t.find('-', start);
    const std::string part = t.substr(start, dash == std::string::npos
                                                 ? std::string::npos
                                                 : dash - start);
    if (part.empty() || !dict.count(part)) return false;
    if (dash == std::string::npos) return true;
    start = dash + 1;
  }
}

}  // namespace detail

inline AnalyticsReport analyze(const Essay& essay, const AnalyticsLexicons& lex) {
  AnalyticsReport rep;
  rep.n_sentences = essay.sentences.size();
  const std::vector<std::string> tokens = tokenize(essay.text);
  rep.n_tokens = tokens.size();

  std::unordered_set<std::string> unique(tokens.begin(), tokens.end());
  for (const auto& t : tokens) {
    if (!lex.stopwords.count(t)) ++rep.n_tokens_no_stopwords;
    if (detail::has_digit(t)) continue;
    if (!detail::has_ascii_letter(t)) continue;
    if (!detail::in_dictionary(t, lex.dictionary)) ++rep.n_typos;
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (const auto& phrase : lex.transitions) {
      if (phrase.size() > tokens.size() - i) continue;
      bool match = true;
      for (std::size_t j = 0; j < phrase.size() && match; ++j)
        match = tokens[i + j] == phrase[j];
      if (match) ++rep.n_transition_signals;
    }
  }

  if (!tokens.empty()) {
    rep.ttr = static_cast<double>(unique.size()) / static_cast<double>(tokens.size());
    if (rep.n_sentences > 0) {
      long long syllables = 0;
      for (const auto& t : tokens) syllables += count_syllables(t);
      const double words_per_sentence =
          static_cast<double>(tokens.size()) / static_cast<double>(rep.n_sentences);
      const double syllables_per_word =
          static_cast<double>(syllables) / static_cast<double>(tokens.size());
      rep.flesch_reading_ease =
          206.835 - 1.015 * words_per_sentence - 84.6 * syllables_per_word;
      rep.fk_grade = 0.39 * words_per_sentence + 11.8 * syllables_per_word - 15.59;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// One-way ANOVA F statistic. The caller compares F against tabulated
// critical values; p-values are out of scope here.
// ---------------------------------------------------------------------------

struct AnovaResult {
  double f = 0.0;  // +infinity when SSW == 0 with SSB > 0 (saturation)
  std::size_t df_between = 0;
  std::size_t df_within = 0;
  double ss_between = 0.0;
  double ss_within = 0.0;
};

inline AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw Error("anova: need at least 2 groups");
  std::size_t n = 0;
  for (const auto& g : groups) {
    if (g.empty()) throw Error("anova: empty group");
    n += g.size();
  }
  if (n <= groups.size()) throw Error("anova: need more observations than groups");

  double grand_sum = 0.0;
  for (const auto& g : groups)
    for (double v : g) grand_sum += v;
  const double grand_mean = grand_sum / static_cast<double>(n);

  AnovaResult r;
  for (const auto& g : groups) {
    double sum = 0.0;
    for (double v : g) sum += v;
    const double mean = sum / static_cast<double>(g.size());
    r.ss_between += static_cast<double>(g.size()) * (mean - grand_mean) * (mean - grand_mean);
    for (double v : g) r.ss_within += (v - mean) * (v - mean);
  }
  r.df_between = groups.size() - 1;
  r.df_within = n - groups.size();

  const double msb = r.ss_between / static_cast<double>(r.df_between);
  const double msw = r.ss_within / static_cast<double>(r.df_within);
  if (msw == 0.0) {
    r.f = (msb == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    r.f = msb / msw;
  }
  return r;
}

}  // namespace essaykit
