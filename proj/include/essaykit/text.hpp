#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "essaykit/corpus.hpp"

namespace essaykit {

// ---------------------------------------------------------------------------
// UTF-8 scanning. Decoding is total: an invalid byte is consumed as a
// single one-byte "codepoint" so no input can make these functions fail.
// ---------------------------------------------------------------------------

struct Utf8Char {
  char32_t cp = 0;
  int len = 1;
};

inline Utf8Char decode_utf8(std::string_view s, std::size_t i) {
  const unsigned char b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return {b0, 1};
  auto cont = [&](std::size_t k) {
    return i + k < s.size() &&
           (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  auto cb = [&](std::size_t k) {
    return static_cast<char32_t>(static_cast<unsigned char>(s[i + k]) & 0x3F);
  };
  if ((b0 & 0xE0) == 0xC0 && cont(1))
    return {(static_cast<char32_t>(b0 & 0x1F) << 6) | cb(1), 2};
  if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2))
    return {(static_cast<char32_t>(b0 & 0x0F) << 12) | (cb(1) << 6) | cb(2), 3};
  if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3))
    return {(static_cast<char32_t>(b0 & 0x07) << 18) | (cb(1) << 12) |
                (cb(2) << 6) | cb(3),
            4};
  return {b0, 1};  // stray continuation or truncated sequence
}

inline bool is_space_cp(char32_t c) {
  switch (c) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
    case 0x00A0: case 0x1680: case 0x2028: case 0x2029: case 0x202F:
    case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

// Punctuation stripped from token edges. Interior apostrophes and hyphens
// survive, so contractions and hyphenated compounds stay whole.
inline bool is_edge_punct_cp(char32_t c) {
  if (c < 0x80) {
    return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
           (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
  }
  switch (c) {
    case 0x2018: case 0x2019: case 0x201C: case 0x201D: case 0x201A:
    case 0x201E: case 0x2013: case 0x2014: case 0x2026: case 0x00AB:
    case 0x00BB: case 0x00A1: case 0x00BF: case 0x00B7:
      return true;
    default:
      return false;
  }
}

// Collapses every whitespace run to a single ' ' and trims the ends.
inline std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < text.size()) {
    const Utf8Char u = decode_utf8(text, i);
    if (is_space_cp(u.cp)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.append(text.substr(i, u.len));
    }
    i += u.len;
  }
  return out;
}

// Lowercased word tokens: split on whitespace, strip edge punctuation,
// ASCII lowercase. Never throws on any byte sequence.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    Utf8Char u = decode_utf8(text, i);
    if (is_space_cp(u.cp)) {
      i += u.len;
      continue;
    }
    // collect one whitespace-delimited run as codepoint spans
    std::vector<std::pair<std::size_t, Utf8Char>> run;
    while (i < n) {
      u = decode_utf8(text, i);
      if (is_space_cp(u.cp)) break;
      run.emplace_back(i, u);
      i += u.len;
    }
    std::size_t lo = 0, hi = run.size();
    while (lo < hi && is_edge_punct_cp(run[lo].second.cp)) ++lo;
    while (hi > lo && is_edge_punct_cp(run[hi - 1].second.cp)) --hi;
    if (lo >= hi) continue;
    std::string tok;
    for (std::size_t k = lo; k < hi; ++k) {
      const auto& [pos, ch] = run[k];
      if (ch.cp < 0x80) {
        char c = static_cast<char>(ch.cp);
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        tok.push_back(c);
      } else {
        tok.append(text.substr(pos, ch.len));
      }
    }
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

// Abbreviations that end with '.' without ending a sentence. Compared
// lowercase, without the final dot ("e.g." is looked up as "e.g").
inline const std::unordered_set<std::string>& sentence_abbreviations() {
  static const std::unordered_set<std::string> abbr = {
      "mr", "mrs", "ms", "dr", "prof", "rev", "gen", "rep", "sen", "st",
      "sr", "jr", "mt", "capt", "sgt", "col", "gov", "pres",
      "vs", "etc", "al", "cf", "ca", "approx", "est",
      "e.g", "i.e", "a.m", "p.m", "u.s", "u.k", "u.n", "d.c",
      "ph.d", "b.a", "m.a", "b.sc", "m.sc", "m.d",
      "no", "nos", "fig", "figs", "vol", "vols", "ch", "sec", "pp",
      "dept", "univ", "assn", "bros", "inc", "ltd", "co", "corp",
      "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept",
      "oct", "nov", "dec", "mon", "tue", "tues", "wed", "thu", "thurs",
      "fri", "sat", "sun"};
  return abbr;
}

namespace detail {

inline bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

inline bool is_closer(char32_t c) {
  return c == '"' || c == '\'' || c == ')' || c == ']' || c == 0x2019 ||
         c == 0x201D || c == 0x00BB;
}

// Word immediately before position i in normalized text, lowercased, with
// leading opening punctuation removed. Used for the abbreviation check.
inline std::string word_before(const std::string& s, std::size_t i) {
  std::size_t b = i;
  while (b > 0 && s[b - 1] != ' ') --b;
  std::string w = s.substr(b, i - b);
  std::size_t lo = 0;
  while (lo < w.size() && (w[lo] == '(' || w[lo] == '[' || w[lo] == '"' ||
                           w[lo] == '\''))
    ++lo;
  w = w.substr(lo);
  for (char& c : w)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return w;
}

}  // namespace detail

// Deterministic rule-based splitter. A boundary is a terminal (. ! ?),
// optionally followed by closing quotes/brackets, followed by whitespace
// and an uppercase letter or digit. A '.' preceded by a known abbreviation
// or a single-letter initial does not split. Joining the result with
// single spaces reproduces the whitespace-normalized input.
inline std::vector<Sentence> segment_sentences(std::string_view text) {
  const std::string norm = normalize_whitespace(text);
  std::vector<Sentence> out;
  if (norm.empty()) return out;

  std::vector<std::string> pieces;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < norm.size()) {
    if (!detail::is_terminal(norm[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    // run of terminals ("?!", "...") belongs to the same boundary
    while (j < norm.size() && detail::is_terminal(norm[j])) ++j;
    while (j < norm.size()) {
      const Utf8Char u = decode_utf8(norm, j);
      if (!detail::is_closer(u.cp)) break;
      j += u.len;
    }
    if (j >= norm.size() || norm[j] != ' ') {
      i = j;
      continue;
    }
    const char nxt = norm[j + 1];
    const bool starts_sentence =
        (nxt >= 'A' && nxt <= 'Z') || (nxt >= '0' && nxt <= '9');
    bool abbreviated = false;
    if (norm[i] == '.' && j == i + 1) {
      const std::string w = detail::word_before(norm, i);
      abbreviated = (w.size() == 1 && w[0] >= 'a' && w[0] <= 'z') ||
                    sentence_abbreviations().count(w) > 0;
    }
    if (starts_sentence && !abbreviated) {
      pieces.push_back(norm.substr(start, j - start));
      start = j + 1;  // skip the single separating space
    }
    i = j;
  }
  pieces.push_back(norm.substr(start));

  out.reserve(pieces.size());
  for (auto& p : pieces) {
    Sentence s;
    s.index = static_cast<int>(out.size());
    s.token_count = static_cast<int>(tokenize(p).size());
    s.text = std::move(p);
    out.push_back(std::move(s));
  }
  return out;
}

// Rebuilds an essay's text and sentence list from a list of sentence
// texts (used after corruption, where the sentence structure is known).
inline void rebuild_from_sentences(Essay& e, std::vector<std::string> texts) {
  e.sentences.clear();
  e.text.clear();
  for (auto& t : texts) {
    if (!e.text.empty()) e.text.push_back(' ');
    e.text += t;
    Sentence s;
    s.index = static_cast<int>(e.sentences.size());
    s.token_count = static_cast<int>(tokenize(t).size());
    s.text = std::move(t);
    e.sentences.push_back(std::move(s));
  }
}

}  // namespace essaykit
