#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace essaykit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Rubric { content, organization, language };

inline const char* to_string(Rubric r) {
  switch (r) {
    case Rubric::content: return "content";
    case Rubric::organization: return "organization";
    case Rubric::language: return "language";
  }
  return "?";
}

inline Rubric rubric_from_string(const std::string& s) {
  if (s == "content") return Rubric::content;
  if (s == "organization") return Rubric::organization;
  if (s == "language") return Rubric::language;
  throw Error("unknown rubric '" + s + "'");
}

inline constexpr Rubric kAllRubrics[] = {Rubric::content, Rubric::organization,
                                         Rubric::language};

enum class Provenance { original, standardized, synthetic };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::original: return "original";
    case Provenance::standardized: return "standardized";
    case Provenance::synthetic: return "synthetic";
  }
  return "?";
}

inline Provenance provenance_from_string(const std::string& s) {
  if (s == "original") return Provenance::original;
  if (s == "standardized") return Provenance::standardized;
  if (s == "synthetic") return Provenance::synthetic;
  throw Error("unknown provenance '" + s + "'");
}

enum class Split { train, val, test };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

inline Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw Error("unknown split '" + s + "'");
}

// Per-rubric scores on the 1.0-5.0 scale. A missing rubric is absent, not
// zero; the total is defined only when all three rubrics are present.
struct RubricScores {
  std::optional<double> content;
  std::optional<double> organization;
  std::optional<double> language;

  std::optional<double>& ref(Rubric r) {
    switch (r) {
      case Rubric::organization: return organization;
      case Rubric::language: return language;
      default: return content;
    }
  }
  std::optional<double> get(Rubric r) const {
    switch (r) {
      case Rubric::organization: return organization;
      case Rubric::language: return language;
      default: return content;
    }
  }
  void set(Rubric r, double v) { ref(r) = v; }

  std::optional<double> total() const {
    if (content && organization && language)
      return *content + *organization + *language;
    return std::nullopt;
  }

  bool empty() const { return !content && !organization && !language; }

  bool operator==(const RubricScores&) const = default;
};

struct Sentence {
  int index = 0;      // 0-based, contiguous within an essay
  std::string text;   // non-empty after trimming
  int token_count = 0;

  bool operator==(const Sentence&) const = default;
};

// Audit trail of one corruption application. For organization the
// affected_indices are the swap pairs flattened in draw order
// (i0, j0, i1, j1, ...); for content and language they are the distinct
// replaced positions in ascending order, with donors aligned per position.
struct CorruptionRecord {
  Rubric rubric = Rubric::content;
  double target = 0.0;               // score the synthetic essay carries
  int n_corruptions = 0;             // corruption_count(sentences, target)
  std::vector<int> affected_indices;
  std::vector<std::string> donors;   // essay ids (content) or pool ids (language)
  std::uint64_t rng_seed = 0;
  bool with_replacement = false;     // language fallback when k exceeds pool size

  bool operator==(const CorruptionRecord&) const = default;
};

struct Essay {
  std::string id;
  std::string prompt_id;
  std::string text;
  std::vector<Sentence> sentences;   // derived from text; not serialized
  RubricScores scores;
  Provenance provenance = Provenance::original;
  std::vector<std::string> source_ids;  // empty for originals
  std::optional<Split> split;
  std::optional<CorruptionRecord> corruption;

  // Field equality over everything that round-trips through JSONL.
  // Sentences are a pure function of text and are skipped.
  bool operator==(const Essay& o) const {
    return id == o.id && prompt_id == o.prompt_id && text == o.text &&
           scores == o.scores && provenance == o.provenance &&
           source_ids == o.source_ids && split == o.split &&
           corruption == o.corruption;
  }
};

struct Corpus {
  std::vector<Essay> essays;
  std::map<std::string, std::string> prompts;  // prompt_id -> prompt text

  const Essay* find(const std::string& id) const {
    for (const auto& e : essays)
      if (e.id == id) return &e;
    return nullptr;
  }

  // Unresolved prompt ids are reported, not rejected, so partially keyed
  // corpora stay usable.
  std::vector<std::string> unresolved_prompt_ids() const {
    std::vector<std::string> out;
    for (const auto& e : essays) {
      if (!e.prompt_id.empty() && !prompts.count(e.prompt_id)) {
        bool seen = false;
        for (const auto& u : out) seen = seen || u == e.prompt_id;
        if (!seen) out.push_back(e.prompt_id);
      }
    }
    return out;
  }

  bool operator==(const Corpus& o) const {
    return essays == o.essays && prompts == o.prompts;
  }
};

// Ordered score classes for kappa and for balanced generation. Defaults to
// the nine half-point classes 1.0, 1.5, ..., 5.0.
struct ScoreGrid {
  std::vector<double> values;

  static ScoreGrid half_point() {
    ScoreGrid g;
    for (int i = 0; i <= 8; ++i) g.values.push_back(1.0 + 0.5 * i);
    return g;
  }

  std::size_t size() const { return values.size(); }

  void validate() const {
    if (values.size() < 2) throw Error("score grid needs at least 2 classes");
    for (std::size_t i = 1; i < values.size(); ++i)
      if (!(values[i - 1] < values[i]))
        throw Error("score grid values must be strictly increasing");
  }
};

}  // namespace essaykit
