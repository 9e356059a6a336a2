#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "essaykit/corpus.hpp"
#include "essaykit/rng.hpp"
#include "essaykit/text.hpp"

namespace essaykit {

// ---------------------------------------------------------------------------
// Corruption count: round(n_sentences * (5.0 - target) / 5.0), ties rounded
// half away from zero. The tie rule is pinned here because platform default
// rounding (banker's) is not.
// ---------------------------------------------------------------------------

inline long long round_half_away(double v) {
  return static_cast<long long>(v < 0 ? std::ceil(v - 0.5) : std::floor(v + 0.5));
}

inline int corruption_count(int n_sentences, double target) {
  if (n_sentences < 0) throw Error("negative sentence count");
  return static_cast<int>(round_half_away(n_sentences * (5.0 - target) / 5.0));
}

// ---------------------------------------------------------------------------
// Pools
// ---------------------------------------------------------------------------

// Essays scoring 4.5 or 5.0 on one rubric; the sources (and, for content,
// the donors) of every corruption.
struct WellWrittenPool {
  Rubric rubric = Rubric::content;
  std::vector<const Essay*> essays;
};

inline bool is_well_written_score(double s) {
  return std::abs(s - 4.5) < 1e-9 || std::abs(s - 5.0) < 1e-9;
}

inline WellWrittenPool select_well_written(const Corpus& corpus, Rubric rubric) {
  WellWrittenPool pool;
  pool.rubric = rubric;
  for (const auto& e : corpus.essays) {
    const auto s = e.scores.get(rubric);
    if (s && is_well_written_score(*s)) pool.essays.push_back(&e);
  }
  if (pool.essays.empty())
    throw Error(std::string("no well-written essays (scored 4.5 or 5.0 on ") +
                to_string(rubric) + "); cannot augment");
  return pool;
}

struct PoolSentence {
  std::string id;   // "<prefix>:<S-line number>" in the source M2 file
  std::string text;
  int edit_count = 0;
};

// Sentences harvested from an M2 file whose non-noop edit count exceeds
// the threshold (strictly).
struct UngrammaticalPool {
  std::vector<PoolSentence> sentences;
  int threshold = 10;

  const PoolSentence* find(const std::string& id) const {
    for (const auto& s : sentences)
      if (s.id == id) return &s;
    return nullptr;
  }
};

// M2 blocks: one "S <tokens>" line, then zero or more
// "A <start> <end>|||<type>|||<correction>|||..." lines, blank-line
// separated. Annotations typed "noop" do not count as edits.
inline UngrammaticalPool build_ungrammatical_pool(std::istream& in,
                                                  int threshold = 10,
                                                  const std::string& id_prefix = "m2") {
  UngrammaticalPool pool;
  pool.threshold = threshold;

  std::string cur_text;
  std::size_t cur_line = 0;
  int cur_edits = 0;
  bool in_block = false;

  auto flush = [&] {
    if (!in_block) return;
    if (cur_edits > threshold && !cur_text.empty()) {
      pool.sentences.push_back(
          {id_prefix + ":" + std::to_string(cur_line), cur_text, cur_edits});
    }
    in_block = false;
    cur_edits = 0;
    cur_text.clear();
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.size() >= 2 && line[0] == 'S' && line[1] == ' ') {
      flush();  // a new S line starts a new block even without a blank line
      in_block = true;
      cur_text = line.substr(2);
      cur_line = line_no;
    } else if (line.size() >= 2 && line[0] == 'A' && line[1] == ' ') {
      if (!in_block)
        throw Error("malformed M2: A-line before S-line at line " +
                    std::to_string(line_no));
      const std::size_t p0 = line.find("|||");
      if (p0 == std::string::npos)
        throw Error("malformed M2 annotation at line " + std::to_string(line_no));
      const std::size_t p1 = line.find("|||", p0 + 3);
      const std::string type =
          line.substr(p0 + 3, (p1 == std::string::npos ? line.size() : p1) - p0 - 3);
      if (type != "noop") ++cur_edits;
    }
    // other prefixes (e.g. T lines in some variants) are ignored
  }
  flush();
  return pool;
}

inline UngrammaticalPool build_ungrammatical_pool(const std::filesystem::path& path,
                                                  int threshold = 10,
                                                  const std::string& id_prefix = "m2") {
  std::ifstream in(path);
  if (!in) throw Error("cannot open M2 file '" + path.string() + "'");
  return build_ungrammatical_pool(in, threshold, id_prefix);
}

// ---------------------------------------------------------------------------
// Corruption operations. Each is a pure function of (source, target, seed):
// re-running reproduces the identical essay and audit record.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_score(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

inline std::string default_synthetic_id(const Essay& source, Rubric r,
                                        double target) {
  return source.id + "#" + to_string(r) + "@" + format_score(target);
}

// k distinct positions in [0, n), uniform without replacement, ascending.
inline std::vector<int> sample_positions(int n, int k, StableRng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  stable_shuffle(idx, rng);
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline Essay synthetic_shell(const Essay& source, Rubric rubric, double target,
                             std::string id) {
  Essay out;
  out.id = id.empty() ? default_synthetic_id(source, rubric, target) : std::move(id);
  out.prompt_id = source.prompt_id;
  out.provenance = Provenance::synthetic;
  out.source_ids = {source.id};
  out.scores.set(rubric, target);  // only the corrupted rubric is labeled
  return out;
}

}  // namespace detail

// Content: replace k sentences in place with sentences sampled from
// well-written essays on *different prompts* (donor essay uniform among
// out-of-prompt pool members, then one sentence uniform within it). The
// same donor sentence is not reused within one synthetic essay.
inline Essay corrupt_content(const Essay& source, double target,
                             const WellWrittenPool& donor_pool,
                             std::uint64_t seed, std::string new_id = "") {
  const int n = static_cast<int>(source.sentences.size());
  const int k = corruption_count(n, target);
  if (k > n)
    throw Error("corruption count " + std::to_string(k) + " exceeds sentence count " +
                std::to_string(n) + " for essay '" + source.id + "'");

  Essay out = detail::synthetic_shell(source, Rubric::content, target, std::move(new_id));
  CorruptionRecord rec;
  rec.rubric = Rubric::content;
  rec.target = target;
  rec.n_corruptions = k;
  rec.rng_seed = seed;

  std::vector<std::string> texts;
  texts.reserve(source.sentences.size());
  for (const auto& s : source.sentences) texts.push_back(s.text);

  if (k > 0) {
    std::vector<const Essay*> donors;
    for (const Essay* d : donor_pool.essays)
      if (d->prompt_id != source.prompt_id && !d->sentences.empty())
        donors.push_back(d);
    if (donors.empty())
      throw Error("no out-of-domain donor for essay '" + source.id +
                  "' (every pool essay shares prompt '" + source.prompt_id + "')");

    StableRng rng(seed);
    rec.affected_indices = detail::sample_positions(n, k, rng);
    std::set<std::pair<std::string, int>> used;
    for (int pos : rec.affected_indices) {
      const Essay* donor = nullptr;
      const Sentence* sent = nullptr;
      for (int attempt = 0; attempt < 1000; ++attempt) {
        donor = donors[rng.index(donors.size())];
        sent = &donor->sentences[rng.index(donor->sentences.size())];
        if (used.insert({donor->id, sent->index}).second) break;
        if (attempt == 999) break;  // donor supply exhausted: accept a repeat
      }
      texts[static_cast<std::size_t>(pos)] = sent->text;
      rec.donors.push_back(donor->id);
      bool known = false;
      for (const auto& sid : out.source_ids) known = known || sid == donor->id;
      if (!known) out.source_ids.push_back(donor->id);
    }
  }

  rebuild_from_sentences(out, std::move(texts));
  out.corruption = std::move(rec);
  return out;
}

// Organization: k independent swaps of two distinct positions; the sentence
// multiset is untouched. affected_indices holds the swap pairs flattened in
// draw order.
inline Essay corrupt_organization(const Essay& source, double target,
                                  std::uint64_t seed, std::string new_id = "") {
  const int n = static_cast<int>(source.sentences.size());
  const int k = corruption_count(n, target);
  if (k >= 1 && n < 2)
    throw Error("cannot swap sentences: essay '" + source.id +
                "' has fewer than 2 sentences");

  Essay out = detail::synthetic_shell(source, Rubric::organization, target,
                                      std::move(new_id));
  CorruptionRecord rec;
  rec.rubric = Rubric::organization;
  rec.target = target;
  rec.n_corruptions = k;
  rec.rng_seed = seed;

  std::vector<std::string> texts;
  texts.reserve(source.sentences.size());
  for (const auto& s : source.sentences) texts.push_back(s.text);

  StableRng rng(seed);
  for (int s = 0; s < k; ++s) {
    const int i = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
    int j = static_cast<int>(rng.index(static_cast<std::size_t>(n - 1)));
    if (j >= i) ++j;
    std::swap(texts[static_cast<std::size_t>(i)], texts[static_cast<std::size_t>(j)]);
    rec.affected_indices.push_back(i);
    rec.affected_indices.push_back(j);
  }

  rebuild_from_sentences(out, std::move(texts));
  out.corruption = std::move(rec);
  return out;
}

// Language: replace k sentences with ungrammatical pool sentences, drawn
// without replacement within one essay; if k exceeds the pool size the
// draw falls back to with-replacement and the record says so.
inline Essay corrupt_language(const Essay& source, double target,
                              const UngrammaticalPool& pool, std::uint64_t seed,
                              std::string new_id = "") {
  const int n = static_cast<int>(source.sentences.size());
  const int k = corruption_count(n, target);
  if (k > 0 && pool.sentences.empty())
    throw Error("ungrammatical pool is empty; cannot corrupt language");
  if (k > n)
    throw Error("corruption count " + std::to_string(k) + " exceeds sentence count " +
                std::to_string(n) + " for essay '" + source.id + "'");

  Essay out = detail::synthetic_shell(source, Rubric::language, target,
                                      std::move(new_id));
  CorruptionRecord rec;
  rec.rubric = Rubric::language;
  rec.target = target;
  rec.n_corruptions = k;
  rec.rng_seed = seed;

  std::vector<std::string> texts;
  texts.reserve(source.sentences.size());
  for (const auto& s : source.sentences) texts.push_back(s.text);

  if (k > 0) {
    StableRng rng(seed);
    rec.affected_indices = detail::sample_positions(n, k, rng);
    const std::size_t m = pool.sentences.size();
    std::vector<std::size_t> picks;
    if (static_cast<std::size_t>(k) <= m) {
      std::vector<std::size_t> idx(m);
      for (std::size_t i = 0; i < m; ++i) idx[i] = i;
      stable_shuffle(idx, rng);
      picks.assign(idx.begin(), idx.begin() + k);
    } else {
      rec.with_replacement = true;
      for (int i = 0; i < k; ++i) picks.push_back(rng.index(m));
    }
    for (int i = 0; i < k; ++i) {
      const PoolSentence& ps = pool.sentences[picks[static_cast<std::size_t>(i)]];
      texts[static_cast<std::size_t>(rec.affected_indices[static_cast<std::size_t>(i)])] =
          ps.text;
      rec.donors.push_back(ps.id);
    }
  }

  rebuild_from_sentences(out, std::move(texts));
  out.corruption = std::move(rec);
  return out;
}

// ---------------------------------------------------------------------------
// Balanced generation: the same number of synthetic essays for every score
// class. Each synthetic essay draws its source and its corruption from a
// stream derived from (run seed, rubric, class, ordinal), so serial and
// parallel runs emit byte-identical corpora.
// ---------------------------------------------------------------------------

inline double default_n_aug(Rubric r) {
  switch (r) {
    case Rubric::content: return 0.5;
    case Rubric::organization: return 2.0;
    case Rubric::language: return 0.125;
  }
  return 1.0;
}

struct BalancedOptions {
  Rubric rubric = Rubric::content;
  double n_aug = 1.0;
  std::uint64_t seed = 22;
  int jobs = 1;
  ScoreGrid grid = ScoreGrid::half_point();
  const UngrammaticalPool* pool = nullptr;  // required for language
};

inline Corpus generate_balanced(const Corpus& source, const BalancedOptions& opts) {
  opts.grid.validate();
  if (opts.n_aug < 0) throw Error("n_aug must be non-negative");
  if (opts.rubric == Rubric::language && !opts.pool)
    throw Error("language corruption needs an ungrammatical pool");

  const WellWrittenPool pool = select_well_written(source, opts.rubric);
  const long long per_class = round_half_away(opts.n_aug * static_cast<double>(pool.essays.size()));
  const std::size_t n_classes = opts.grid.size();
  const std::size_t total = n_classes * static_cast<std::size_t>(per_class);

  Corpus out;
  out.essays.resize(total);
  const std::uint64_t rubric_tag = static_cast<std::uint64_t>(opts.rubric);

  auto make_one = [&](std::size_t slot) {
    const std::size_t ci = slot / static_cast<std::size_t>(per_class);
    const std::size_t ordinal = slot % static_cast<std::size_t>(per_class);
    const double target = opts.grid.values[ci];

    const std::uint64_t pick_seed = derive_seed(opts.seed, {rubric_tag, ci, ordinal, 0});
    const std::uint64_t corrupt_seed = derive_seed(opts.seed, {rubric_tag, ci, ordinal, 1});
    StableRng pick(pick_seed);
    const Essay& src = *pool.essays[pick.index(pool.essays.size())];

    std::ostringstream id;
    id << "syn:" << to_string(opts.rubric) << ":" << detail::format_score(target)
       << ":" << ordinal;

    switch (opts.rubric) {
      case Rubric::content:
        out.essays[slot] = corrupt_content(src, target, pool, corrupt_seed, id.str());
        break;
      case Rubric::organization:
        out.essays[slot] = corrupt_organization(src, target, corrupt_seed, id.str());
        break;
      case Rubric::language:
        out.essays[slot] = corrupt_language(src, target, *opts.pool, corrupt_seed, id.str());
        break;
    }
  };

  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1 || total < 2) {
    for (std::size_t slot = 0; slot < total; ++slot) make_one(slot);
  } else {
    std::vector<std::exception_ptr> errors(total);
    std::vector<std::thread> workers;
    const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(jobs), total);
    for (std::size_t w = 0; w < nw; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t slot = w; slot < total; slot += nw) {
          try {
            make_one(slot);
          } catch (...) {
            errors[slot] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : workers) t.join();
    for (const auto& err : errors)
      if (err) std::rethrow_exception(err);  // first slot's error, deterministically
  }

  // carry prompt texts for the prompts actually used
  for (const auto& e : out.essays) {
    const auto it = source.prompts.find(e.prompt_id);
    if (it != source.prompts.end()) out.prompts.emplace(it->first, it->second);
  }
  return out;
}

}  // namespace essaykit
