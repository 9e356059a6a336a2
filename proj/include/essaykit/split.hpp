#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "essaykit/corpus.hpp"
#include "essaykit/rng.hpp"

namespace essaykit {

struct SplitAssignment {
  std::map<std::string, Split> by_id;
  std::array<double, 3> ratio{0.6, 0.2, 0.2};  // train, val, test
  std::uint64_t seed = 22;

  std::size_t count(Split s) const {
    std::size_t n = 0;
    for (const auto& [id, sp] : by_id) n += (sp == s);
    return n;
  }
};

// Deterministic partition of the original essays: ids sorted
// lexicographically, shuffled by the seeded generator, sliced by ratio.
// Non-divisible sizes go to the largest remainder, ties favoring train.
// Standardized and synthetic essays are not eligible; they are train-only
// by definition.
inline SplitAssignment split_corpus(const Corpus& corpus,
                                    std::array<double, 3> ratio = {0.6, 0.2, 0.2},
                                    std::uint64_t seed = 22) {
  double sum = 0.0;
  for (double r : ratio) {
    if (r < 0.0) throw Error("split ratio components must be non-negative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error("split ratio must sum to 1");

  std::vector<std::string> ids;
  for (const auto& e : corpus.essays)
    if (e.provenance == Provenance::original) ids.push_back(e.id);
  if (ids.empty())
    throw Error("no original essays to split");

  std::sort(ids.begin(), ids.end());
  StableRng rng(seed);
  stable_shuffle(ids, rng);

  const std::size_t n = ids.size();
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = ratio[static_cast<std::size_t>(i)] * static_cast<double>(n);
    counts[static_cast<std::size_t>(i)] = static_cast<std::size_t>(std::floor(exact));
    remainder[static_cast<std::size_t>(i)] = exact - std::floor(exact);
    assigned += counts[static_cast<std::size_t>(i)];
  }
  while (assigned < n) {
    int best = 0;  // ties resolve to the earlier slot: train, then val, then test
    for (int i = 1; i < 3; ++i)
      if (remainder[static_cast<std::size_t>(i)] > remainder[static_cast<std::size_t>(best)])
        best = i;
    ++counts[static_cast<std::size_t>(best)];
    remainder[static_cast<std::size_t>(best)] = -1.0;
    ++assigned;
  }

  SplitAssignment out;
  out.ratio = ratio;
  out.seed = seed;
  std::size_t pos = 0;
  for (int s = 0; s < 3; ++s)
    for (std::size_t i = 0; i < counts[static_cast<std::size_t>(s)]; ++i)
      out.by_id[ids[pos++]] = static_cast<Split>(s);
  return out;
}

// Manifest: CSV of id,split with a header row.
inline void write_manifest(const SplitAssignment& a, std::ostream& out) {
  out << "id,split\n";
  for (const auto& [id, sp] : a.by_id) out << id << ',' << to_string(sp) << '\n';
  if (!out) throw Error("manifest write failed");
}

inline void write_manifest(const SplitAssignment& a, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest '" + path.string() + "'");
  write_manifest(a, out);
}

inline SplitAssignment read_manifest(std::istream& in) {
  SplitAssignment a;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == "id,split") continue;
    const std::size_t comma = line.rfind(',');
    if (comma == std::string::npos)
      throw Error("manifest line " + std::to_string(line_no) + ": expected id,split");
    const std::string id = line.substr(0, comma);
    if (id.empty())
      throw Error("manifest line " + std::to_string(line_no) + ": empty id");
    a.by_id[id] = split_from_string(line.substr(comma + 1));
  }
  return a;
}

inline SplitAssignment read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest '" + path.string() + "'");
  return read_manifest(in);
}

struct LeakageRemoval {
  std::string synthetic_id;
  std::string source_id;  // the val/test source that triggered removal
  Split split = Split::test;
};

struct LeakageReport {
  std::vector<LeakageRemoval> removed;
  std::size_t kept = 0;
};

// Drops every synthetic essay that derives — as base essay or as content
// donor — from a source assigned to val or test. Sources absent from the
// assignment must appear in train_only_ids (standardized essays and other
// train-only material); anything else is an unknown source id.
inline Corpus enforce_leakage_rule(const SplitAssignment& assignment,
                                   const Corpus& synthetic,
                                   const std::set<std::string>& train_only_ids = {},
                                   LeakageReport* report = nullptr) {
  Corpus out;
  out.prompts = synthetic.prompts;
  for (const auto& e : synthetic.essays) {
    if (e.provenance != Provenance::synthetic)
      throw Error("essay '" + e.id + "' is not synthetic");
    if (e.source_ids.empty())
      throw Error("synthetic essay '" + e.id + "' has no source_ids");
    bool leaked = false;
    for (const auto& sid : e.source_ids) {
      const auto it = assignment.by_id.find(sid);
      if (it == assignment.by_id.end()) {
        if (!train_only_ids.count(sid))
          throw Error("synthetic essay '" + e.id + "' references unknown source id '" +
                      sid + "'");
        continue;
      }
      if (it->second != Split::train) {
        if (report) report->removed.push_back({e.id, sid, it->second});
        leaked = true;
        break;
      }
    }
    if (!leaked) out.essays.push_back(e);
  }
  if (report) report->kept = out.essays.size();
  return out;
}

}  // namespace essaykit
