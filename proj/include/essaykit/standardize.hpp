#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "essaykit/corpus.hpp"
#include "essaykit/corpus_io.hpp"

namespace essaykit {

// Maps one source dataset's native rubrics and ranges onto the unified
// content/organization/language schema. Weights are normalized before use,
// so scaling a rubric map by a constant changes nothing.
struct StandardizationScheme {
  std::string name;
  // Native score range shared by every trait. Absent means the scheme
  // requires a configured range before it can be used (e.g. icnale_ee).
  std::optional<std::pair<double, double>> native_range;
  std::map<Rubric, std::vector<std::pair<std::string, double>>> rubric_maps;

  void validate() const {
    if (name.empty()) throw Error("scheme has no name");
    if (native_range && !(native_range->first < native_range->second))
      throw Error("scheme '" + name + "': native range min must be < max");
    if (rubric_maps.empty()) throw Error("scheme '" + name + "' maps no rubrics");
    for (const auto& [rubric, traits] : rubric_maps) {
      if (traits.empty())
        throw Error("scheme '" + name + "': rubric map for " +
                    std::string(to_string(rubric)) + " is empty");
      double sum = 0.0;
      for (const auto& [trait, w] : traits) {
        if (trait.empty()) throw Error("scheme '" + name + "': unnamed trait");
        if (w < 0.0)
          throw Error("scheme '" + name + "': negative weight for '" + trait + "'");
        sum += w;
      }
      if (!(sum > 0.0))
        throw Error("scheme '" + name + "': weights for " +
                    std::string(to_string(rubric)) + " sum to zero");
    }
  }

  std::pair<double, double> required_range() const {
    if (!native_range)
      throw Error("scheme '" + name +
                  "' has no native score range; it is required configuration "
                  "(set range_min/range_max in the scheme file or pass --range)");
    return *native_range;
  }
};

// Linear map of [min, max] onto [1, 5]; exact at the endpoints.
inline double rescale(double x, std::pair<double, double> range) {
  const auto [lo, hi] = range;
  if (!(lo < hi)) throw Error("invalid native range");
  if (x < lo || x > hi) {
    std::ostringstream os;
    os << "score " << x << " outside native range [" << lo << ", " << hi << "]";
    throw Error(os.str());
  }
  if (x == lo) return 1.0;
  if (x == hi) return 5.0;
  return 1.0 + 4.0 * (x - lo) / (hi - lo);
}

// Nearest half-point in [1, 5]; a tie (distance exactly 0.25) rounds up.
inline double snap_to_grid(double x) {
  if (x < 1.0 || x > 5.0) {
    std::ostringstream os;
    os << "score " << x << " outside [1, 5]";
    throw Error(os.str());
  }
  const double snapped = std::floor(x * 2.0 + 0.5) / 2.0;
  return snapped > 5.0 ? 5.0 : snapped;
}

// Weighted average of native traits per rubric, rescaled into [1, 5].
inline RubricScores unify(const RawScoreRecord& record,
                          const StandardizationScheme& scheme) {
  scheme.validate();
  const auto range = scheme.required_range();
  RubricScores out;
  for (const auto& [rubric, traits] : scheme.rubric_maps) {
    double weight_sum = 0.0;
    double acc = 0.0;
    for (const auto& [trait, w] : traits) {
      const auto it = record.traits.find(trait);
      if (it == record.traits.end())
        throw Error("record '" + record.essay_id + "' is missing trait '" +
                    trait + "' required by scheme '" + scheme.name + "'");
      const double v = it->second;
      if (v < range.first || v > range.second) {
        std::ostringstream os;
        os << "record '" << record.essay_id << "': trait '" << trait
           << "' value " << v << " outside native range [" << range.first
           << ", " << range.second << "]";
        throw Error(os.str());
      }
      acc += w * v;
      weight_sum += w;
    }
    out.set(rubric, rescale(acc / weight_sum, range));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Built-in schemes. These are data, not policy: dump_scheme writes the same
// plain-text format load_scheme reads, so any of them can be exported,
// edited (e.g. to match a file's actual trait headers), and loaded back.
// ---------------------------------------------------------------------------

inline std::vector<StandardizationScheme> builtin_schemes() {
  std::vector<StandardizationScheme> out;
  {
    StandardizationScheme s;
    s.name = "asap_p7";
    s.native_range = {{0.0, 3.0}};
    s.rubric_maps[Rubric::content] = {{"ideas", 1.0}};
    s.rubric_maps[Rubric::organization] = {{"organization", 1.0}};
    // published weights 0.66/0.33 normalize to 2/3 and 1/3
    s.rubric_maps[Rubric::language] = {{"style", 0.66}, {"conventions", 0.33}};
    out.push_back(std::move(s));
  }
  for (const char* name : {"asap_p8", "asap_pp_p1", "asap_pp_p2"}) {
    StandardizationScheme s;
    s.name = name;
    s.native_range = {{0.0, 3.0}};
    s.rubric_maps[Rubric::content] = {{"ideas_and_content", 1.0}};
    s.rubric_maps[Rubric::organization] = {{"organization", 1.0}};
    s.rubric_maps[Rubric::language] = {{"voice", 1.0},
                                       {"word_choice", 1.0},
                                       {"sentence_fluency", 1.0},
                                       {"conventions", 1.0}};
    out.push_back(std::move(s));
  }
  {
    StandardizationScheme s;
    s.name = "icnale_ee";
    // native trait range intentionally unset: required configuration
    s.rubric_maps[Rubric::content] = {{"content", 1.0}};
    s.rubric_maps[Rubric::organization] = {{"organization", 1.0}};
    s.rubric_maps[Rubric::language] = {{"vocabulary", 0.4},
                                       {"language_use", 0.5},
                                       {"mechanics", 0.1}};
    out.push_back(std::move(s));
  }
  return out;
}

inline StandardizationScheme builtin_scheme(const std::string& name) {
  for (auto& s : builtin_schemes())
    if (s.name == name) return s;
  std::string known;
  for (const auto& s : builtin_schemes()) known += " " + s.name;
  throw Error("unknown scheme '" + name + "' (built-in:" + known + ")");
}

// ---------------------------------------------------------------------------
// Scheme config files: key-value lines grouped in sections. '#' starts a
// comment. The [scheme] section holds name and range; each rubric section
// lists trait = weight pairs.
//
//   [scheme]
//   name = asap_p7
//   range_min = 0
//   range_max = 3
//
//   [language]
//   style = 0.66
//   conventions = 0.33
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

}  // namespace detail

inline StandardizationScheme load_scheme(std::istream& in) {
  StandardizationScheme s;
  std::optional<double> range_min, range_max;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("scheme file line " + std::to_string(line_no) +
                  ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (section == "scheme") {
      if (key == "name") {
        s.name = value;
      } else if (key == "range_min" || key == "range_max") {
        double v = 0;
        try {
          v = std::stod(value);
        } catch (...) {
          throw Error("scheme file line " + std::to_string(line_no) +
                      ": non-numeric " + key);
        }
        (key == "range_min" ? range_min : range_max) = v;
      } else {
        throw Error("scheme file line " + std::to_string(line_no) +
                    ": unknown key '" + key + "' in [scheme]");
      }
    } else if (section == "content" || section == "organization" ||
               section == "language") {
      double w = 0;
      try {
        w = std::stod(value);
      } catch (...) {
        throw Error("scheme file line " + std::to_string(line_no) +
                    ": non-numeric weight for trait '" + key + "'");
      }
      s.rubric_maps[rubric_from_string(section)].emplace_back(key, w);
    } else {
      throw Error("scheme file line " + std::to_string(line_no) +
                  ": unknown section [" + section + "]");
    }
  }
  if (range_min || range_max) {
    if (!range_min || !range_max)
      throw Error("scheme file: range_min and range_max must both be set");
    s.native_range = {{*range_min, *range_max}};
  }
  s.validate();
  return s;
}

inline StandardizationScheme load_scheme(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scheme file '" + path.string() + "'");
  return load_scheme(in);
}

inline void dump_scheme(const StandardizationScheme& s, std::ostream& out) {
  out << "[scheme]\n";
  out << "name = " << s.name << "\n";
  if (s.native_range) {
    out << "range_min = " << s.native_range->first << "\n";
    out << "range_max = " << s.native_range->second << "\n";
  } else {
    out << "# native trait range is required configuration:\n";
    out << "# range_min = \n";
    out << "# range_max = \n";
  }
  for (const auto& [rubric, traits] : s.rubric_maps) {
    out << "\n[" << to_string(rubric) << "]\n";
    for (const auto& [trait, w] : traits) out << trait << " = " << w << "\n";
  }
}

}  // namespace essaykit
