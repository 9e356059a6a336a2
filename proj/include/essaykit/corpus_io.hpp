#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "essaykit/corpus.hpp"
#include "essaykit/text.hpp"

namespace essaykit {

using json = nlohmann::json;

struct IngestReport {
  std::vector<std::string> warnings;   // unresolved prompts, skipped rows
  std::size_t skipped = 0;             // lines/rows dropped in lenient mode
};

// ---------------------------------------------------------------------------
// Canonical JSONL records
//
//   {"id": str, "prompt_id": str, "prompt": str?, "text": str,
//    "scores": {"content": num?, "organization": num?, "language": num?},
//    "provenance": str, "source_ids": [str], "split": str?,
//    "corruption": object?}
//
// One essay per line; corpora stream without being held in memory twice.
// ---------------------------------------------------------------------------

inline json corruption_to_json(const CorruptionRecord& r) {
  json j;
  j["rubric"] = to_string(r.rubric);
  j["target"] = r.target;
  j["n_corruptions"] = r.n_corruptions;
  j["affected_indices"] = r.affected_indices;
  j["donors"] = r.donors;
  j["rng_seed"] = r.rng_seed;
  if (r.with_replacement) j["with_replacement"] = true;
  return j;
}

inline CorruptionRecord corruption_from_json(const json& j) {
  CorruptionRecord r;
  r.rubric = rubric_from_string(j.at("rubric").get<std::string>());
  r.target = j.at("target").get<double>();
  r.n_corruptions = j.at("n_corruptions").get<int>();
  r.affected_indices = j.at("affected_indices").get<std::vector<int>>();
  r.donors = j.at("donors").get<std::vector<std::string>>();
  r.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  r.with_replacement = j.value("with_replacement", false);
  return r;
}

inline json essay_to_json(const Essay& e, const Corpus* corpus = nullptr) {
  json j;
  j["id"] = e.id;
  j["prompt_id"] = e.prompt_id;
  if (corpus) {
    auto it = corpus->prompts.find(e.prompt_id);
    if (it != corpus->prompts.end()) j["prompt"] = it->second;
  }
  j["text"] = e.text;
  json sc = json::object();
  for (Rubric r : kAllRubrics)
    if (auto v = e.scores.get(r)) sc[to_string(r)] = *v;
  j["scores"] = sc;
  j["provenance"] = to_string(e.provenance);
  j["source_ids"] = e.source_ids;
  if (e.split) j["split"] = to_string(*e.split);
  if (e.corruption) j["corruption"] = corruption_to_json(*e.corruption);
  return j;
}

// prompt_text receives the record's "prompt" field when present.
inline Essay essay_from_json(const json& j,
                             std::optional<std::string>* prompt_text = nullptr) {
  if (!j.is_object()) throw Error("record is not a JSON object");
  if (!j.contains("id") || !j.at("id").is_string() ||
      j.at("id").get<std::string>().empty())
    throw Error("missing required field 'id'");
  if (!j.contains("text") || !j.at("text").is_string())
    throw Error("missing required field 'text'");

  Essay e;
  e.id = j.at("id").get<std::string>();
  e.prompt_id = j.value("prompt_id", std::string{});
  e.text = j.at("text").get<std::string>();
  e.sentences = segment_sentences(e.text);
  if (j.contains("scores")) {
    const json& sc = j.at("scores");
    if (!sc.is_object()) throw Error("'scores' must be an object");
    for (Rubric r : kAllRubrics)
      if (sc.contains(to_string(r)))
        e.scores.set(r, sc.at(to_string(r)).get<double>());
  }
  e.provenance = provenance_from_string(j.value("provenance", std::string{"original"}));
  if (j.contains("source_ids"))
    e.source_ids = j.at("source_ids").get<std::vector<std::string>>();
  if (j.contains("split") && !j.at("split").is_null())
    e.split = split_from_string(j.at("split").get<std::string>());
  if (j.contains("corruption") && !j.at("corruption").is_null())
    e.corruption = corruption_from_json(j.at("corruption"));

  if (e.provenance == Provenance::synthetic) {
    if (e.source_ids.empty())
      throw Error("synthetic essay '" + e.id + "' has no source_ids");
    if (!e.corruption)
      throw Error("synthetic essay '" + e.id + "' has no corruption record");
  } else if (e.corruption) {
    throw Error("essay '" + e.id + "' carries a corruption record but provenance is " +
                std::string(to_string(e.provenance)));
  }
  if (prompt_text && j.contains("prompt") && j.at("prompt").is_string())
    *prompt_text = j.at("prompt").get<std::string>();
  return e;
}

inline Corpus ingest_jsonl(std::istream& in, IngestReport* report = nullptr,
                           bool lenient = false) {
  Corpus c;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      std::optional<std::string> prompt;
      Essay e = essay_from_json(j, &prompt);
      if (!seen.insert(e.id).second)
        throw Error("duplicate id '" + e.id + "'");
      if (prompt) {
        auto [it, inserted] = c.prompts.emplace(e.prompt_id, *prompt);
        if (!inserted && it->second != *prompt && report)
          report->warnings.push_back("line " + std::to_string(line_no) +
                                     ": conflicting prompt text for '" +
                                     e.prompt_id + "' (keeping first)");
      }
      c.essays.push_back(std::move(e));
    } catch (const json::exception& ex) {
      const std::string msg =
          "line " + std::to_string(line_no) + ": " + ex.what();
      if (!lenient) throw Error(msg);
      if (report) {
        report->warnings.push_back(msg);
        ++report->skipped;
      }
    } catch (const Error& ex) {
      const std::string msg =
          "line " + std::to_string(line_no) + ": " + ex.what();
      if (!lenient) throw Error(msg);
      if (report) {
        report->warnings.push_back(msg);
        ++report->skipped;
      }
    }
  }
  if (report)
    for (const auto& p : c.unresolved_prompt_ids())
      report->warnings.push_back("unresolved prompt_id '" + p + "'");
  return c;
}

inline Corpus ingest_jsonl(const std::filesystem::path& path,
                           IngestReport* report = nullptr,
                           bool lenient = false) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return ingest_jsonl(in, report, lenient);
}

inline void write_jsonl(const Corpus& c, std::ostream& out) {
  for (const auto& e : c.essays) {
    out << essay_to_json(e, &c).dump() << '\n';
    if (!out) throw Error("write failed");
  }
  out.flush();
  if (!out) throw Error("write failed");
}

inline void write_jsonl(const Corpus& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_jsonl(c, out);
}

// ---------------------------------------------------------------------------
// ASAP-style TSV: header row with essay_id, essay_set, essay, plus trait
// columns whose names come from configuration (normally the scheme's
// rubric maps). Values keep their native names and ranges; the
// standardizer maps them onto the unified schema.
// ---------------------------------------------------------------------------

struct RawScoreRecord {
  std::string essay_id;
  int essay_set = 0;
  std::string text;
  std::map<std::string, double> traits;
};

struct TsvOptions {
  std::set<int> prompt_filter;              // empty = accept every row
  std::vector<std::string> trait_columns;   // header names to read as traits
  bool lenient = false;
};

namespace detail {

inline std::vector<std::string> split_tsv_row(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
    out.back().pop_back();
  return out;
}

inline void reject_source_dependent(int set) {
  if (set >= 3 && set <= 6)
    throw Error("ASAP prompt " + std::to_string(set) +
                " is source-dependent (holistic essay type) and is excluded "
                "from standardization");
}

}  // namespace detail

inline std::vector<RawScoreRecord> ingest_asap_tsv(
    std::istream& in, const TsvOptions& opts, IngestReport* report = nullptr) {
  for (int set : opts.prompt_filter) detail::reject_source_dependent(set);

  std::string header_line;
  if (!std::getline(in, header_line)) return {};
  const std::vector<std::string> header = detail::split_tsv_row(header_line);
  auto col = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw Error("missing expected column '" + name + "'");
  };
  const std::size_t id_col = col("essay_id");
  const std::size_t set_col = col("essay_set");
  const std::size_t text_col = col("essay");
  std::vector<std::pair<std::string, std::size_t>> trait_cols;
  for (const auto& name : opts.trait_columns)
    trait_cols.emplace_back(name, col(name));

  std::vector<RawScoreRecord> records;
  std::string line;
  std::size_t row_no = 1;  // header was row 1
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    try {
      const std::vector<std::string> cells = detail::split_tsv_row(line);
      auto cell = [&](std::size_t i) -> const std::string& {
        if (i >= cells.size())
          throw Error("row " + std::to_string(row_no) + ": too few columns");
        return cells[i];
      };
      RawScoreRecord rec;
      rec.essay_id = cell(id_col);
      try {
        rec.essay_set = std::stoi(cell(set_col));
      } catch (...) {
        throw Error("row " + std::to_string(row_no) +
                    ": non-numeric essay_set '" + cell(set_col) + "'");
      }
      if (!opts.prompt_filter.empty() &&
          !opts.prompt_filter.count(rec.essay_set))
        continue;  // filter semantics: out-of-filter rows are skipped
      if (opts.prompt_filter.empty())
        detail::reject_source_dependent(rec.essay_set);
      rec.text = cell(text_col);
      for (const auto& [name, idx] : trait_cols) {
        const std::string& raw = cell(idx);
        try {
          std::size_t pos = 0;
          rec.traits[name] = std::stod(raw, &pos);
          if (pos != raw.size()) throw std::invalid_argument(raw);
        } catch (...) {
          throw Error("row " + std::to_string(row_no) +
                      ": non-numeric score '" + raw + "' in column '" + name +
                      "'");
        }
      }
      records.push_back(std::move(rec));
    } catch (const Error& ex) {
      if (!opts.lenient) throw;
      if (report) {
        report->warnings.push_back(ex.what());
        ++report->skipped;
      }
    }
  }
  return records;
}

inline std::vector<RawScoreRecord> ingest_asap_tsv(
    const std::filesystem::path& path, const TsvOptions& opts,
    IngestReport* report = nullptr) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return ingest_asap_tsv(in, opts, report);
}

}  // namespace essaykit
