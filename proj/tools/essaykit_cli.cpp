// essaykit command line: ingest, standardize, augment, split, qwk, analyze.
// Data goes to stdout (or --out); logs go to stderr; exit codes are
// 0 success, 1 data error, 2 usage error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "essaykit/essaykit.hpp"

namespace fs = std::filesystem;
using namespace essaykit;

namespace {

// distinguishes bad invocations (exit 2) from bad data (exit 1)
class UsageError : public Error {
 public:
  using Error::Error;
};

struct CommonOpts {
  std::uint64_t seed = 22;
  std::string out;  // empty or "-" means stdout
  bool json = false;
  int jobs = 1;
};

template <class Fn>
void with_output(const std::string& out, Fn&& fn) {
  if (out.empty() || out == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream f(out);
  if (!f) throw Error("cannot write '" + out + "'");
  fn(f);
  f.flush();
  if (!f) throw Error("write failed for '" + out + "'");
}

std::string data_file(const std::string& name) {
  if (const char* dir = std::getenv("ESSAYKIT_DATA"))
    return (fs::path(dir) / name).string();
  return (fs::path("data") / name).string();
}

ScoreGrid parse_grid(const std::string& spec) {
  ScoreGrid g;
  if (spec.find(':') != std::string::npos) {  // min:max:step
    double lo = 0, hi = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream is(spec);
    if (!(is >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':')
      throw UsageError("bad --target-grid '" + spec + "' (want min:max:step)");
    if (step <= 0) throw UsageError("grid step must be positive");
    for (double v = lo; v <= hi + 1e-9; v += step) g.values.push_back(v);
  } else {  // comma list
    std::istringstream is(spec);
    std::string item;
    while (std::getline(is, item, ',')) {
      try {
        g.values.push_back(std::stod(item));
      } catch (...) {
        throw UsageError("bad grid value '" + item + "'");
      }
    }
  }
  try {
    g.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return g;
}

std::array<double, 3> parse_ratio(const std::string& spec) {
  std::array<double, 3> r{};
  std::istringstream is(spec);
  std::string item;
  int i = 0;
  while (std::getline(is, item, ',')) {
    if (i >= 3) throw UsageError("--ratio wants three comma-separated values");
    try {
      r[static_cast<std::size_t>(i++)] = std::stod(item);
    } catch (...) {
      throw UsageError("bad ratio value '" + item + "'");
    }
  }
  if (i != 3) throw UsageError("--ratio wants three comma-separated values");
  return r;
}

void print_warnings(const IngestReport& rep) {
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  if (rep.skipped > 0) std::cerr << "skipped " << rep.skipped << " bad row(s)\n";
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string input;
  std::string format = "auto";  // jsonl | asap-tsv
  std::vector<int> prompts;
  bool lenient = false;
};

int run_ingest(const IngestArgs& a, const CommonOpts& common) {
  std::string format = a.format;
  if (format == "auto")
    format = fs::path(a.input).extension() == ".tsv" ? "asap-tsv" : "jsonl";

  Corpus corpus;
  IngestReport rep;
  if (format == "jsonl") {
    corpus = ingest_jsonl(fs::path(a.input), &rep, a.lenient);
  } else if (format == "asap-tsv") {
    TsvOptions opts;
    opts.prompt_filter.insert(a.prompts.begin(), a.prompts.end());
    opts.lenient = a.lenient;
    const auto records = ingest_asap_tsv(fs::path(a.input), opts, &rep);
    std::set<std::string> seen;
    for (const auto& r : records) {
      if (!seen.insert(r.essay_id).second)
        throw Error("duplicate essay_id '" + r.essay_id + "'");
      Essay e;
      e.id = r.essay_id;
      e.prompt_id = std::to_string(r.essay_set);
      e.text = r.text;
      e.sentences = segment_sentences(e.text);
      corpus.essays.push_back(std::move(e));
    }
    std::cerr << "note: native trait scores are not part of canonical records; "
                 "use 'standardize' to map them onto the unified rubrics\n";
  } else {
    throw UsageError("unknown --format '" + a.format + "'");
  }
  print_warnings(rep);
  with_output(common.out, [&](std::ostream& os) { write_jsonl(corpus, os); });
  std::cerr << "ingested " << corpus.essays.size() << " essay(s)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// standardize
// ---------------------------------------------------------------------------

struct StandardizeArgs {
  std::string input;
  std::string scheme;
  std::string dump_scheme;
  std::vector<int> prompts;
  std::string range;  // "min:max" override for schemes without one
  bool snap = false;
  bool lenient = false;
};

StandardizationScheme resolve_scheme(const std::string& name_or_path) {
  for (const auto& s : builtin_schemes())
    if (s.name == name_or_path) return s;
  if (fs::exists(name_or_path)) return load_scheme(fs::path(name_or_path));
  std::string known;
  for (const auto& s : builtin_schemes()) known += " " + s.name;
  throw UsageError("unknown scheme '" + name_or_path +
                   "' (not a built-in:" + known + "; not a file)");
}

int run_standardize(const StandardizeArgs& a, const CommonOpts& common) {
  if (!a.dump_scheme.empty()) {
    const auto s = resolve_scheme(a.dump_scheme);
    with_output(common.out, [&](std::ostream& os) { dump_scheme(s, os); });
    return 0;
  }
  if (a.input.empty()) throw UsageError("standardize needs an input TSV file");
  if (a.scheme.empty()) throw UsageError("standardize needs --scheme");
  StandardizationScheme scheme = resolve_scheme(a.scheme);
  if (!a.range.empty()) {
    double lo = 0, hi = 0;
    char c = 0;
    std::istringstream is(a.range);
    if (!(is >> lo >> c >> hi) || c != ':')
      throw UsageError("bad --range '" + a.range + "' (want min:max)");
    scheme.native_range = {{lo, hi}};
  }

  TsvOptions opts;
  opts.prompt_filter.insert(a.prompts.begin(), a.prompts.end());
  if (opts.prompt_filter.empty()) {
    // sensible default filters for the ASAP builtins
    if (scheme.name == "asap_p7") opts.prompt_filter = {7};
    else if (scheme.name == "asap_p8") opts.prompt_filter = {8};
    else if (scheme.name == "asap_pp_p1") opts.prompt_filter = {1};
    else if (scheme.name == "asap_pp_p2") opts.prompt_filter = {2};
  }
  for (const auto& [rubric, traits] : scheme.rubric_maps)
    for (const auto& [trait, w] : traits) opts.trait_columns.push_back(trait);
  std::sort(opts.trait_columns.begin(), opts.trait_columns.end());
  opts.trait_columns.erase(
      std::unique(opts.trait_columns.begin(), opts.trait_columns.end()),
      opts.trait_columns.end());
  opts.lenient = a.lenient;

  IngestReport rep;
  const auto records = ingest_asap_tsv(fs::path(a.input), opts, &rep);

  Corpus corpus;
  std::set<std::string> seen;
  for (const auto& r : records) {
    try {
      if (!seen.insert(r.essay_id).second)
        throw Error("duplicate essay_id '" + r.essay_id + "'");
      Essay e;
      e.id = r.essay_id;
      e.prompt_id = std::to_string(r.essay_set);
      e.text = r.text;
      e.sentences = segment_sentences(e.text);
      e.scores = unify(r, scheme);
      if (a.snap)
        for (Rubric ru : kAllRubrics)
          if (auto v = e.scores.get(ru)) e.scores.set(ru, snap_to_grid(*v));
      e.provenance = Provenance::standardized;
      corpus.essays.push_back(std::move(e));
    } catch (const Error& ex) {
      if (!a.lenient) throw;
      rep.warnings.emplace_back(ex.what());
      ++rep.skipped;
    }
  }
  print_warnings(rep);
  with_output(common.out, [&](std::ostream& os) { write_jsonl(corpus, os); });
  std::cerr << "standardized " << corpus.essays.size() << " essay(s) with scheme '"
            << scheme.name << "'\n";
  return 0;
}

// ---------------------------------------------------------------------------
// augment
// ---------------------------------------------------------------------------

struct AugmentArgs {
  std::string input;
  std::string rubric;
  double n_aug = -1.0;  // <0 means the rubric default
  int threshold = 10;
  std::string pool_path;
  std::string grid_spec;
  std::string manifest;
};

int run_augment(const AugmentArgs& a, const CommonOpts& common) {
  const Rubric rubric = rubric_from_string(a.rubric);
  if (rubric == Rubric::language && a.pool_path.empty())
    throw UsageError("--rubric language needs --pool <m2 file>");

  Corpus corpus = ingest_jsonl(fs::path(a.input));

  std::set<std::string> train_only;
  std::optional<SplitAssignment> assignment;
  if (!a.manifest.empty()) {
    assignment = read_manifest(fs::path(a.manifest));
    Corpus filtered;
    filtered.prompts = corpus.prompts;
    std::size_t dropped_eval = 0, dropped_unassigned = 0;
    for (auto& e : corpus.essays) {
      if (e.provenance == Provenance::original) {
        const auto it = assignment->by_id.find(e.id);
        if (it == assignment->by_id.end()) {
          ++dropped_unassigned;
          continue;
        }
        if (it->second != Split::train) {
          ++dropped_eval;
          continue;
        }
      } else {
        train_only.insert(e.id);  // standardized material is train-only
      }
      filtered.essays.push_back(std::move(e));
    }
    std::cerr << "manifest: kept " << filtered.essays.size() << " source essay(s), "
              << "excluded " << dropped_eval << " val/test and "
              << dropped_unassigned << " unassigned\n";
    corpus = std::move(filtered);
  }

  UngrammaticalPool pool;
  BalancedOptions opts;
  opts.rubric = rubric;
  opts.n_aug = a.n_aug < 0 ? default_n_aug(rubric) : a.n_aug;
  opts.seed = common.seed;
  opts.jobs = common.jobs;
  if (!a.grid_spec.empty()) opts.grid = parse_grid(a.grid_spec);
  if (rubric == Rubric::language) {
    pool = build_ungrammatical_pool(fs::path(a.pool_path), a.threshold);
    std::cerr << "ungrammatical pool: " << pool.sentences.size()
              << " sentence(s) with > " << a.threshold << " edits\n";
    opts.pool = &pool;
  }

  Corpus synthetic = generate_balanced(corpus, opts);
  const std::size_t generated = synthetic.essays.size();

  if (assignment) {
    LeakageReport report;
    synthetic = enforce_leakage_rule(*assignment, synthetic, train_only, &report);
    std::cerr << "leakage audit: removed " << report.removed.size() << " of "
              << generated << " synthetic essay(s)";
    if (!report.removed.empty()) {
      std::cerr << " (";
      for (std::size_t i = 0; i < report.removed.size() && i < 5; ++i) {
        if (i) std::cerr << ", ";
        std::cerr << report.removed[i].synthetic_id << " via "
                  << report.removed[i].source_id;
      }
      std::cerr << ")";
    }
    std::cerr << "\n";
  }

  with_output(common.out, [&](std::ostream& os) { write_jsonl(synthetic, os); });
  std::cerr << "generated " << synthetic.essays.size() << " synthetic essay(s) ("
            << opts.grid.size() << " classes, n_aug " << opts.n_aug << ", seed "
            << common.seed << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// split
// ---------------------------------------------------------------------------

struct SplitArgs {
  std::string input;
  std::string ratio = "0.6,0.2,0.2";
};

int run_split(const SplitArgs& a, const CommonOpts& common) {
  const Corpus corpus = ingest_jsonl(fs::path(a.input));
  const auto ratio = parse_ratio(a.ratio);
  SplitAssignment assignment;
  try {
    assignment = split_corpus(corpus, ratio, common.seed);
  } catch (const Error& e) {
    const std::string what = e.what();
    if (what.find("ratio") != std::string::npos) throw UsageError(what);
    throw;
  }
  with_output(common.out, [&](std::ostream& os) { write_manifest(assignment, os); });
  std::cerr << "split " << assignment.by_id.size() << " original essay(s): train "
            << assignment.count(Split::train) << ", val "
            << assignment.count(Split::val) << ", test "
            << assignment.count(Split::test) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// qwk
// ---------------------------------------------------------------------------

struct QwkArgs {
  std::string gold;
  std::string pred;
  std::string grid_spec;
};

struct PredRow {
  std::string id;
  Rubric rubric;
  double value;
};

std::vector<PredRow> read_pred_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open predictions '" + path.string() + "'");
  std::vector<PredRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == "id,rubric,pred") continue;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string::npos ? std::string::npos
                                                   : line.find(',', c1 + 1);
    if (c2 == std::string::npos)
      throw Error("predictions line " + std::to_string(line_no) +
                  ": expected id,rubric,pred");
    PredRow r;
    r.id = line.substr(0, c1);
    r.rubric = rubric_from_string(line.substr(c1 + 1, c2 - c1 - 1));
    try {
      r.value = std::stod(line.substr(c2 + 1));
    } catch (...) {
      throw Error("predictions line " + std::to_string(line_no) +
                  ": non-numeric prediction");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

ScoreGrid total_grid(const ScoreGrid& g) {
  double step = g.values[1] - g.values[0];
  for (std::size_t i = 1; i + 1 < g.values.size(); ++i)
    step = std::min(step, g.values[i + 1] - g.values[i]);
  ScoreGrid t;
  for (double v = 3.0 * g.values.front(); v <= 3.0 * g.values.back() + 1e-9; v += step)
    t.values.push_back(v);
  return t;
}

int run_qwk(const QwkArgs& a, const CommonOpts& common) {
  const Corpus gold = ingest_jsonl(fs::path(a.gold));
  const auto rows = read_pred_csv(fs::path(a.pred));
  const ScoreGrid grid =
      a.grid_spec.empty() ? ScoreGrid::half_point() : parse_grid(a.grid_spec);

  std::map<std::string, const Essay*> by_id;
  for (const auto& e : gold.essays) by_id[e.id] = &e;

  std::map<Rubric, std::pair<std::vector<double>, std::vector<double>>> pairs;
  std::map<std::string, RubricScores> pred_by_id;
  for (const auto& r : rows) {
    const auto it = by_id.find(r.id);
    if (it == by_id.end())
      throw Error("prediction id '" + r.id + "' is not in the gold corpus");
    const auto gscore = it->second->scores.get(r.rubric);
    if (!gscore)
      throw Error("gold essay '" + r.id + "' has no " +
                  std::string(to_string(r.rubric)) + " score");
    auto& [p, g] = pairs[r.rubric];
    p.push_back(grid.values[bin_score(r.value, grid)]);
    g.push_back(grid.values[bin_score(*gscore, grid)]);
    pred_by_id[r.id].set(r.rubric, r.value);
  }
  if (pairs.empty()) throw Error("no predictions to score");

  json out_json;
  std::ostringstream table;
  table << "rubric        n      qwk\n";
  for (const auto& [rubric, pg] : pairs) {
    const double v = qwk(pg.first, pg.second, grid);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-13s %-6zu %.4f\n", to_string(rubric),
                  pg.first.size(), v);
    table << buf;
    out_json[to_string(rubric)] = v;
    out_json["n"][to_string(rubric)] = pg.first.size();
  }

  // total score over essays predicted on all three rubrics
  std::vector<double> tp, tg;
  const ScoreGrid tgrid = total_grid(grid);
  for (const auto& [id, ps] : pred_by_id) {
    const auto pt = ps.total();
    const auto gt = by_id.at(id)->scores.total();
    if (pt && gt) {
      tp.push_back(tgrid.values[bin_score(*pt, tgrid)]);
      tg.push_back(tgrid.values[bin_score(*gt, tgrid)]);
    }
  }
  if (!tp.empty()) {
    const double v = qwk(tp, tg, tgrid);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-13s %-6zu %.4f\n", "total", tp.size(), v);
    table << buf;
    out_json["total"] = v;
    out_json["n"]["total"] = tp.size();
  }

  with_output(common.out, [&](std::ostream& os) {
    if (common.json) os << out_json.dump() << "\n";
    else os << table.str();
  });
  return 0;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::vector<std::string> inputs;
  std::string stopwords;
  std::string transitions;
  std::string dictionary;
  bool per_essay = false;
};

struct MetricColumn {
  const char* name;
  std::vector<std::vector<double>> per_corpus;  // values per essay
};

void push_metric(std::vector<MetricColumn>& cols, std::size_t corpus_i,
                 const char* name, std::optional<double> v) {
  for (auto& c : cols) {
    if (std::string(c.name) == name) {
      if (v) c.per_corpus[corpus_i].push_back(*v);
      return;
    }
  }
}

std::pair<double, double> mean_sd(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return {mean, std::sqrt(var)};
}

int run_analyze(const AnalyzeArgs& a, const CommonOpts& common) {
  AnalyticsLexicons lex;
  lex.stopwords = load_word_set(
      a.stopwords.empty() ? data_file("stopwords.txt") : a.stopwords);
  lex.transitions = load_phrase_list(
      a.transitions.empty() ? data_file("transitions.txt") : a.transitions);
  lex.dictionary = load_word_set(
      a.dictionary.empty() ? data_file("dictionary.txt") : a.dictionary);

  static const char* kMetrics[] = {
      "n_sentences",  "n_tokens", "n_tokens_no_stopwords",
      "ttr",          "n_transition_signals", "n_typos",
      "flesch_reading_ease", "fk_grade"};
  std::vector<MetricColumn> cols;
  for (const char* m : kMetrics)
    cols.push_back({m, std::vector<std::vector<double>>(a.inputs.size())});

  json per_essay_lines = json::array();
  for (std::size_t ci = 0; ci < a.inputs.size(); ++ci) {
    const Corpus corpus = ingest_jsonl(fs::path(a.inputs[ci]));
    for (const auto& e : corpus.essays) {
      const AnalyticsReport r = analyze(e, lex);
      push_metric(cols, ci, "n_sentences", static_cast<double>(r.n_sentences));
      push_metric(cols, ci, "n_tokens", static_cast<double>(r.n_tokens));
      push_metric(cols, ci, "n_tokens_no_stopwords",
                  static_cast<double>(r.n_tokens_no_stopwords));
      push_metric(cols, ci, "ttr", r.ttr);
      push_metric(cols, ci, "n_transition_signals",
                  static_cast<double>(r.n_transition_signals));
      push_metric(cols, ci, "n_typos", static_cast<double>(r.n_typos));
      push_metric(cols, ci, "flesch_reading_ease", r.flesch_reading_ease);
      push_metric(cols, ci, "fk_grade", r.fk_grade);
      if (a.per_essay) {
        json j;
        j["id"] = e.id;
        j["corpus"] = a.inputs[ci];
        j["n_sentences"] = r.n_sentences;
        j["n_tokens"] = r.n_tokens;
        j["n_tokens_no_stopwords"] = r.n_tokens_no_stopwords;
        j["n_transition_signals"] = r.n_transition_signals;
        j["n_typos"] = r.n_typos;
        if (r.ttr) j["ttr"] = *r.ttr;
        if (r.flesch_reading_ease) j["flesch_reading_ease"] = *r.flesch_reading_ease;
        if (r.fk_grade) j["fk_grade"] = *r.fk_grade;
        per_essay_lines.push_back(std::move(j));
      }
    }
  }

  if (a.per_essay) {
    with_output(common.out, [&](std::ostream& os) {
      for (const auto& j : per_essay_lines) os << j.dump() << "\n";
    });
    return 0;
  }

  json out_json;
  std::ostringstream table;
  table << "metric                     ";
  for (const auto& in : a.inputs) {
    std::string base = fs::path(in).filename().string();
    if (base.size() > 22) base = base.substr(0, 22);
    char buf[40];
    std::snprintf(buf, sizeof buf, " %-22s", base.c_str());
    table << buf;
  }
  if (a.inputs.size() >= 2) table << " F";
  table << "\n";
  for (const auto& c : cols) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-27s", c.name);
    table << buf;
    for (std::size_t ci = 0; ci < a.inputs.size(); ++ci) {
      const auto [mean, sd] = mean_sd(c.per_corpus[ci]);
      std::snprintf(buf, sizeof buf, " %10.2f ±%8.2f", mean, sd);
      table << buf;
      out_json[c.name][a.inputs[ci]] = {{"mean", mean},
                                        {"sd", sd},
                                        {"n", c.per_corpus[ci].size()}};
    }
    if (a.inputs.size() >= 2) {
      bool ok = true;
      std::size_t total = 0;
      for (const auto& g : c.per_corpus) {
        ok = ok && !g.empty();
        total += g.size();
      }
      if (ok && total > a.inputs.size()) {
        const AnovaResult r = one_way_anova(c.per_corpus);
        std::snprintf(buf, sizeof buf, " %10.3f", r.f);
        table << buf;
        out_json[c.name]["anova_f"] = r.f;
      } else {
        table << "          -";
      }
    }
    table << "\n";
  }

  with_output(common.out, [&](std::ostream& os) {
    if (common.json) os << out_json.dump() << "\n";
    else os << table.str();
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corpus engineering for rubric-scored essay datasets"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key-value config file")->envname("ESSAYKIT_CONFIG");

  CommonOpts common;
  app.add_option("--seed", common.seed, "seed for every random decision")
      ->capture_default_str();
  app.add_option("--out", common.out, "output file (default: stdout)");
  app.add_flag("--json", common.json, "machine-readable output where supported");
  app.add_option("--jobs", common.jobs, "worker threads for augment")
      ->check(CLI::PositiveNumber);

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "parse JSONL or ASAP-style TSV into canonical JSONL");
  ingest->fallthrough();
  ingest->add_option("input", ingest_args.input, "input file")->required();
  ingest->add_option("--format", ingest_args.format, "jsonl | asap-tsv (default: by extension)")
      ->check(CLI::IsMember({"auto", "jsonl", "asap-tsv"}));
  ingest->add_option("--prompts", ingest_args.prompts, "essay_set filter for TSV input");
  ingest->add_flag("--lenient", ingest_args.lenient, "skip bad rows, count them on stderr");

  StandardizeArgs std_args;
  auto* standardize = app.add_subcommand("standardize", "map native trait scores onto the unified rubrics");
  standardize->fallthrough();
  standardize->add_option("input", std_args.input, "ASAP-style TSV file");
  standardize->add_option("--scheme", std_args.scheme, "built-in scheme name or scheme file");
  standardize->add_option("--dump-scheme", std_args.dump_scheme,
                          "print a scheme in config format and exit");
  standardize->add_option("--prompts", std_args.prompts, "essay_set filter");
  standardize->add_option("--range", std_args.range, "native range min:max (for schemes without one)");
  standardize->add_flag("--snap", std_args.snap, "snap unified scores to the half-point grid");
  standardize->add_flag("--lenient", std_args.lenient, "skip bad rows, count them on stderr");

  AugmentArgs aug_args;
  auto* augment = app.add_subcommand("augment", "generate balanced synthetic essays by corruption");
  augment->fallthrough();
  augment->add_option("input", aug_args.input, "gold corpus JSONL")->required();
  augment->add_option("--rubric", aug_args.rubric, "content | organization | language")
      ->required()
      ->check(CLI::IsMember({"content", "organization", "language"}));
  augment->add_option("--n-aug", aug_args.n_aug,
                      "synthetic essays per class / pool size (defaults: 0.5, 2, 0.125)");
  augment->add_option("--threshold", aug_args.threshold,
                      "minimum edit count (exclusive) for pool sentences")
      ->capture_default_str();
  augment->add_option("--pool", aug_args.pool_path, "M2 file for the ungrammatical pool");
  augment->add_option("--target-grid", aug_args.grid_spec,
                      "score classes as min:max:step or a comma list");
  augment->add_option("--manifest", aug_args.manifest,
                      "split manifest; restricts sources to train and audits leakage");

  SplitArgs split_args;
  auto* split_cmd = app.add_subcommand("split", "deterministic train/val/test partition");
  split_cmd->fallthrough();
  split_cmd->add_option("input", split_args.input, "corpus JSONL")->required();
  split_cmd->add_option("--ratio", split_args.ratio, "train,val,test ratio")
      ->capture_default_str();

  QwkArgs qwk_args;
  auto* qwk_cmd = app.add_subcommand("qwk", "quadratic weighted kappa of predictions vs gold");
  qwk_cmd->fallthrough();
  qwk_cmd->add_option("gold", qwk_args.gold, "gold corpus JSONL")->required();
  qwk_cmd->add_option("--pred", qwk_args.pred, "CSV with id,rubric,pred")->required();
  qwk_cmd->add_option("--grid", qwk_args.grid_spec, "score grid (default 1.0:5.0:0.5)");

  AnalyzeArgs an_args;
  auto* analyze_cmd = app.add_subcommand("analyze", "corpus analytics and cross-corpus ANOVA");
  analyze_cmd->fallthrough();
  analyze_cmd->add_option("inputs", an_args.inputs, "one or more corpus JSONL files")
      ->required();
  analyze_cmd->add_option("--stopwords", an_args.stopwords, "stopword lexicon");
  analyze_cmd->add_option("--transitions", an_args.transitions, "transition-signal lexicon");
  analyze_cmd->add_option("--dictionary", an_args.dictionary, "spelling dictionary");
  analyze_cmd->add_flag("--per-essay", an_args.per_essay, "emit one JSON report per essay");

  int rc = 0;
  ingest->callback([&] { rc = run_ingest(ingest_args, common); });
  standardize->callback([&] { rc = run_standardize(std_args, common); });
  augment->callback([&] { rc = run_augment(aug_args, common); });
  split_cmd->callback([&] { rc = run_split(split_args, common); });
  qwk_cmd->callback([&] { rc = run_qwk(qwk_args, common); });
  analyze_cmd->callback([&] { rc = run_analyze(an_args, common); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit 0; any usage problem exits 2
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
