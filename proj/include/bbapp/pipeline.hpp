#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bbapp/backends.hpp"
#include "bbapp/corpus.hpp"
#include "bbapp/metrics.hpp"

namespace bbapp {

/// One test sentence through the preprocessing pipeline.
struct EvalRecord {
  std::string id;
  std::string x;           // source
  std::string x_star;      // simplified source
  std::string y;           // reference translation
  std::string y_hat;       // MT(x)
  std::string y_hat_star;  // MT(x_star)
  double gleu_orig = 0.0;
  double gleu_simple = 0.0;
  double delta_gleu = 0.0;  // gleu_simple - gleu_orig
};

struct EvalRun {
  LangPair pair;
  std::vector<EvalRecord> records;
  std::string simplifier_id;
  std::string backend_id;
  /// sha256 of (bitext digest, simplifier_id, backend_id).
  std::string run_id;
  std::string started_at;   // ISO-8601 UTC
  std::string finished_at;
};

/// Content digest of a bitext (pair, ids and both sides).
std::string bitext_digest(const Bitext& bitext);

/// Simplifies every source, translates both the original and simplified
/// sources with the same backend, and scores both against the reference
/// with sentence GLEU. An empty bitext yields an empty run without touching
/// the backends. Failures propagate; with a cached backend, finished
/// translations survive for the next attempt.
EvalRun run_app(const Bitext& test, Simplifier& simplifier, Translator& backend);

/// GLEU(MT(x*), y) - GLEU(MT(x), y) recomputed from the stored strings.
double recompute_delta_gleu(const EvalRecord& record);

/// Before/after figures for one language pair.
struct TableRow {
  std::string pair;
  std::size_t sentences = 0;
  double bleu_original = 0.0;
  double bleu_simplified = 0.0;
  double ter_original = 0.0;
  double ter_simplified = 0.0;
  /// Percent change of TER; absent when the original TER is 0 and the
  /// simplified one is not.
  std::optional<double> ter_pct_delta;
  double mean_gleu_original = 0.0;
  double mean_gleu_simplified = 0.0;
};

struct EvalTables {
  std::vector<TableRow> rows;
};

/// percent_delta(before, after), except that 0 -> 0 is a 0% change and
/// 0 -> positive has no defined percentage.
std::optional<double> ter_change(double ter_original, double ter_simplified);

/// Corpus BLEU and corpus TER (sum of edits over sum of reference lengths,
/// with shifts) for MT(x) and MT(x*), plus mean sentence GLEU. Throws
/// SizingError on an empty run.
TableRow evaluate_run(const EvalRun& run);
EvalTables evaluate_runs(std::span<const EvalRun> runs);

/// Per-record sentence TER (original, simplified); nullopt when the
/// reference is empty.
struct SentenceTer {
  std::string id;
  std::optional<double> original;
  std::optional<double> simplified;
};
std::vector<SentenceTer> sentence_ter(const EvalRun& run);

/// Tab-separated table with a header line.
std::string render_tables_tsv(const EvalTables& tables);
std::string tables_json(const EvalTables& tables);

void write_run_json(const EvalRun& run, std::ostream& out);
EvalRun read_run_json(std::istream& in);

// ---------------------------------------------------------------------------

struct ScopeAnalysis {
  Histogram direct;
  Histogram backtrans;
  /// Sum over bins of max(0, p_backtrans - p_direct) with p the normalized
  /// bin frequencies.
  double dominance_mass = 0.0;
};

/// Both inputs must be non-empty and within [0, 1].
ScopeAnalysis scope_of_simplification(std::span<const double> direct,
                                      std::span<const double> backtrans, double bin_width);

/// CSV with header `bin_start,bin_end,count_direct,count_backtrans`.
std::string scope_csv(const ScopeAnalysis& scope);

/// Quality of translating the original source versus translating the
/// back-translation of the reference, both scored against the reference.
struct GapReport {
  std::size_t sentences = 0;
  double bleu_direct = 0.0;
  double bleu_backtrans = 0.0;
  std::vector<double> gleu_direct;
  std::vector<double> gleu_backtrans;
};
GapReport backtranslation_gap(const Bitext& bitext, Translator& backend);

// ---------------------------------------------------------------------------

struct SimplificationTestSet {
  std::vector<std::string> sources;
  /// Precomputed system outputs; when present the simplifier is not run.
  std::optional<std::vector<std::string>> outputs;
  std::vector<std::vector<std::string>> references;
};

/// JSONL lines {"src": str, "refs": [str, ...], "output"?: str}.
SimplificationTestSet read_testset_jsonl(std::istream& in);

enum class BenchMetric { kSari, kBleu };

struct BenchReport {
  BenchMetric metric = BenchMetric::kSari;
  std::size_t sentences = 0;
  double score = 0.0;
  std::vector<std::string> outputs;
};

/// SARI mode averages sentence SARI over the set (any number >= 1 of
/// references). BLEU mode takes corpus BLEU and needs exactly one
/// reference per source.
BenchReport simplification_benchmark(Simplifier& simplifier, const SimplificationTestSet& testset,
                                     BenchMetric metric);

}  // namespace bbapp
