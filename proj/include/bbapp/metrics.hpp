#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bbapp/text.hpp"

namespace bbapp {

struct BleuReport {
  double bleu = 0.0;  // 0..100
  std::vector<double> precisions;  // one per order, 0..1
  std::vector<long> matches;       // clipped matches per order
  std::vector<long> totals;        // hypothesis n-grams per order
  double brevity_penalty = 0.0;
  long hyp_len = 0;
  long ref_len = 0;
};

/// Corpus-level BLEU (single reference, geometric mean, no smoothing).
/// Counts are aggregated over the whole corpus before precisions are taken.
/// An order with no n-grams on either side counts as precision 1; an order
/// with hypothesis n-grams and no matches, or no hypothesis n-grams but
/// reference n-grams, makes the score 0.
BleuReport corpus_bleu(std::span<const Tokens> hyps, std::span<const Tokens> refs,
                       int max_order = 4);

/// Sentence-level GLEU: min(precision, recall) over n-grams of orders 1..4
/// pooled together. Both sides empty gives 1, exactly one empty gives 0.
double sentence_gleu(std::span<const Token> hyp, std::span<const Token> ref,
                     int max_order = 4);

enum class TerMode { kShifts, kNoShifts };

struct TerReport {
  double ter = 0.0;
  long edits = 0;   // insertions + deletions + substitutions + shifts
  long shifts = 0;
  long ref_len = 0;
};

/// Limits for the greedy block-shift search.
struct TerShiftLimits {
  int max_block = 10;
  int max_distance = 10;
};

/// Word-level Levenshtein distance.
long edit_distance(std::span<const Token> hyp, std::span<const Token> ref);

/// Edits (including shifts) needed to turn `hyp` into `ref`. Unlike `ter`,
/// an empty reference is allowed (all hypothesis words are edits). Used for
/// corpus-level aggregation.
TerReport ter_edits(std::span<const Token> hyp, std::span<const Token> ref,
                    TerMode mode = TerMode::kShifts, TerShiftLimits limits = {});

/// Translation error rate = edits / |ref|. Throws UndefinedError on an empty
/// reference.
TerReport ter(std::span<const Token> hyp, std::span<const Token> ref,
              TerMode mode = TerMode::kShifts, TerShiftLimits limits = {});

struct SariComponents {
  double f_keep = 0.0;
  double f_add = 0.0;
  double p_del = 0.0;
};

struct SariReport {
  double sari = 0.0;  // 0..100
  std::vector<SariComponents> orders;  // index 0 is unigrams
};

/// SARI over n-gram sets of orders 1..max_order. The reference side of each
/// operation uses the union of all references. A ratio whose candidate and
/// reference sides are both empty is 1; any other zero denominator gives 0.
SariReport sari(std::span<const Token> source, std::span<const Token> output,
                std::span<const Tokens> references, int max_order = 4);

struct Histogram {
  std::vector<double> bin_edges;  // size = counts.size() + 1
  std::vector<long> counts;
  long total = 0;

  std::size_t bins() const { return counts.size(); }
  /// count / total per bin; all zeros when empty.
  std::vector<double> frequencies() const;
};

/// Fixed-width bins over [0, 1]; the last bin is closed on the right and may
/// be narrower than `bin_width`.
Histogram gleu_distribution(std::span<const double> scores, double bin_width);

/// 100 * (after - before) / before rounded half away from zero to one
/// decimal.
double percent_delta(double before, double after);

}  // namespace bbapp
