#include "bbapp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "bbapp/error.hpp"

namespace bbapp {

namespace {

using GramSet = std::unordered_set<Tokens, NGramHash>;

GramSet gram_set(std::span<const Token> tokens, int n) {
  const NGramMultiset grams = ngrams(tokens, n);
  GramSet out;
  for (const auto& [gram, count] : grams.entries()) out.insert(gram);
  return out;
}

GramSet set_intersection(const GramSet& a, const GramSet& b) {
  GramSet out;
  for (const auto& g : a) {
    if (b.contains(g)) out.insert(g);
  }
  return out;
}

GramSet set_difference(const GramSet& a, const GramSet& b) {
  GramSet out;
  for (const auto& g : a) {
    if (!b.contains(g)) out.insert(g);
  }
  return out;
}

// num / den, with 0/0 resolved by whether the other side is empty.
double ratio(std::size_t num, std::size_t den, std::size_t other) {
  if (den == 0) return other == 0 ? 1.0 : 0.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

struct PrecisionRecall {
  double precision;
  double recall;
};

PrecisionRecall compare_sets(const GramSet& candidate, const GramSet& reference) {
  const std::size_t hits = set_intersection(candidate, reference).size();
  return {ratio(hits, candidate.size(), reference.size()),
          ratio(hits, reference.size(), candidate.size())};
}

double f1(PrecisionRecall pr) {
  const double sum = pr.precision + pr.recall;
  return sum > 0.0 ? 2.0 * pr.precision * pr.recall / sum : 0.0;
}

}  // namespace

BleuReport corpus_bleu(std::span<const Tokens> hyps, std::span<const Tokens> refs,
                       int max_order) {
  if (hyps.size() != refs.size()) {
    throw ContractViolation("corpus_bleu: " + std::to_string(hyps.size()) +
                            " hypotheses vs " + std::to_string(refs.size()) +
                            " references");
  }
  if (hyps.empty()) throw ContractViolation("corpus_bleu: empty corpus");
  if (max_order < 1) throw ContractViolation("corpus_bleu: max_order must be >= 1");

  const auto orders = static_cast<std::size_t>(max_order);
  BleuReport report;
  report.matches.assign(orders, 0);
  report.totals.assign(orders, 0);
  std::vector<long> ref_totals(orders, 0);

  for (std::size_t i = 0; i < hyps.size(); ++i) {
    report.hyp_len += static_cast<long>(hyps[i].size());
    report.ref_len += static_cast<long>(refs[i].size());
    for (int n = 1; n <= max_order; ++n) {
      const auto h = ngrams(hyps[i], n);
      const auto r = ngrams(refs[i], n);
      const auto k = static_cast<std::size_t>(n - 1);
      report.matches[k] += clipped_matches(h, r);
      report.totals[k] += h.total();
      ref_totals[k] += r.total();
    }
  }

  report.precisions.resize(orders);
  bool any_zero = false;
  double log_sum = 0.0;
  for (std::size_t k = 0; k < orders; ++k) {
    const double p = report.totals[k] == 0
                         ? (ref_totals[k] == 0 ? 1.0 : 0.0)
                         : static_cast<double>(report.matches[k]) /
                               static_cast<double>(report.totals[k]);
    report.precisions[k] = p;
    if (p == 0.0) {
      any_zero = true;
    } else {
      log_sum += std::log(p);
    }
  }

  if (report.hyp_len == 0) {
    report.brevity_penalty = 0.0;
  } else if (report.hyp_len > report.ref_len) {
    report.brevity_penalty = 1.0;
  } else {
    report.brevity_penalty =
        std::exp(1.0 - static_cast<double>(report.ref_len) /
                           static_cast<double>(report.hyp_len));
  }

  if (report.hyp_len == 0 || any_zero) {
    report.bleu = 0.0;
  } else {
    report.bleu = 100.0 * report.brevity_penalty *
                  std::exp(log_sum / static_cast<double>(orders));
  }
  return report;
}

double sentence_gleu(std::span<const Token> hyp, std::span<const Token> ref,
                     int max_order) {
  if (hyp.empty() && ref.empty()) return 1.0;
  if (hyp.empty() || ref.empty()) return 0.0;
  long matches = 0;
  long hyp_total = 0;
  long ref_total = 0;
  for (int n = 1; n <= max_order; ++n) {
    const auto h = ngrams(hyp, n);
    const auto r = ngrams(ref, n);
    matches += clipped_matches(h, r);
    hyp_total += h.total();
    ref_total += r.total();
  }
  const double precision = static_cast<double>(matches) / static_cast<double>(hyp_total);
  const double recall = static_cast<double>(matches) / static_cast<double>(ref_total);
  return std::min(precision, recall);
}

SariReport sari(std::span<const Token> source, std::span<const Token> output,
                std::span<const Tokens> references, int max_order) {
  if (references.empty()) throw ContractViolation("sari: at least one reference required");
  if (max_order < 1) throw ContractViolation("sari: max_order must be >= 1");

  SariReport report;
  double sum = 0.0;
  for (int n = 1; n <= max_order; ++n) {
    const GramSet src = gram_set(source, n);
    const GramSet out = gram_set(output, n);
    GramSet refs;
    for (const auto& r : references) refs.merge(gram_set(r, n));

    SariComponents c;
    c.f_keep = f1(compare_sets(set_intersection(src, out), set_intersection(src, refs)));
    c.f_add = f1(compare_sets(set_difference(out, src), set_difference(refs, src)));
    c.p_del = compare_sets(set_difference(src, out), set_difference(src, refs)).precision;
    sum += (c.f_keep + c.f_add + c.p_del) / 3.0;
    report.orders.push_back(c);
  }
  report.sari = 100.0 * sum / static_cast<double>(max_order);
  return report;
}

std::vector<double> Histogram::frequencies() const {
  std::vector<double> out(counts.size(), 0.0);
  if (total == 0) return out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return out;
}

Histogram gleu_distribution(std::span<const double> scores, double bin_width) {
  // Absorbs representation error such as 0.3 / 0.1 = 2.9999999999999996.
  constexpr double kSlack = 1e-9;
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw ContractViolation("gleu_distribution: bin_width must be > 0");
  }
  const auto bins = static_cast<std::size_t>(
      std::max(1.0, std::ceil(1.0 / bin_width - kSlack)));

  Histogram h;
  h.bin_edges.reserve(bins + 1);
  for (std::size_t k = 0; k < bins; ++k) {
    h.bin_edges.push_back(static_cast<double>(k) * bin_width);
  }
  h.bin_edges.push_back(1.0);
  h.counts.assign(bins, 0);

  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw ContractViolation("gleu_distribution: score " + std::to_string(s) +
                              " outside [0, 1]");
    }
    auto idx = static_cast<std::size_t>(std::floor(s / bin_width + kSlack));
    idx = std::min(idx, bins - 1);
    ++h.counts[idx];
    ++h.total;
  }
  return h;
}

double percent_delta(double before, double after) {
  if (!(before > 0.0) || !std::isfinite(before) || !std::isfinite(after)) {
    throw ContractViolation("percent_delta: baseline must be a positive number");
  }
  const double pct = 100.0 * (after - before) / before;
  const double rounded = std::round(pct * 10.0) / 10.0;
  return rounded == 0.0 ? 0.0 : rounded;
}

}  // namespace bbapp
