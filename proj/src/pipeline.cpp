#include "bbapp/pipeline.hpp"

#include <chrono>
#include <ctime>
#include <numeric>

#include "bbapp/hash.hpp"

namespace bbapp {

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> checked(std::vector<std::string> out, std::size_t expected,
                                 const std::string& who) {
  if (out.size() != expected) {
    throw ProtocolError(who + " returned " + std::to_string(out.size()) + " outputs for " +
                        std::to_string(expected) + " inputs");
  }
  return out;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

std::string bitext_digest(const Bitext& bitext) {
  std::string blob = bitext.pair.str() + "\n";
  for (const auto& p : bitext.pairs) {
    blob += sha256_fields({p.id, p.src, p.tgt});
  }
  return sha256_hex(blob);
}

EvalRun run_app(const Bitext& test, Simplifier& simplifier, Translator& backend) {
  EvalRun run{test.pair, {}, simplifier.id(), backend.engine_id(), {}, utc_now(), {}};
  run.run_id = sha256_fields({bitext_digest(test), run.simplifier_id, run.backend_id});
  if (!backend.supports(test.pair)) {
    throw ContractViolation("backend " + backend.engine_id() + " cannot translate " +
                            test.pair.str());
  }
  if (test.pairs.empty()) {
    run.finished_at = utc_now();
    return run;
  }

  std::vector<std::string> sources;
  sources.reserve(test.size());
  for (const auto& p : test.pairs) sources.push_back(p.src);

  const auto simplified =
      checked(simplifier.simplify_batch(sources), sources.size(), "simplifier " + simplifier.id());
  const auto mt_orig = checked(backend.translate_batch(sources, test.pair), sources.size(),
                               "backend " + backend.engine_id());
  const auto mt_simple = checked(backend.translate_batch(simplified, test.pair), sources.size(),
                                 "backend " + backend.engine_id());

  run.records.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    EvalRecord r;
    r.id = test.pairs[i].id;
    r.x = test.pairs[i].src;
    r.x_star = simplified[i];
    r.y = test.pairs[i].tgt;
    r.y_hat = mt_orig[i];
    r.y_hat_star = mt_simple[i];
    const Tokens ref = tokenize(r.y);
    r.gleu_orig = sentence_gleu(tokenize(r.y_hat), ref);
    r.gleu_simple = sentence_gleu(tokenize(r.y_hat_star), ref);
    r.delta_gleu = r.gleu_simple - r.gleu_orig;
    run.records.push_back(std::move(r));
  }
  run.finished_at = utc_now();
  return run;
}

double recompute_delta_gleu(const EvalRecord& record) {
  const Tokens ref = tokenize(record.y);
  return sentence_gleu(tokenize(record.y_hat_star), ref) - sentence_gleu(tokenize(record.y_hat), ref);
}

std::optional<double> ter_change(double ter_original, double ter_simplified) {
  if (ter_original > 0.0) return percent_delta(ter_original, ter_simplified);
  if (ter_simplified == 0.0) return 0.0;
  return std::nullopt;
}

TableRow evaluate_run(const EvalRun& run) {
  if (run.records.empty()) throw SizingError("cannot evaluate an empty run");
  std::vector<Tokens> refs;
  std::vector<Tokens> orig;
  std::vector<Tokens> simple;
  std::vector<double> gleu_orig;
  std::vector<double> gleu_simple;
  long edits_orig = 0;
  long edits_simple = 0;
  long ref_len = 0;
  for (const auto& r : run.records) {
    refs.push_back(tokenize(r.y));
    orig.push_back(tokenize(r.y_hat));
    simple.push_back(tokenize(r.y_hat_star));
    edits_orig += ter_edits(orig.back(), refs.back()).edits;
    edits_simple += ter_edits(simple.back(), refs.back()).edits;
    ref_len += static_cast<long>(refs.back().size());
    gleu_orig.push_back(r.gleu_orig);
    gleu_simple.push_back(r.gleu_simple);
  }
  if (ref_len == 0) throw UndefinedError("corpus TER undefined: all references are empty");

  TableRow row;
  row.pair = run.pair.str();
  row.sentences = run.records.size();
  row.bleu_original = corpus_bleu(orig, refs).bleu;
  row.bleu_simplified = corpus_bleu(simple, refs).bleu;
  row.ter_original = static_cast<double>(edits_orig) / static_cast<double>(ref_len);
  row.ter_simplified = static_cast<double>(edits_simple) / static_cast<double>(ref_len);
  row.ter_pct_delta = ter_change(row.ter_original, row.ter_simplified);
  row.mean_gleu_original = mean(gleu_orig);
  row.mean_gleu_simplified = mean(gleu_simple);
  return row;
}

EvalTables evaluate_runs(std::span<const EvalRun> runs) {
  EvalTables tables;
  for (const auto& run : runs) tables.rows.push_back(evaluate_run(run));
  return tables;
}

std::vector<SentenceTer> sentence_ter(const EvalRun& run) {
  std::vector<SentenceTer> out;
  out.reserve(run.records.size());
  for (const auto& r : run.records) {
    const Tokens ref = tokenize(r.y);
    SentenceTer s{r.id, std::nullopt, std::nullopt};
    if (!ref.empty()) {
      s.original = ter(tokenize(r.y_hat), ref).ter;
      s.simplified = ter(tokenize(r.y_hat_star), ref).ter;
    }
    out.push_back(std::move(s));
  }
  return out;
}

ScopeAnalysis scope_of_simplification(std::span<const double> direct,
                                      std::span<const double> backtrans, double bin_width) {
  if (direct.empty() || backtrans.empty()) {
    throw SizingError("scope analysis needs non-empty direct and back-translation scores");
  }
  ScopeAnalysis out{gleu_distribution(direct, bin_width), gleu_distribution(backtrans, bin_width),
                    0.0};
  const auto pd = out.direct.frequencies();
  const auto pb = out.backtrans.frequencies();
  for (std::size_t i = 0; i < pd.size(); ++i) out.dominance_mass += std::max(0.0, pb[i] - pd[i]);
  out.dominance_mass = std::clamp(out.dominance_mass, 0.0, 1.0);
  return out;
}

GapReport backtranslation_gap(const Bitext& bitext, Translator& backend) {
  if (bitext.pairs.empty()) throw SizingError("back-translation gap needs a non-empty bitext");
  std::vector<std::string> sources;
  std::vector<std::string> targets;
  for (const auto& p : bitext.pairs) {
    sources.push_back(p.src);
    targets.push_back(p.tgt);
  }
  const auto direct = checked(backend.translate_batch(sources, bitext.pair), sources.size(),
                              "backend " + backend.engine_id());
  const auto back = checked(backend.translate_batch(targets, bitext.pair.reversed()),
                            targets.size(), "backend " + backend.engine_id());
  const auto via_back = checked(backend.translate_batch(back, bitext.pair), back.size(),
                                "backend " + backend.engine_id());

  GapReport report;
  report.sentences = bitext.size();
  std::vector<Tokens> refs;
  std::vector<Tokens> hyp_direct;
  std::vector<Tokens> hyp_back;
  for (std::size_t i = 0; i < bitext.size(); ++i) {
    refs.push_back(tokenize(targets[i]));
    hyp_direct.push_back(tokenize(direct[i]));
    hyp_back.push_back(tokenize(via_back[i]));
    report.gleu_direct.push_back(sentence_gleu(hyp_direct.back(), refs.back()));
    report.gleu_backtrans.push_back(sentence_gleu(hyp_back.back(), refs.back()));
  }
  report.bleu_direct = corpus_bleu(hyp_direct, refs).bleu;
  report.bleu_backtrans = corpus_bleu(hyp_back, refs).bleu;
  return report;
}

BenchReport simplification_benchmark(Simplifier& simplifier, const SimplificationTestSet& testset,
                                     BenchMetric metric) {
  const std::size_t n = testset.sources.size();
  if (n == 0) throw SizingError("empty simplification test set");
  if (testset.references.size() != n) {
    throw ContractViolation("test set has " + std::to_string(testset.references.size()) +
                            " reference lists for " + std::to_string(n) + " sources");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (testset.references[i].empty()) {
      throw ContractViolation("source " + std::to_string(i) + " has no references");
    }
    if (metric == BenchMetric::kBleu && testset.references[i].size() != 1) {
      throw ContractViolation("BLEU benchmark needs exactly one reference per source; source " +
                              std::to_string(i) + " has " +
                              std::to_string(testset.references[i].size()));
    }
  }

  BenchReport report;
  report.metric = metric;
  report.sentences = n;
  report.outputs = testset.outputs ? *testset.outputs
                                   : checked(simplifier.simplify_batch(testset.sources), n,
                                             "simplifier " + simplifier.id());
  if (report.outputs.size() != n) {
    throw ContractViolation("test set outputs are not aligned with its sources");
  }

  if (metric == BenchMetric::kSari) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Tokens> refs;
      for (const auto& r : testset.references[i]) refs.push_back(tokenize(r));
      total += sari(tokenize(testset.sources[i]), tokenize(report.outputs[i]), refs).sari;
    }
    report.score = total / static_cast<double>(n);
  } else {
    std::vector<Tokens> hyps;
    std::vector<Tokens> refs;
    for (std::size_t i = 0; i < n; ++i) {
      hyps.push_back(tokenize(report.outputs[i]));
      refs.push_back(tokenize(testset.references[i].front()));
    }
    report.score = corpus_bleu(hyps, refs).bleu;
  }
  return report;
}

}  // namespace bbapp
