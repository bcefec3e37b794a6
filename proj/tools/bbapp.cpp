#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bbapp/backends.hpp"
#include "bbapp/cache.hpp"
#include "bbapp/corpus.hpp"
#include "bbapp/error.hpp"
#include "bbapp/humaneval.hpp"
#include "bbapp/humaneval_server.hpp"
#include "bbapp/metrics.hpp"
#include "bbapp/pipeline.hpp"
#include "bbapp/rules.hpp"
#include "CLI11.hpp"
#include "json.hpp"

namespace {

using namespace bbapp;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Shared option groups

struct HttpOptions {
  std::string endpoint;
  std::size_t batch_size = 32;
  int max_concurrency = 4;
  int max_retries = 3;
  int backoff_ms = 200;
  int timeout_s = 60;
  std::string engine_id;

  HttpConfig config() const {
    if (endpoint.empty()) throw ValidationError("--endpoint is required for http backends");
    return HttpConfig{.endpoint = endpoint,
                      .batch_size = batch_size,
                      .max_concurrency = max_concurrency,
                      .max_retries = max_retries,
                      .backoff_base = std::chrono::milliseconds(backoff_ms),
                      .timeout = std::chrono::seconds(timeout_s),
                      .engine_id = engine_id};
  }
};

void add_http_options(CLI::App& cmd, HttpOptions& o) {
  cmd.add_option("--endpoint", o.endpoint, "Base URL of the translation service");
  cmd.add_option("--batch-size", o.batch_size, "Texts per request")->capture_default_str();
  cmd.add_option("--max-concurrency", o.max_concurrency, "Requests in flight")->capture_default_str();
  cmd.add_option("--max-retries", o.max_retries, "Retries per chunk")->capture_default_str();
  cmd.add_option("--backoff-ms", o.backoff_ms, "Initial retry backoff")->capture_default_str();
  cmd.add_option("--timeout", o.timeout_s, "Request timeout in seconds")->capture_default_str();
  cmd.add_option("--engine-id", o.engine_id, "Engine id used in cache keys and run ids");
}

struct BackendOptions {
  std::string kind = "mock";
  HttpOptions http;
  std::string cache;
  std::string mock_rules;
  std::string lexicon;

  std::shared_ptr<Translator> make() const {
    std::shared_ptr<Translator> backend;
    if (kind == "mock") {
      MockLexicon lex;
      if (!lexicon.empty()) lex.overrides = load_mock_overrides(lexicon);
      if (!mock_rules.empty()) lex.reverse_rules = load_rules(mock_rules);
      backend = std::make_shared<MockTranslator>(std::move(lex));
    } else {
      backend = std::make_shared<HttpTranslator>(http.config());
    }
    if (cache.empty()) return backend;
    return std::make_shared<CachedTranslator>(backend, std::make_shared<TranslationCache>(cache));
  }
};

void add_backend_options(CLI::App& cmd, BackendOptions& o) {
  cmd.add_option("--backend", o.kind, "Translation backend")
      ->check(CLI::IsMember({"mock", "http"}))
      ->capture_default_str();
  add_http_options(cmd, o.http);
  cmd.add_option("--cache", o.cache, "Persistent translation cache (JSONL)");
  cmd.add_option("--mock-rules", o.mock_rules, "Mock: rules applied after reverse translation");
  cmd.add_option("--lexicon", o.lexicon, "Mock: token overrides TSV (lang, token, mapped)");
}

struct SimplifierOptions {
  std::string kind = "identity";
  std::string rules;
  std::string language = "en";
  HttpOptions http;

  std::unique_ptr<Simplifier> make() const {
    if (kind == "identity") return std::make_unique<IdentitySimplifier>();
    if (kind == "rules") {
      if (rules.empty()) throw ValidationError("--rules is required for the rules simplifier");
      return std::make_unique<RuleSimplifier>(load_rules(rules));
    }
    return std::make_unique<HttpSimplifier>(http.config(), language);
  }
};

void add_simplifier_options(CLI::App& cmd, SimplifierOptions& o, bool with_http = true) {
  cmd.add_option("--simplifier", o.kind, "Source-side simplifier")
      ->check(CLI::IsMember({"identity", "rules", "http"}))
      ->capture_default_str();
  cmd.add_option("--rules", o.rules, "Paraphrase rules TSV (pattern, replacement)");
  cmd.add_option("--simplifier-lang", o.language, "Language of the http simplifier")
      ->capture_default_str();
  if (!with_http) return;
  cmd.add_option("--simplifier-endpoint", o.http.endpoint, "Base URL of the simplification service");
  cmd.add_option("--simplifier-batch-size", o.http.batch_size)->capture_default_str();
  cmd.add_option("--simplifier-engine-id", o.http.engine_id);
}

struct BitextOptions {
  std::string path;
  std::string format = "tsv";
  std::string pair;

  Bitext load() const {
    auto b = load_bitext(path, parse_bitext_format(format), parse_lang_pair(pair));
    check_unique_ids(b);
    return b;
  }
};

void add_bitext_options(CLI::App& cmd, BitextOptions& o, const std::string& flag = "--bitext") {
  cmd.add_option(flag, o.path, "Bitext path (moses: file prefix)")->required();
  cmd.add_option("--format", o.format, "tsv | jsonl | moses")
      ->check(CLI::IsMember({"tsv", "jsonl", "moses"}))
      ->capture_default_str();
  cmd.add_option("--pair", o.pair, "Language pair, e.g. en-hu")->required();
}

// ---------------------------------------------------------------------------
// I/O helpers

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open " + path);
  return in;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::vector<std::string> out;
  std::string line;
  if (path == "-") {
    while (std::getline(std::cin, line)) out.push_back(line);
    return out;
  }
  auto in = open_in(path);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

std::vector<double> read_scores(const std::string& path) {
  std::vector<double> out;
  std::size_t n = 0;
  for (const auto& line : read_lines(path)) {
    ++n;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw ParseError(path + ": not a number: " + line, n);
    }
  }
  return out;
}

/// Writes to `path`, or stdout for "" / "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

EvalRun load_run(const std::string& path) {
  auto in = open_in(path);
  return read_run_json(in);
}

std::vector<humaneval::EvalItem> load_items(const std::string& path) {
  auto in = open_in(path);
  return humaneval::read_items_jsonl(in);
}

// ---------------------------------------------------------------------------
// Subcommands

struct BacktranslateCmd {
  BitextOptions bitext;
  BackendOptions backend;
  std::string output;

  void run() const {
    const Bitext b = bitext.load();
    std::vector<std::string> targets;
    for (const auto& p : b.pairs) targets.push_back(p.tgt);
    auto mt = backend.make();
    const auto back = targets.empty() ? std::vector<std::string>{}
                                      : mt->translate_batch(targets, b.pair.reversed());
    std::string text;
    for (std::size_t i = 0; i < b.pairs.size(); ++i) {
      text += b.pairs[i].id + "\t" + b.pairs[i].src + "\t" + back[i] + "\n";
    }
    emit(output, text);
  }
};

struct BuildCorpusCmd {
  std::vector<std::string> inputs;
  std::string format = "tsv";
  BackendOptions backend;
  std::size_t min_len = 3;
  std::size_t max_len = 50;
  bool dedupe = false;
  std::size_t chunk_size = 64;
  int concurrency = 1;
  std::string output;
  std::string split_dir;
  std::vector<double> ratios{0.8, 0.1, 0.1};
  std::uint64_t seed = 0;

  void run() const {
    std::vector<Bitext> bitexts;
    for (const auto& spec : inputs) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos) throw ValidationError("--bitext expects PAIR=PATH, got " + spec);
      bitexts.push_back(load_bitext(spec.substr(eq + 1), parse_bitext_format(format),
                                    parse_lang_pair(spec.substr(0, eq))));
      check_unique_ids(bitexts.back());
    }
    auto mt = backend.make();
    BuildOptions opts{.filter = {min_len, max_len},
                      .dedupe = dedupe,
                      .chunk_size = chunk_size,
                      .concurrency = concurrency};
    const AppCorpus corpus = build_app_corpus(bitexts, *mt, opts);
    emit(output, app_corpus_jsonl(corpus));
    std::cerr << corpus.size() << " records\n";
    if (split_dir.empty()) return;
    if (ratios.size() != 3) throw ValidationError("--split-ratios takes three values");
    const auto split = split_corpus(corpus, {ratios[0], ratios[1], ratios[2]}, seed);
    std::filesystem::create_directories(split_dir);
    const std::filesystem::path dir(split_dir);
    emit((dir / "train.jsonl").string(), app_corpus_jsonl(split.train));
    emit((dir / "val.jsonl").string(), app_corpus_jsonl(split.val));
    emit((dir / "test.jsonl").string(), app_corpus_jsonl(split.test));
    std::cerr << "split " << split.train.size() << "/" << split.val.size() << "/"
              << split.test.size() << "\n";
  }
};

struct SimplifyCmd {
  SimplifierOptions simplifier;
  std::string input = "-";
  std::string output;

  void run() const {
    const auto lines = read_lines(input);
    auto s = simplifier.make();
    std::string text;
    if (!lines.empty()) {
      for (const auto& line : s->simplify_batch(lines)) text += line + "\n";
    }
    emit(output, text);
  }
};

struct RunAppCmd {
  BitextOptions test;
  SimplifierOptions simplifier;
  BackendOptions backend;
  std::string output;

  void run() const {
    const Bitext b = test.load();
    auto s = simplifier.make();
    auto mt = backend.make();
    const EvalRun r = run_app(b, *s, *mt);
    std::ostringstream out;
    write_run_json(r, out);
    emit(output, out.str());
    std::cerr << "run " << r.run_id << ": " << r.records.size() << " records\n";
  }
};

struct EvaluateCmd {
  std::vector<std::string> runs;
  std::string tsv;
  std::string json;
  std::string sentence_ter_out;

  void run() const {
    std::vector<EvalRun> loaded;
    for (const auto& path : runs) loaded.push_back(load_run(path));
    const EvalTables tables = evaluate_runs(loaded);
    emit(tsv, render_tables_tsv(tables));
    if (!json.empty()) emit(json, tables_json(tables) + "\n");
    if (sentence_ter_out.empty()) return;
    std::string text = "run\tid\tter_original\tter_simplified\n";
    for (const auto& r : loaded) {
      for (const auto& s : sentence_ter(r)) {
        text += r.run_id + "\t" + s.id + "\t" + (s.original ? fmt(*s.original, 4) : "NA") + "\t" +
                (s.simplified ? fmt(*s.simplified, 4) : "NA") + "\n";
      }
    }
    emit(sentence_ter_out, text);
  }
};

struct GapCmd {
  BitextOptions bitext;
  BackendOptions backend;
  std::size_t sample = 0;
  std::uint64_t seed = 0;
  std::string output;

  GapReport compute() const {
    Bitext b = bitext.load();
    if (sample > 0 && sample < b.size()) b = sample_pairs(b, sample, seed);
    auto mt = backend.make();
    return backtranslation_gap(b, *mt);
  }

  void run() const {
    const auto gap = compute();
    ordered_json j;
    j["sentences"] = gap.sentences;
    j["bleu_direct"] = gap.bleu_direct;
    j["bleu_backtrans"] = gap.bleu_backtrans;
    emit(output, "sentences\tbleu_direct\tbleu_backtrans\n" + std::to_string(gap.sentences) + "\t" +
                     fmt(gap.bleu_direct, 2) + "\t" + fmt(gap.bleu_backtrans, 2) + "\n");
    std::cerr << j.dump() << "\n";
  }
};

struct ScopeCmd {
  std::string direct;
  std::string backtrans;
  GapCmd gap;
  double bin_width = 0.05;
  std::string output;

  void run() const {
    std::vector<double> d;
    std::vector<double> b;
    if (!direct.empty() || !backtrans.empty()) {
      if (direct.empty() || backtrans.empty()) {
        throw ValidationError("--direct and --backtrans go together");
      }
      d = read_scores(direct);
      b = read_scores(backtrans);
    } else {
      if (gap.bitext.path.empty()) throw ValidationError("give score files or --bitext/--pair");
      if (gap.bitext.pair.empty()) throw ValidationError("--pair is required with --bitext");
      const auto g = gap.compute();
      d = g.gleu_direct;
      b = g.gleu_backtrans;
    }
    const auto scope = scope_of_simplification(d, b, bin_width);
    emit(output, scope_csv(scope));
    std::cerr << "dominance_mass\t" << fmt(scope.dominance_mass, 4) << "\n";
  }
};

struct BenchCmd {
  std::string testset;
  std::string metric = "sari";
  SimplifierOptions simplifier;
  std::string outputs;

  void run() const {
    auto in = open_in(testset);
    const auto set = read_testset_jsonl(in);
    auto s = simplifier.make();
    const auto m = metric == "sari" ? BenchMetric::kSari : BenchMetric::kBleu;
    const auto rep = simplification_benchmark(*s, set, m);
    std::cout << "metric\tsentences\tscore\n"
              << metric << "\t" << rep.sentences << "\t" << fmt(rep.score, 2) << "\n";
    if (outputs.empty()) return;
    std::string text;
    for (const auto& o : rep.outputs) text += o + "\n";
    emit(outputs, text);
  }
};

struct SampleCmd {
  std::vector<std::string> runs;
  humaneval::SampleOptions options;
  std::string output;

  void run() const {
    std::vector<humaneval::EvalItem> all;
    for (const auto& path : runs) {
      const auto sample = humaneval::stratified_sample(load_run(path), options);
      for (const auto& w : sample.warnings) std::cerr << "warning: " << path << ": " << w << "\n";
      all.insert(all.end(), sample.items.begin(), sample.items.end());
    }
    std::ostringstream out;
    humaneval::write_items_jsonl(all, out);
    emit(output, out.str());
    std::cerr << all.size() << " items\n";
  }
};

struct ServeCmd {
  std::string items;
  std::string state_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
  humaneval::ServiceOptions options;

  void run() const {
    humaneval::Service service(load_items(items), state_dir, options);
    humaneval::Server server(service);
    if (!server.bind(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
    std::cerr << "serving " << service.items().size() << " items on http://" << host << ":" << port
              << "\n";
    server.listen_after_bind();
  }
};

struct ReportCmd {
  std::string items;
  std::string state_dir;
  std::string language;
  bool json = false;

  void run() const {
    const auto item_list = load_items(items);
    auto log = open_in((std::filesystem::path(state_dir) / "events.jsonl").string());
    const auto state = humaneval::replay_log(log);
    const auto ratings = state.rating_list();
    const auto rep = humaneval::aggregate(
        ratings, item_list, language.empty() ? std::nullopt : std::optional<std::string>(language));
    std::cout << (json ? humaneval::report_json(rep) + "\n" : humaneval::format_report(rep));
  }
};

struct ScoreCmd {
  std::string input;
  std::string output;
  std::string hyp;
  std::string ref;
  std::string src;
  std::vector<std::string> metrics{"bleu", "gleu", "ter"};
  std::string sentences;

  void run() const {
    if (!input.empty()) {
      run_jsonl();
      return;
    }
    if (hyp.empty() || ref.empty()) throw ValidationError("give --input, or --hyp and --ref");
    const auto h = read_lines(hyp);
    const auto r = read_lines(ref);
    if (h.size() != r.size()) {
      throw ValidationError("hypothesis and reference line counts differ: " +
                            std::to_string(h.size()) + " vs " + std::to_string(r.size()));
    }
    std::vector<std::string> s;
    const bool want_sari = std::find(metrics.begin(), metrics.end(), "sari") != metrics.end();
    if (want_sari) {
      if (src.empty()) throw ValidationError("sari needs --src");
      s = read_lines(src);
      if (s.size() != h.size()) throw ValidationError("source line count differs");
    }
    std::vector<Tokens> ht;
    std::vector<Tokens> rt;
    for (std::size_t i = 0; i < h.size(); ++i) {
      ht.push_back(tokenize(h[i]));
      rt.push_back(tokenize(r[i]));
    }

    std::string header = "line";
    for (const auto& m : metrics) header += "\t" + m;
    std::string rows = header + "\n";
    std::vector<double> sums(metrics.size(), 0.0);
    long pooled_edits = 0;
    long ter_len = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      rows += std::to_string(i + 1);
      for (std::size_t k = 0; k < metrics.size(); ++k) {
        double v = 0.0;
        if (metrics[k] == "bleu") {
          v = corpus_bleu(std::span(&ht[i], 1), std::span(&rt[i], 1)).bleu;
        } else if (metrics[k] == "gleu") {
          v = sentence_gleu(ht[i], rt[i]);
        } else if (metrics[k] == "ter") {
          const auto t = ter_edits(ht[i], rt[i]);
          pooled_edits += t.edits;
          ter_len += t.ref_len;
          v = t.ref_len > 0 ? static_cast<double>(t.edits) / static_cast<double>(t.ref_len) : 0.0;
        } else {
          v = sari(tokenize(s[i]), ht[i], std::vector<Tokens>{rt[i]}).sari;
        }
        sums[k] += v;
        rows += "\t" + fmt(v, 4);
      }
      rows += "\n";
    }
    if (!sentences.empty()) emit(sentences, rows);

    std::string summary = "metric\tscore\n";
    for (std::size_t k = 0; k < metrics.size(); ++k) {
      double v = 0.0;
      if (metrics[k] == "bleu") {
        v = h.empty() ? 0.0 : corpus_bleu(ht, rt).bleu;
      } else if (metrics[k] == "ter") {
        v = ter_len > 0 ? static_cast<double>(pooled_edits) / static_cast<double>(ter_len) : 0.0;
      } else {
        v = h.empty() ? 0.0 : sums[k] / static_cast<double>(h.size());
      }
      summary += metrics[k] + "\t" + fmt(v, 4) + "\n";
    }
    std::cout << summary;
  }

  /// {id, hyp, ref, src?, refs?} per line in; one score object per line
  /// out, then a corpus summary record.
  void run_jsonl() const {
    std::vector<Tokens> hyps;
    std::vector<Tokens> refs;
    std::vector<std::string> ids;
    std::vector<std::optional<double>> sari_scores;
    std::size_t n = 0;
    for (const auto& line : read_lines(input)) {
      ++n;
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
        ids.push_back(j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>()
                                                              : j["id"].dump())
                                       : std::to_string(n));
        hyps.push_back(tokenize(j.at("hyp").get<std::string>()));
        refs.push_back(tokenize(j.at("ref").get<std::string>()));
        if (j.contains("src")) {
          std::vector<Tokens> sari_refs;
          if (j.contains("refs")) {
            for (const auto& r : j["refs"]) sari_refs.push_back(tokenize(r.get<std::string>()));
          } else {
            sari_refs.push_back(refs.back());
          }
          sari_scores.push_back(sari(tokenize(j["src"].get<std::string>()), hyps.back(), sari_refs).sari);
        } else {
          sari_scores.push_back(std::nullopt);
        }
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(input + ": " + e.what(), n);
      }
    }

    std::string text;
    long edits = 0;
    long ref_len = 0;
    double gleu_sum = 0.0;
    double sari_sum = 0.0;
    std::size_t sari_n = 0;
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      ordered_json row;
      row["id"] = ids[i];
      row["bleu"] = corpus_bleu(std::span(&hyps[i], 1), std::span(&refs[i], 1)).bleu;
      const double g = sentence_gleu(hyps[i], refs[i]);
      row["gleu"] = g;
      gleu_sum += g;
      const auto t = ter_edits(hyps[i], refs[i]);
      edits += t.edits;
      ref_len += t.ref_len;
      row["ter"] = t.ref_len > 0 ? ordered_json(static_cast<double>(t.edits) / static_cast<double>(t.ref_len))
                                 : ordered_json(nullptr);
      if (sari_scores[i]) {
        row["sari"] = *sari_scores[i];
        sari_sum += *sari_scores[i];
        ++sari_n;
      }
      text += row.dump() + "\n";
    }
    ordered_json summary;
    summary["summary"] = true;
    summary["sentences"] = hyps.size();
    summary["bleu"] = hyps.empty() ? 0.0 : corpus_bleu(hyps, refs).bleu;
    summary["gleu"] = hyps.empty() ? 0.0 : gleu_sum / static_cast<double>(hyps.size());
    summary["ter"] = ref_len > 0 ? ordered_json(static_cast<double>(edits) / static_cast<double>(ref_len))
                                 : ordered_json(nullptr);
    if (sari_n > 0) summary["sari"] = sari_sum / static_cast<double>(sari_n);
    text += summary.dump() + "\n";
    emit(output, text);
  }
};

void print_nested(const std::exception& e, int depth = 0) {
  std::cerr << (depth == 0 ? "error: " : "  caused by: ") << e.what() << "\n";
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    print_nested(inner, depth + 1);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box MT preprocessing toolkit"};
  app.require_subcommand(1);

  BacktranslateCmd backtranslate;
  auto* bt = app.add_subcommand("backtranslate", "Translate the target side back into the source language");
  add_bitext_options(*bt, backtranslate.bitext);
  add_backend_options(*bt, backtranslate.backend);
  bt->add_option("-o,--output", backtranslate.output, "id<TAB>src<TAB>backtranslation lines");
  bt->callback([&] { backtranslate.run(); });

  BuildCorpusCmd build;
  auto* bc = app.add_subcommand("build-corpus", "Build a (source, back-translation) training corpus");
  bc->add_option("--bitext", build.inputs, "PAIR=PATH, repeatable")->required();
  bc->add_option("--format", build.format)->check(CLI::IsMember({"tsv", "jsonl", "moses"}))->capture_default_str();
  add_backend_options(*bc, build.backend);
  bc->add_option("--min-len", build.min_len)->capture_default_str();
  bc->add_option("--max-len", build.max_len)->capture_default_str();
  bc->add_flag("--dedupe", build.dedupe, "Drop exact (src, backtranslation) duplicates");
  bc->add_option("--chunk-size", build.chunk_size)->capture_default_str();
  bc->add_option("--concurrency", build.concurrency, "Chunks translated in parallel")->capture_default_str();
  bc->add_option("-o,--output", build.output, "Corpus JSONL");
  bc->add_option("--split-dir", build.split_dir, "Also write train/val/test JSONL here");
  bc->add_option("--split-ratios", build.ratios)->expected(3)->capture_default_str();
  bc->add_option("--seed", build.seed)->capture_default_str();
  bc->callback([&] { build.run(); });

  SimplifyCmd simplify;
  auto* sp = app.add_subcommand("simplify", "Simplify sentences, one per line");
  add_simplifier_options(*sp, simplify.simplifier);
  sp->add_option("-i,--input", simplify.input, "Input file, - for stdin")->capture_default_str();
  sp->add_option("-o,--output", simplify.output);
  sp->callback([&] { simplify.run(); });

  RunAppCmd run_app_cmd;
  auto* ra = app.add_subcommand("run-app", "Translate a test set with and without simplification");
  add_bitext_options(*ra, run_app_cmd.test, "--test");
  add_simplifier_options(*ra, run_app_cmd.simplifier);
  add_backend_options(*ra, run_app_cmd.backend);
  ra->add_option("-o,--output", run_app_cmd.output, "Run JSON");
  ra->callback([&] { run_app_cmd.run(); });

  EvaluateCmd evaluate;
  auto* ev = app.add_subcommand("evaluate", "BLEU/TER/GLEU tables for one or more runs");
  ev->add_option("runs", evaluate.runs, "Run JSON files")->required();
  ev->add_option("--tsv", evaluate.tsv, "Table output (default stdout)");
  ev->add_option("--json", evaluate.json);
  ev->add_option("--sentence-ter", evaluate.sentence_ter_out, "Per-sentence TER TSV");
  ev->callback([&] { evaluate.run(); });

  GapCmd gap;
  auto* gp = app.add_subcommand("backtranslation-gap",
                                "Compare MT(source) and MT(back-translated reference) against the reference");
  add_bitext_options(*gp, gap.bitext);
  add_backend_options(*gp, gap.backend);
  gp->add_option("--sample", gap.sample, "Score a uniform sample of this many pairs");
  gp->add_option("--seed", gap.seed)->capture_default_str();
  gp->add_option("-o,--output", gap.output);
  gp->callback([&] { gap.run(); });

  ScopeCmd scope;
  auto* sc = app.add_subcommand("scope", "Histograms of direct vs back-translated GLEU");
  sc->add_option("--direct", scope.direct, "Direct-translation scores, one per line");
  sc->add_option("--backtrans", scope.backtrans, "Back-translation scores, one per line");
  sc->add_option("--bitext", scope.gap.bitext.path, "Compute both score lists from a bitext");
  sc->add_option("--format", scope.gap.bitext.format)->capture_default_str();
  sc->add_option("--pair", scope.gap.bitext.pair);
  sc->add_option("--sample", scope.gap.sample);
  sc->add_option("--seed", scope.gap.seed)->capture_default_str();
  add_backend_options(*sc, scope.gap.backend);
  sc->add_option("--bin-width", scope.bin_width)->capture_default_str();
  sc->add_option("-o,--output", scope.output, "CSV output");
  sc->callback([&] { scope.run(); });

  BenchCmd bench;
  auto* bs = app.add_subcommand("bench-simplification", "Score a simplifier with SARI or BLEU");
  bs->add_option("--testset", bench.testset, "JSONL {src, refs, output?}")->required();
  bs->add_option("--metric", bench.metric)->check(CLI::IsMember({"sari", "bleu"}))->capture_default_str();
  add_simplifier_options(*bs, bench.simplifier);
  bs->add_option("--outputs", bench.outputs, "Write system outputs here");
  bs->callback([&] { bench.run(); });

  SampleCmd sample;
  auto* sh = app.add_subcommand("sample-humaneval", "Draw delta-GLEU stratified items for rating");
  sh->add_option("runs", sample.runs, "Run JSON files")->required();
  sh->add_option("-n,--per-stratum", sample.options.n_per_stratum)->capture_default_str();
  sh->add_option("--pos-threshold", sample.options.pos_threshold)->capture_default_str();
  sh->add_option("--min-tokens", sample.options.min_tokens)->capture_default_str();
  sh->add_option("--seed", sample.options.seed)->capture_default_str();
  sh->add_option("-o,--output", sample.output, "Items JSONL");
  sh->callback([&] { sample.run(); });

  ServeCmd serve;
  auto* sv = app.add_subcommand("serve-humaneval", "Serve the rating API");
  sv->add_option("--items", serve.items, "Items JSONL")->required();
  sv->add_option("--state-dir", serve.state_dir, "Event log and snapshot directory")->required();
  sv->add_option("--host", serve.host)->capture_default_str();
  sv->add_option("--port", serve.port)->capture_default_str();
  sv->add_option("--seed", serve.options.seed, "Queue order seed")->capture_default_str();
  sv->add_option("--snapshot-every", serve.options.snapshot_every)->capture_default_str();
  sv->callback([&] { serve.run(); });

  ReportCmd report;
  auto* rp = app.add_subcommand("report", "Aggregate human ratings");
  rp->add_option("--items", report.items, "Items JSONL")->required();
  rp->add_option("--state-dir", report.state_dir)->required();
  rp->add_option("--language", report.language);
  rp->add_flag("--json", report.json);
  rp->callback([&] { report.run(); });

  ScoreCmd score;
  auto* so = app.add_subcommand("score", "Score line-aligned hypothesis and reference files");
  so->add_option("--input", score.input, "JSONL {id, hyp, ref, src?, refs?}; writes JSONL");
  so->add_option("-o,--output", score.output, "JSONL output (with --input)");
  so->add_option("--hyp", score.hyp, "Hypotheses, one per line (- for stdin)");
  so->add_option("--ref", score.ref, "References, one per line");
  so->add_option("--src", score.src, "Sources, needed for sari");
  so->add_option("--metrics", score.metrics)
      ->check(CLI::IsMember({"bleu", "gleu", "ter", "sari"}))
      ->delimiter(',')
      ->capture_default_str();
  so->add_option("--sentences", score.sentences, "Per-line scores TSV");
  so->callback([&] { score.run(); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    print_nested(e);
    return 1;
  }
  return 0;
}
