#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "bbapp/pipeline.hpp"
#include "json.hpp"

namespace bbapp {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace

std::string render_tables_tsv(const EvalTables& tables) {
  std::ostringstream out;
  out << "pair\tsentences\tbleu_original\tbleu_simplified\tter_original\tter_simplified"
         "\tter_pct_delta\tmean_gleu_original\tmean_gleu_simplified\n";
  for (const auto& r : tables.rows) {
    out << r.pair << '\t' << r.sentences << '\t' << fixed(r.bleu_original, 2) << '\t'
        << fixed(r.bleu_simplified, 2) << '\t' << fixed(r.ter_original, 4) << '\t'
        << fixed(r.ter_simplified, 4) << '\t'
        << (r.ter_pct_delta ? fixed(*r.ter_pct_delta, 1) : std::string("n/a")) << '\t'
        << fixed(r.mean_gleu_original, 4) << '\t' << fixed(r.mean_gleu_simplified, 4) << '\n';
  }
  return out.str();
}

std::string tables_json(const EvalTables& tables) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : tables.rows) {
    ordered_json row;
    row["pair"] = r.pair;
    row["sentences"] = r.sentences;
    row["bleu_original"] = r.bleu_original;
    row["bleu_simplified"] = r.bleu_simplified;
    row["ter_original"] = r.ter_original;
    row["ter_simplified"] = r.ter_simplified;
    row["ter_pct_delta"] = r.ter_pct_delta ? ordered_json(*r.ter_pct_delta) : ordered_json();
    row["mean_gleu_original"] = r.mean_gleu_original;
    row["mean_gleu_simplified"] = r.mean_gleu_simplified;
    rows.push_back(std::move(row));
  }
  return ordered_json{{"rows", rows}}.dump(2);
}

void write_run_json(const EvalRun& run, std::ostream& out) {
  ordered_json doc;
  doc["run_id"] = run.run_id;
  doc["source_lang"] = run.pair.source();
  doc["target_lang"] = run.pair.target();
  doc["simplifier_id"] = run.simplifier_id;
  doc["backend_id"] = run.backend_id;
  doc["started_at"] = run.started_at;
  doc["finished_at"] = run.finished_at;
  ordered_json records = ordered_json::array();
  for (const auto& r : run.records) {
    ordered_json rec;
    rec["id"] = r.id;
    rec["x"] = r.x;
    rec["x_star"] = r.x_star;
    rec["y"] = r.y;
    rec["y_hat"] = r.y_hat;
    rec["y_hat_star"] = r.y_hat_star;
    rec["gleu_orig"] = r.gleu_orig;
    rec["gleu_simple"] = r.gleu_simple;
    rec["delta_gleu"] = r.delta_gleu;
    records.push_back(std::move(rec));
  }
  doc["records"] = std::move(records);
  out << doc.dump(2) << '\n';
}

EvalRun read_run_json(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
    EvalRun run{LangPair(doc.at("source_lang").get<std::string>(),
                         doc.at("target_lang").get<std::string>()),
                {},
                doc.value("simplifier_id", ""),
                doc.value("backend_id", ""),
                doc.value("run_id", ""),
                doc.value("started_at", ""),
                doc.value("finished_at", "")};
    for (const auto& rec : doc.at("records")) {
      EvalRecord r;
      r.id = rec.at("id").get<std::string>();
      r.x = rec.at("x").get<std::string>();
      r.x_star = rec.at("x_star").get<std::string>();
      r.y = rec.at("y").get<std::string>();
      r.y_hat = rec.at("y_hat").get<std::string>();
      r.y_hat_star = rec.at("y_hat_star").get<std::string>();
      r.gleu_orig = rec.at("gleu_orig").get<double>();
      r.gleu_simple = rec.at("gleu_simple").get<double>();
      r.delta_gleu = rec.at("delta_gleu").get<double>();
      run.records.push_back(std::move(r));
    }
    return run;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed run file: ") + e.what(), 0);
  }
}

std::string scope_csv(const ScopeAnalysis& scope) {
  std::ostringstream out;
  out << "bin_start,bin_end,count_direct,count_backtrans\n";
  for (std::size_t i = 0; i < scope.direct.bins(); ++i) {
    out << fixed(scope.direct.bin_edges[i], 6) << ',' << fixed(scope.direct.bin_edges[i + 1], 6)
        << ',' << scope.direct.counts[i] << ',' << scope.backtrans.counts[i] << '\n';
  }
  return out.str();
}

SimplificationTestSet read_testset_jsonl(std::istream& in) {
  SimplificationTestSet set;
  std::vector<std::string> outputs;
  std::size_t with_output = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto obj = json::parse(line);
      set.sources.push_back(obj.at("src").get<std::string>());
      std::vector<std::string> refs;
      for (const auto& r : obj.at("refs")) refs.push_back(r.get<std::string>());
      set.references.push_back(std::move(refs));
      if (obj.contains("output")) {
        outputs.push_back(obj["output"].get<std::string>());
        ++with_output;
      } else {
        outputs.emplace_back();
      }
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed test set line: ") + e.what(), line_no);
    }
  }
  if (with_output != 0 && with_output != set.sources.size()) {
    throw ParseError("either every line or no line may carry \"output\"", 0);
  }
  if (with_output != 0) set.outputs = std::move(outputs);
  return set;
}

}  // namespace bbapp
