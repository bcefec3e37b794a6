#include "bbapp/humaneval.hpp"

#include <cstdio>
#include <sstream>

#include "bbapp/hash.hpp"
#include "bbapp/random.hpp"
#include "json.hpp"

namespace bbapp::humaneval {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::uint64_t stable_hash64(std::string_view text) {
  return std::stoull(sha256_hex(text).substr(0, 16), nullptr, 16);
}

std::string trimmed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  return s;
}

}  // namespace

std::string to_string(System system) {
  switch (system) {
    case System::kOriginalMt: return "original_mt";
    case System::kSimplifiedMt: return "simplified_mt";
    case System::kReference: return "reference";
  }
  return "unknown";
}

std::string to_string(Stratum stratum) {
  return stratum == Stratum::kPositive ? "positive" : "negative";
}

System parse_system(const std::string& name) {
  if (name == "original_mt") return System::kOriginalMt;
  if (name == "simplified_mt") return System::kSimplifiedMt;
  if (name == "reference") return System::kReference;
  throw ParseError("unknown system '" + name + "'", 0);
}

Stratum parse_stratum(const std::string& name) {
  if (name == "positive") return Stratum::kPositive;
  if (name == "negative") return Stratum::kNegative;
  throw ParseError("unknown stratum '" + name + "'", 0);
}

EvalItem make_item(const EvalRecord& record, const LangPair& pair, Stratum stratum,
                   std::uint64_t seed) {
  EvalItem item;
  item.item_id = record.id;
  item.source_lang = pair.source();
  item.language = pair.target();
  item.x = record.x;
  item.y = record.y;
  item.stratum = stratum;
  item.delta_gleu = record.delta_gleu;
  const std::array<std::string, 3> by_system = {record.y_hat, record.y_hat_star, record.y};
  const auto perm = seeded_permutation(3, seed ^ stable_hash64(record.id));
  for (std::size_t slot = 0; slot < 3; ++slot) {
    item.mapping[slot] = static_cast<System>(perm[slot]);
    item.slots[slot] = by_system[perm[slot]];
  }
  return item;
}

BlindedItem blind(const EvalItem& item) {
  return BlindedItem{item.item_id, item.language, item.x, item.slots};
}

std::array<std::string, 3> unblind(const BlindedItem& blinded,
                                   const std::array<System, 3>& mapping) {
  std::array<std::string, 3> out;
  for (std::size_t slot = 0; slot < 3; ++slot) {
    out[static_cast<std::size_t>(mapping[slot])] = blinded.candidates[slot];
  }
  return out;
}

std::size_t slot_of(const EvalItem& item, System system) {
  for (std::size_t slot = 0; slot < 3; ++slot) {
    if (item.mapping[slot] == system) return slot;
  }
  throw ContractViolation("item " + item.item_id + " has no slot for " + to_string(system));
}

SampleResult stratified_sample(const EvalRun& run, const SampleOptions& options) {
  std::vector<std::size_t> positive;
  std::vector<std::size_t> negative;
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    const auto& r = run.records[i];
    if (token_count(r.x) <= options.min_tokens) continue;
    if (r.delta_gleu > options.pos_threshold) {
      positive.push_back(i);
    } else if (r.delta_gleu < 0.0) {
      negative.push_back(i);
    }
  }

  SampleResult result;
  auto draw = [&](const std::vector<std::size_t>& stratum, Stratum which, std::uint64_t salt) {
    if (stratum.size() < options.n_per_stratum) {
      result.warnings.push_back(to_string(which) + " stratum has " +
                                std::to_string(stratum.size()) + " eligible records, " +
                                std::to_string(options.n_per_stratum) + " requested");
    }
    for (std::size_t k : sample_indices(stratum.size(), options.n_per_stratum,
                                        options.seed ^ salt)) {
      result.items.push_back(make_item(run.records[stratum[k]], run.pair, which, options.seed));
    }
  };
  draw(positive, Stratum::kPositive, 0x9e3779b97f4a7c15ULL);
  draw(negative, Stratum::kNegative, 0xc2b2ae3d27d4eb4fULL);
  return result;
}

void write_items_jsonl(std::span<const EvalItem> items, std::ostream& out) {
  for (const auto& item : items) {
    ordered_json j;
    j["item_id"] = item.item_id;
    j["source_lang"] = item.source_lang;
    j["language"] = item.language;
    j["x"] = item.x;
    j["y"] = item.y;
    ordered_json slots;
    ordered_json mapping;
    for (std::size_t s = 0; s < 3; ++s) {
      const std::string key(1, kSlots[s]);
      slots[key] = item.slots[s];
      mapping[key] = to_string(item.mapping[s]);
    }
    j["slots"] = std::move(slots);
    j["mapping"] = std::move(mapping);
    j["stratum"] = to_string(item.stratum);
    j["delta_gleu"] = item.delta_gleu;
    out << j.dump() << '\n';
  }
}

std::vector<EvalItem> read_items_jsonl(std::istream& in) {
  std::vector<EvalItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      EvalItem item;
      item.item_id = j.at("item_id").get<std::string>();
      item.source_lang = j.at("source_lang").get<std::string>();
      item.language = j.at("language").get<std::string>();
      item.x = j.at("x").get<std::string>();
      item.y = j.at("y").get<std::string>();
      std::set<System> seen;
      for (std::size_t s = 0; s < 3; ++s) {
        const std::string key(1, kSlots[s]);
        item.slots[s] = j.at("slots").at(key).get<std::string>();
        item.mapping[s] = parse_system(j.at("mapping").at(key).get<std::string>());
        seen.insert(item.mapping[s]);
      }
      if (seen.size() != 3) throw ParseError("mapping must use each system once", line_no);
      item.stratum = parse_stratum(j.at("stratum").get<std::string>());
      item.delta_gleu = j.at("delta_gleu").get<double>();
      items.push_back(std::move(item));
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed item: ") + e.what(), line_no);
    }
  }
  return items;
}

std::optional<std::string> SessionState::next() const {
  for (const auto& id : queue) {
    if (!completed.contains(id)) return id;
  }
  return std::nullopt;
}

AggregateReport aggregate(std::span<const Rating> ratings, std::span<const EvalItem> items,
                          const std::optional<std::string>& language) {
  std::map<std::string, const EvalItem*> by_id;
  for (const auto& item : items) by_id[item.item_id] = &item;

  // item -> evaluator -> latest scores
  std::map<std::string, std::map<std::string, SlotScores>> latest;
  for (const auto& r : ratings) {
    if (!by_id.contains(r.item_id)) {
      throw ContractViolation("rating references unknown item '" + r.item_id + "'");
    }
    latest[r.item_id][r.evaluator_id] = r.scores;
  }

  struct Acc {
    std::size_t items = 0;
    double sum_original = 0.0;
    double sum_simple = 0.0;
    double sum_human = 0.0;
    std::size_t positive = 0;
    std::size_t negative = 0;
    std::size_t same = 0;
  };
  std::map<std::string, Acc> per_language;
  for (const auto& [item_id, by_evaluator] : latest) {
    const EvalItem& item = *by_id.at(item_id);
    if (language && item.language != *language) continue;
    const std::size_t so = slot_of(item, System::kOriginalMt);
    const std::size_t ss = slot_of(item, System::kSimplifiedMt);
    const std::size_t sr = slot_of(item, System::kReference);
    double orig = 0.0;
    double simple = 0.0;
    double human = 0.0;
    for (const auto& [evaluator, scores] : by_evaluator) {
      orig += scores[so];
      simple += scores[ss];
      human += scores[sr];
    }
    const auto n = static_cast<double>(by_evaluator.size());
    orig /= n;
    simple /= n;
    human /= n;

    Acc& acc = per_language[item.language];
    ++acc.items;
    acc.sum_original += orig;
    acc.sum_simple += simple;
    acc.sum_human += human;
    if (simple > orig) {
      ++acc.positive;
    } else if (simple < orig) {
      ++acc.negative;
    } else {
      ++acc.same;
    }
  }

  AggregateReport report;
  for (const auto& [lang, acc] : per_language) {
    const auto n = static_cast<double>(acc.items);
    report.languages.push_back(LanguageReport{
        lang, acc.items, acc.sum_original / n, acc.sum_simple / n, acc.sum_human / n,
        100.0 * static_cast<double>(acc.positive) / n,
        100.0 * static_cast<double>(acc.negative) / n, 100.0 * static_cast<double>(acc.same) / n});
  }
  return report;
}

std::string format_report_row(const LanguageReport& row) {
  std::string label = row.language;
  if (!label.empty() && label[0] >= 'a' && label[0] <= 'z') label[0] = static_cast<char>(label[0] - 'a' + 'A');
  return label + '\t' + trimmed(row.mean_original, 3) + '\t' + trimmed(row.mean_simple, 3) + '\t' +
         trimmed(row.mean_human, 3) + '\t' + trimmed(row.pct_positive, 1) + "%\t" +
         trimmed(row.pct_negative, 1) + "%\t" + trimmed(row.pct_same, 1) + "%";
}

std::string format_report(const AggregateReport& report) {
  std::string out = "lang\toriginal_mean\tsimple_mean\thuman_mean\tpct_positive\tpct_negative\tpct_same\n";
  for (const auto& row : report.languages) out += format_report_row(row) + "\n";
  return out;
}

std::string report_json(const AggregateReport& report) {
  ordered_json langs = ordered_json::array();
  for (const auto& r : report.languages) {
    ordered_json j;
    j["language"] = r.language;
    j["items"] = r.items;
    j["mean_original"] = r.mean_original;
    j["mean_simple"] = r.mean_simple;
    j["mean_human"] = r.mean_human;
    j["pct_positive"] = r.pct_positive;
    j["pct_negative"] = r.pct_negative;
    j["pct_same"] = r.pct_same;
    langs.push_back(std::move(j));
  }
  return ordered_json{{"languages", langs}}.dump();
}

const std::map<int, std::string>& score_anchors() {
  static const std::map<int, std::string> anchors = {
      {0, "nonsense: the translation conveys nothing of the source"},
      {2, "partial: some meaning survives but important parts are lost"},
      {4, "mostly right: nearly all meaning kept, grammar may be off"},
      {6, "perfect: meaning fully preserved and grammatical"},
  };
  return anchors;
}

}  // namespace bbapp::humaneval
