#include "bbapp/corpus.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "bbapp/random.hpp"
#include "json.hpp"

namespace bbapp {

using nlohmann::ordered_json;

void LengthFilter::validate() const {
  if (min_len < 1 || min_len > max_len) {
    throw ContractViolation("length filter needs 1 <= min_len <= max_len, got [" +
                            std::to_string(min_len) + ", " + std::to_string(max_len) + "]");
  }
}

bool LengthFilter::accepts(std::string_view a, std::string_view b) const {
  const auto la = token_count(a);
  const auto lb = token_count(b);
  return la >= min_len && la <= max_len && lb >= min_len && lb <= max_len;
}

Bitext filter_pairs(const Bitext& bitext, std::size_t min_len, std::size_t max_len) {
  const LengthFilter filter{min_len, max_len};
  filter.validate();
  Bitext out{bitext.pair, {}, bitext.provenance};
  for (const auto& p : bitext.pairs) {
    if (filter.accepts(p.src, p.tgt)) out.pairs.push_back(p);
  }
  return out;
}

AppCorpus build_app_corpus(std::span<const Bitext> bitexts, Translator& backend,
                           const BuildOptions& options) {
  options.filter.validate();
  if (options.chunk_size < 1) throw ContractViolation("chunk_size must be >= 1");
  if (options.concurrency < 1) throw ContractViolation("concurrency must be >= 1");

  AppCorpus corpus;
  if (bitexts.empty()) return corpus;
  corpus.source_lang = bitexts.front().pair.source();
  for (const auto& b : bitexts) {
    if (b.pair.source() != corpus.source_lang) {
      throw ContractViolation("all bitexts must share source language " + corpus.source_lang +
                              ", got " + b.pair.str());
    }
    if (!backend.supports(b.pair.reversed())) {
      throw ContractViolation("backend " + backend.engine_id() + " cannot translate " +
                              b.pair.reversed().str());
    }
  }

  struct Chunk {
    std::size_t bitext;
    std::size_t first;
    std::size_t count;
  };
  std::vector<Chunk> chunks;
  std::vector<std::vector<std::string>> backtranslations(bitexts.size());
  for (std::size_t b = 0; b < bitexts.size(); ++b) {
    backtranslations[b].resize(bitexts[b].size());
    for (std::size_t first = 0; first < bitexts[b].size(); first += options.chunk_size) {
      chunks.push_back({b, first, std::min(options.chunk_size, bitexts[b].size() - first)});
    }
  }

  std::vector<std::exception_ptr> errors(chunks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t c = next++; c < chunks.size() && !failed; c = next++) {
      const auto& ch = chunks[c];
      const Bitext& bitext = bitexts[ch.bitext];
      try {
        std::vector<std::string> targets;
        targets.reserve(ch.count);
        for (std::size_t i = 0; i < ch.count; ++i) targets.push_back(bitext.pairs[ch.first + i].tgt);
        auto result = backend.translate_batch(targets, bitext.pair.reversed());
        if (result.size() != targets.size()) {
          throw ProtocolError("backend returned " + std::to_string(result.size()) +
                              " translations for " + std::to_string(targets.size()) + " inputs");
        }
        std::move(result.begin(), result.end(),
                  backtranslations[ch.bitext].begin() + static_cast<std::ptrdiff_t>(ch.first));
      } catch (...) {
        try {
          std::throw_with_nested(CorpusBuildError(
              "back-translation failed for bitext " + std::to_string(ch.bitext) + " (" +
                  bitext.pair.str() + ", " + bitext.provenance + ") pairs [" +
                  std::to_string(ch.first) + ", " + std::to_string(ch.first + ch.count) + ")",
              ch.bitext, ch.first, ch.first + ch.count));
        } catch (...) {
          errors[c] = std::current_exception();
        }
        failed = true;
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(options.concurrency),
                                             std::max<std::size_t>(chunks.size(), 1));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::set<std::pair<std::string_view, std::string_view>> seen;
  for (std::size_t b = 0; b < bitexts.size(); ++b) {
    const Bitext& bitext = bitexts[b];
    for (std::size_t i = 0; i < bitext.size(); ++i) {
      const std::string& src = bitext.pairs[i].src;
      const std::string& bt = backtranslations[b][i];
      if (!options.filter.accepts(src, bt)) continue;
      if (options.dedupe && !seen.emplace(src, bt).second) continue;
      corpus.records.push_back(
          AppRecord{bitext.pair.str() + ":" + bitext.pairs[i].id, src, bt, bitext.pair});
    }
  }
  return corpus;
}

void write_app_corpus(const AppCorpus& corpus, std::ostream& out) {
  for (const auto& r : corpus.records) {
    ordered_json line;
    line["id"] = r.id;
    line["original_src"] = r.original_src;
    line["backtranslation"] = r.backtranslation;
    line["origin_src_lang"] = r.origin_pair.source();
    line["origin_tgt_lang"] = r.origin_pair.target();
    out << line.dump() << '\n';
  }
}

std::string app_corpus_jsonl(const AppCorpus& corpus) {
  std::ostringstream out;
  write_app_corpus(corpus, out);
  return out.str();
}

AppCorpus read_app_corpus(std::istream& in) {
  AppCorpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto obj = ordered_json::parse(line);
      AppRecord r{obj.at("id").get<std::string>(), obj.at("original_src").get<std::string>(),
                  obj.at("backtranslation").get<std::string>(),
                  LangPair(obj.at("origin_src_lang").get<std::string>(),
                           obj.at("origin_tgt_lang").get<std::string>())};
      if (corpus.records.empty()) {
        corpus.source_lang = r.origin_pair.source();
      } else if (r.origin_pair.source() != corpus.source_lang) {
        throw ParseError("record source language differs from " + corpus.source_lang, line_no);
      }
      corpus.records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed corpus record: ") + e.what(), line_no);
    } catch (const ContractViolation& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return corpus;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios) {
  const std::array<double, 3> r{ratios.train, ratios.val, ratios.test};
  double sum = 0.0;
  for (double x : r) {
    if (!(x >= 0.0)) throw ContractViolation("split ratios must be non-negative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ContractViolation("split ratios must sum to 1, got " + std::to_string(sum));
  }
  const bool all_nonzero = r[0] > 0.0 && r[1] > 0.0 && r[2] > 0.0;
  if (all_nonzero && n < 3) {
    throw SizingError("cannot split " + std::to_string(n) + " records into three non-empty parts");
  }

  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double exact = r[k] * static_cast<double>(n);
    sizes[k] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainder[k] = exact - static_cast<double>(sizes[k]);
    assigned += sizes[k];
  }
  while (assigned < n) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < 3; ++k) {
      if (remainder[k] > remainder[best]) best = k;
    }
    ++sizes[best];
    remainder[best] = -1.0;
    ++assigned;
  }
  return sizes;
}

CorpusSplit split_corpus(const AppCorpus& corpus, const SplitRatios& ratios, std::uint64_t seed) {
  const auto sizes = split_sizes(corpus.size(), ratios);
  const auto order = seeded_permutation(corpus.size(), seed);
  CorpusSplit out;
  std::array<AppCorpus*, 3> parts{&out.train, &out.val, &out.test};
  std::size_t pos = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    parts[k]->source_lang = corpus.source_lang;
    for (std::size_t i = 0; i < sizes[k]; ++i) {
      parts[k]->records.push_back(corpus.records[order[pos++]]);
    }
  }
  return out;
}

Bitext sample_pairs(const Bitext& bitext, std::size_t n, std::uint64_t seed) {
  Bitext out{bitext.pair, {}, bitext.provenance};
  for (std::size_t i : sample_indices(bitext.size(), n, seed)) out.pairs.push_back(bitext.pairs[i]);
  return out;
}

}  // namespace bbapp
