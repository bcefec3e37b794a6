#include <unordered_map>

#include "bbapp/backends.hpp"
#include "bbapp/error.hpp"
#include "bbapp/hash.hpp"

namespace bbapp {

CachedTranslator::CachedTranslator(std::shared_ptr<Translator> inner,
                                   std::shared_ptr<TranslationCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {
  if (!inner_ || !cache_) throw ContractViolation("CachedTranslator needs a backend and a cache");
}

std::vector<std::string> CachedTranslator::translate_batch(std::span<const std::string> texts,
                                                           const LangPair& pair) {
  if (texts.empty()) throw ContractViolation("translate_batch: empty input list");
  const std::string engine = inner_->engine_id();
  std::vector<std::string> keys;
  keys.reserve(texts.size());
  std::vector<std::optional<std::string>> out(texts.size());
  std::vector<std::string> misses;
  std::vector<std::string> miss_keys;
  std::unordered_map<std::string, std::size_t> miss_index;

  for (std::size_t i = 0; i < texts.size(); ++i) {
    keys.push_back(TranslationCache::key(engine, pair, texts[i]));
    out[i] = cache_->get(keys.back());
    if (!out[i] && miss_index.emplace(keys.back(), misses.size()).second) {
      misses.push_back(texts[i]);
      miss_keys.push_back(keys.back());
    }
  }

  if (!misses.empty()) {
    auto fresh = inner_->translate_batch(misses, pair);
    if (fresh.size() != misses.size()) {
      throw ProtocolError("backend returned " + std::to_string(fresh.size()) +
                          " translations for " + std::to_string(misses.size()) + " inputs");
    }
    std::vector<std::pair<std::string, std::string>> entries;
    entries.reserve(fresh.size());
    for (std::size_t j = 0; j < fresh.size(); ++j) entries.emplace_back(miss_keys[j], fresh[j]);
    cache_->put_batch(entries);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (!out[i]) out[i] = fresh[miss_index.at(keys[i])];
    }
  }

  std::vector<std::string> result;
  result.reserve(out.size());
  for (auto& o : out) result.push_back(std::move(*o));
  return result;
}

std::vector<std::string> IdentitySimplifier::simplify_batch(std::span<const std::string> texts) {
  return {texts.begin(), texts.end()};
}

std::string rules_digest(const RuleSet& rules) {
  std::string blob;
  for (const auto& r : rules.rules()) {
    blob += join(r.pattern) + "\t" + r.replacement_text + "\n";
  }
  return sha256_hex(blob).substr(0, 12);
}

RuleSimplifier::RuleSimplifier(RuleSet rules)
    : rules_(std::move(rules)), id_("rules-" + rules_digest(rules_)) {}

std::vector<std::string> RuleSimplifier::simplify_batch(std::span<const std::string> texts) {
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(apply_rules(rules_, t));
  return out;
}

}  // namespace bbapp
