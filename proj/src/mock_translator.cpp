#include <fstream>

#include "bbapp/backends.hpp"
#include "bbapp/error.hpp"
#include "bbapp/hash.hpp"

namespace bbapp {

namespace {

constexpr std::string_view kMarker = "·";

std::string lexicon_digest(const MockLexicon& lexicon) {
  std::string blob = lexicon.base_language + "\n";
  for (const auto& [target, table] : lexicon.overrides) {
    for (const auto& [from, to] : table) blob += target + "\t" + from + "\t" + to + "\n";
  }
  blob += rules_digest(lexicon.reverse_rules);
  return sha256_hex(blob).substr(0, 12);
}

// Decodes a default-mapped token back to its source, if it is one.
std::optional<std::string> decode_default(const std::string& token, const std::string& target) {
  const std::string suffix = std::string(kMarker) + target;
  if (token.size() <= suffix.size() ||
      token.compare(token.size() - suffix.size(), suffix.size(), suffix) != 0) {
    return std::nullopt;
  }
  return reverse_utf8(std::string_view(token).substr(0, token.size() - suffix.size()));
}

}  // namespace

std::string mock_default_token(const std::string& token, const std::string& target) {
  return reverse_utf8(token) + std::string(kMarker) + target;
}

MockTranslator::MockTranslator(MockLexicon lexicon) : lexicon_(std::move(lexicon)) {
  validate_lang_code(lexicon_.base_language);
  for (const auto& [target, table] : lexicon_.overrides) {
    validate_lang_code(target);
    auto& inverse = inverse_[target];
    for (const auto& [from, to] : table) {
      if (from.empty() || to.empty()) {
        throw ContractViolation("mock lexicon: empty token in " + target + " table");
      }
      if (!inverse.emplace(to, from).second) {
        throw ContractViolation("mock lexicon: '" + to + "' is the image of two tokens (" +
                                target + ")");
      }
      // An override image must not collide with the default image of a
      // token that still uses the default map.
      if (auto shadowed = decode_default(to, target);
          shadowed && *shadowed != from && !table.contains(*shadowed)) {
        throw ContractViolation("mock lexicon: '" + to + "' collides with the default image of '" +
                                *shadowed + "'");
      }
    }
  }
  engine_id_ = "mock-" + lexicon_digest(lexicon_);
}

bool MockTranslator::supports(const LangPair& pair) const {
  return pair.source() == lexicon_.base_language || pair.target() == lexicon_.base_language;
}

std::string MockTranslator::map_token(const std::string& token, const std::string& target) const {
  if (auto t = lexicon_.overrides.find(target); t != lexicon_.overrides.end()) {
    if (auto it = t->second.find(token); it != t->second.end()) return it->second;
  }
  return mock_default_token(token, target);
}

std::string MockTranslator::unmap_token(const std::string& token,
                                        const std::string& target) const {
  if (auto t = inverse_.find(target); t != inverse_.end()) {
    if (auto it = t->second.find(token); it != t->second.end()) return it->second;
  }
  if (auto decoded = decode_default(token, target)) return *decoded;
  return token;
}

std::string MockTranslator::translate_one(const std::string& text, const LangPair& pair) const {
  const Tokens words = tokenize_spans(text, Punctuation::kKeep).tokens;
  Tokens out;
  out.reserve(words.size());
  if (pair.source() == lexicon_.base_language) {
    for (const auto& w : words) out.push_back(map_token(w, pair.target()));
    return join(out);
  }
  for (const auto& w : words) out.push_back(unmap_token(w, pair.source()));
  return apply_rules(lexicon_.reverse_rules, join(out));
}

std::vector<std::string> MockTranslator::translate_batch(std::span<const std::string> texts,
                                                         const LangPair& pair) {
  if (texts.empty()) throw ContractViolation("translate_batch: empty input list");
  if (!supports(pair)) {
    throw ContractViolation("mock translator does not support " + pair.str());
  }
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(translate_one(t, pair));
  return out;
}

std::map<std::string, std::map<std::string, std::string>> load_mock_overrides(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open lexicon file " + path.string(), 0);
  std::map<std::string, std::map<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto a = line.find('\t');
    const auto b = a == std::string::npos ? a : line.find('\t', a + 1);
    if (b == std::string::npos || line.find('\t', b + 1) != std::string::npos) {
      throw ParseError("expected target<TAB>token<TAB>mapped", line_no);
    }
    out[line.substr(0, a)][line.substr(a + 1, b - a - 1)] = line.substr(b + 1);
  }
  return out;
}

}  // namespace bbapp
