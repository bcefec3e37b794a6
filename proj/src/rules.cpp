#include "bbapp/rules.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "bbapp/error.hpp"

namespace bbapp {

ParaphraseRule make_rule(std::string_view pattern, std::string_view replacement) {
  return ParaphraseRule{tokenize(pattern), tokenize(replacement), std::string(replacement)};
}

RuleSet::RuleSet(std::vector<ParaphraseRule> rules) : rules_(std::move(rules)) {
  std::set<Tokens> seen;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const auto& pattern = rules_[i].pattern;
    if (pattern.empty()) throw ContractViolation("paraphrase rule with empty pattern");
    if (!seen.insert(pattern).second) {
      throw ContractViolation("duplicate paraphrase pattern: " + join(pattern));
    }
    by_first_[pattern.front()].push_back(i);
  }
  for (auto& [first, indices] : by_first_) {
    std::stable_sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
      return rules_[a].pattern.size() > rules_[b].pattern.size();
    });
  }
}

std::optional<std::size_t> RuleSet::longest_match(std::span<const Token> tokens,
                                                  std::size_t pos) const {
  if (pos >= tokens.size()) return std::nullopt;
  auto it = by_first_.find(tokens[pos]);
  if (it == by_first_.end()) return std::nullopt;
  for (std::size_t idx : it->second) {
    const auto& pattern = rules_[idx].pattern;
    if (pos + pattern.size() > tokens.size()) continue;
    if (std::equal(pattern.begin(), pattern.end(),
                   tokens.begin() + static_cast<std::ptrdiff_t>(pos))) {
      return idx;
    }
  }
  return std::nullopt;
}

Tokens rule_simplify(const RuleSet& rules, std::span<const Token> tokens) {
  Tokens out;
  out.reserve(tokens.size());
  std::size_t pos = 0;
  while (pos < tokens.size()) {
    if (auto idx = rules.longest_match(tokens, pos)) {
      const auto& rule = rules.rules()[*idx];
      out.insert(out.end(), rule.replacement.begin(), rule.replacement.end());
      pos += rule.pattern.size();
    } else {
      out.push_back(tokens[pos++]);
    }
  }
  return out;
}

Tokens rule_simplify(const std::vector<ParaphraseRule>& rules,
                     std::span<const Token> tokens) {
  return rule_simplify(RuleSet(rules), tokens);
}

std::string apply_rules(const RuleSet& rules, std::string_view text) {
  if (rules.empty()) return std::string(text);
  const SpannedTokens spanned = tokenize_spans(text);
  Tokens lowered;
  lowered.reserve(spanned.tokens.size());
  for (const auto& t : spanned.tokens) lowered.push_back(to_lower(t));

  std::string out;
  std::size_t copied_to = 0;
  std::size_t pos = 0;
  while (pos < lowered.size()) {
    auto idx = rules.longest_match(lowered, pos);
    if (!idx) {
      ++pos;
      continue;
    }
    const auto& rule = rules.rules()[*idx];
    const std::size_t begin = spanned.spans[pos].begin;
    const std::size_t end = spanned.spans[pos + rule.pattern.size() - 1].end;
    out.append(text.substr(copied_to, begin - copied_to));
    out.append(rule.replacement_text);
    copied_to = end;
    pos += rule.pattern.size();
  }
  out.append(text.substr(copied_to));
  return out;
}

RuleSet parse_rules(std::istream& in) {
  std::vector<ParaphraseRule> rules;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!is_valid_utf8(line)) throw ParseError("rule file is not valid UTF-8", line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError("expected pattern<TAB>replacement", line_no);
    }
    auto rule = make_rule(std::string_view(line).substr(0, tab),
                          std::string_view(line).substr(tab + 1));
    if (rule.pattern.empty()) throw ParseError("empty pattern", line_no);
    rules.push_back(std::move(rule));
  }
  try {
    return RuleSet(std::move(rules));
  } catch (const ContractViolation& e) {
    throw ParseError(e.what(), 0);
  }
}

RuleSet load_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open rule file " + path.string(), 0);
  return parse_rules(in);
}

}  // namespace bbapp
