#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bbapp/text.hpp"

namespace bbapp {

/// Token-sequence rewrite. `replacement_text` is the surface form inserted
/// when rewriting raw text.
struct ParaphraseRule {
  Tokens pattern;
  Tokens replacement;
  std::string replacement_text;
};

/// Builds a rule from surface strings, tokenizing both sides with the
/// default (uncased, punctuation-split) tokenizer.
ParaphraseRule make_rule(std::string_view pattern, std::string_view replacement);

/// Validated rule collection indexed for longest-match lookup. Patterns are
/// non-empty and unique.
class RuleSet {
 public:
  RuleSet() = default;
  explicit RuleSet(std::vector<ParaphraseRule> rules);

  const std::vector<ParaphraseRule>& rules() const { return rules_; }
  bool empty() const { return rules_.empty(); }
  std::size_t size() const { return rules_.size(); }

  /// Index of the longest rule whose pattern matches `tokens` at `pos`.
  std::optional<std::size_t> longest_match(std::span<const Token> tokens,
                                           std::size_t pos) const;

 private:
  std::vector<ParaphraseRule> rules_;
  // first pattern token -> rule indices, longest pattern first
  std::unordered_map<Token, std::vector<std::size_t>> by_first_;
};

/// One left-to-right pass: at each position the longest matching pattern is
/// replaced and scanning resumes after the match. Emitted replacements are
/// never rescanned, so the pass always terminates.
Tokens rule_simplify(const RuleSet& rules, std::span<const Token> tokens);
Tokens rule_simplify(const std::vector<ParaphraseRule>& rules,
                     std::span<const Token> tokens);

/// Same pass over raw text. Matching is case-insensitive on split tokens;
/// text outside matches (spacing, punctuation, case) is kept verbatim.
std::string apply_rules(const RuleSet& rules, std::string_view text);

/// Rule file: UTF-8 TSV, `pattern<TAB>replacement`, '#' starts a comment
/// line, blank lines ignored.
RuleSet parse_rules(std::istream& in);
RuleSet load_rules(const std::filesystem::path& path);

}  // namespace bbapp
