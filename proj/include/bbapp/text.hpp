#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bbapp {

/// A single non-empty, whitespace-free unit of text as produced by
/// `tokenize`.
using Token = std::string;
using Tokens = std::vector<Token>;

enum class Casing { kCased, kUncased };
enum class Punctuation { kSplit, kKeep };

struct TokenizerConfig {
  Casing casing = Casing::kUncased;
  Punctuation punctuation = Punctuation::kSplit;
};

/// Byte range of a token inside the text it was cut from.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Splits on Unicode whitespace and, in split mode, isolates every Unicode
/// punctuation code point as its own token. Uncased mode applies full
/// Unicode lowercasing to the whole text first. Invalid UTF-8 sequences are
/// replaced by U+FFFD.
Tokens tokenize(std::string_view text, TokenizerConfig cfg = {});

/// Cased tokenization that also reports where each token sits in `text`.
/// Used for in-place rewriting; `tokens[i] == text.substr(spans[i])`.
struct SpannedTokens {
  Tokens tokens;
  std::vector<TokenSpan> spans;
};
SpannedTokens tokenize_spans(std::string_view text,
                             Punctuation punctuation = Punctuation::kSplit);

/// Number of tokens under `cfg`. This is the length used by every filter.
std::size_t token_count(std::string_view text, TokenizerConfig cfg = {});

/// Full Unicode lowercasing of a UTF-8 string.
std::string to_lower(std::string_view text);

/// Joins tokens with single spaces.
std::string join(std::span<const Token> tokens, std::string_view sep = " ");

/// True if `text` is well-formed UTF-8.
bool is_valid_utf8(std::string_view text);

/// Reverses a UTF-8 string code point by code point.
std::string reverse_utf8(std::string_view text);

struct NGramHash {
  std::size_t operator()(const Tokens& gram) const noexcept;
};

/// Multiset of the n-grams of one fixed order.
class NGramMultiset {
 public:
  using Map = std::unordered_map<Tokens, int, NGramHash>;

  explicit NGramMultiset(int order) : order_(order) {}

  int order() const { return order_; }
  const Map& entries() const { return entries_; }
  int count(const Tokens& gram) const;
  /// Sum of all counts.
  long total() const { return total_; }
  bool empty() const { return entries_.empty(); }

  void add(Tokens gram, int count = 1);

 private:
  int order_;
  Map entries_;
  long total_ = 0;
};

/// Sliding-window n-grams of order `n` (n >= 1).
NGramMultiset ngrams(std::span<const Token> tokens, int n);

/// Sum over n-grams of min(hyp count, ref count). Orders must match.
long clipped_matches(const NGramMultiset& hyp, const NGramMultiset& ref);

}  // namespace bbapp
