#include "bbapp/text.hpp"

#include <unicode/locid.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cstdint>

#include "bbapp/error.hpp"

namespace bbapp {

namespace {

constexpr UChar32 kReplacement = 0xFFFD;

// Decodes one code point at `pos`, advancing it. Invalid sequences decode to
// U+FFFD and consume at least one byte.
UChar32 next_code_point(std::string_view text, std::size_t& pos) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  auto i = static_cast<int32_t>(pos);
  UChar32 c = 0;
  U8_NEXT(bytes, i, length, c);
  pos = static_cast<std::size_t>(i);
  return c < 0 ? kReplacement : c;
}

std::string sanitize_utf8(std::string_view text) {
  if (is_valid_utf8(text)) return std::string(text);
  std::string out;
  icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(),
                                                static_cast<int32_t>(text.size())))
      .toUTF8String(out);
  return out;
}

}  // namespace

bool is_valid_utf8(std::string_view text) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) return false;
  }
  return true;
}

std::string to_lower(std::string_view text) {
  std::string out;
  icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(),
                                                static_cast<int32_t>(text.size())))
      .toLower(icu::Locale::getRoot())
      .toUTF8String(out);
  return out;
}

std::string reverse_utf8(std::string_view text) {
  std::vector<std::string_view> units;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    next_code_point(text, pos);
    units.push_back(text.substr(start, pos - start));
  }
  std::string out;
  out.reserve(text.size());
  for (auto it = units.rbegin(); it != units.rend(); ++it) out.append(*it);
  return out;
}

SpannedTokens tokenize_spans(std::string_view text, Punctuation punctuation) {
  SpannedTokens out;
  std::size_t token_start = 0;
  bool in_token = false;
  auto close = [&](std::size_t end) {
    if (in_token && end > token_start) {
      out.tokens.emplace_back(text.substr(token_start, end - token_start));
      out.spans.push_back({token_start, end});
    }
    in_token = false;
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    const UChar32 c = next_code_point(text, pos);
    if (u_isUWhiteSpace(c)) {
      close(start);
    } else if (punctuation == Punctuation::kSplit && u_ispunct(c)) {
      close(start);
      out.tokens.emplace_back(text.substr(start, pos - start));
      out.spans.push_back({start, pos});
    } else if (!in_token) {
      in_token = true;
      token_start = start;
    }
  }
  close(text.size());
  return out;
}

Tokens tokenize(std::string_view text, TokenizerConfig cfg) {
  const std::string normalized = cfg.casing == Casing::kUncased
                                     ? to_lower(text)
                                     : sanitize_utf8(text);
  return tokenize_spans(normalized, cfg.punctuation).tokens;
}

std::size_t token_count(std::string_view text, TokenizerConfig cfg) {
  return tokenize(text, cfg).size();
}

std::string join(std::span<const Token> tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.append(sep);
    out.append(tokens[i]);
  }
  return out;
}

std::size_t NGramHash::operator()(const Tokens& gram) const noexcept {
  std::size_t seed = gram.size();
  for (const auto& token : gram) {
    seed ^= std::hash<std::string>{}(token) + 0x9e3779b97f4a7c15ULL +
            (seed << 6) + (seed >> 2);
  }
  return seed;
}

int NGramMultiset::count(const Tokens& gram) const {
  auto it = entries_.find(gram);
  return it == entries_.end() ? 0 : it->second;
}

void NGramMultiset::add(Tokens gram, int count) {
  if (static_cast<int>(gram.size()) != order_) {
    throw ContractViolation("n-gram length does not match multiset order");
  }
  if (count <= 0) return;
  entries_[std::move(gram)] += count;
  total_ += count;
}

NGramMultiset ngrams(std::span<const Token> tokens, int n) {
  if (n < 1) throw ContractViolation("n-gram order must be >= 1");
  NGramMultiset out(n);
  const auto order = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    out.add(Tokens(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + order)));
  }
  return out;
}

long clipped_matches(const NGramMultiset& hyp, const NGramMultiset& ref) {
  if (hyp.order() != ref.order()) {
    throw ContractViolation("clipped_matches: n-gram orders differ (" +
                            std::to_string(hyp.order()) + " vs " +
                            std::to_string(ref.order()) + ")");
  }
  const auto& small = hyp.entries().size() <= ref.entries().size() ? hyp : ref;
  const auto& large = &small == &hyp ? ref : hyp;
  long matches = 0;
  for (const auto& [gram, count] : small.entries()) {
    matches += std::min(count, large.count(gram));
  }
  return matches;
}

}  // namespace bbapp
