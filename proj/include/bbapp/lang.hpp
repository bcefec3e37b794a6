#pragma once

#include <compare>
#include <string>

namespace bbapp {

/// Translation direction. Codes are non-empty lowercase BCP-47-style tags
/// and the two sides differ.
class LangPair {
 public:
  LangPair(std::string source, std::string target);

  const std::string& source() const { return source_; }
  const std::string& target() const { return target_; }
  LangPair reversed() const { return LangPair(target_, source_); }
  /// "en-hu"
  std::string str() const { return source_ + "-" + target_; }

  friend auto operator<=>(const LangPair&, const LangPair&) = default;

 private:
  std::string source_;
  std::string target_;
};

/// Throws ContractViolation unless `code` is a valid language code.
void validate_lang_code(const std::string& code);

/// Parses "en-hu" (or "en:hu").
LangPair parse_lang_pair(const std::string& text);

}  // namespace bbapp
