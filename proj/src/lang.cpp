#include "bbapp/lang.hpp"

#include <algorithm>
#include <cctype>

#include "bbapp/error.hpp"

namespace bbapp {

void validate_lang_code(const std::string& code) {
  const bool ok = !code.empty() && std::all_of(code.begin(), code.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
  if (!ok) throw ContractViolation("invalid language code '" + code + "'");
}

LangPair::LangPair(std::string source, std::string target)
    : source_(std::move(source)), target_(std::move(target)) {
  validate_lang_code(source_);
  validate_lang_code(target_);
  if (source_ == target_) {
    throw ContractViolation("language pair needs distinct languages, got " + source_ +
                            " twice");
  }
}

LangPair parse_lang_pair(const std::string& text) {
  const auto sep = text.find_first_of("-:");
  if (sep == std::string::npos) {
    throw ContractViolation("expected a language pair like en-hu, got '" + text + "'");
  }
  return LangPair(text.substr(0, sep), text.substr(sep + 1));
}

}  // namespace bbapp
