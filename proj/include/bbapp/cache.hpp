#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bbapp/lang.hpp"

namespace bbapp {

/// Persistent translation cache.
///
/// On disk this is an append-only JSONL file, one entry per line:
///
///     {"k":"<64 hex chars>","v":"<translation>"}
///
/// where `k = sha256_fields({engine_id, source_lang, target_lang, text})`.
/// Entries never expire; a later line with the same key wins. A torn final
/// line (no trailing newline, unparsable) is dropped and truncated on open.
/// Readers run concurrently; writers are serialized and each `put_batch` is
/// flushed before returning.
class TranslationCache {
 public:
  /// In-memory only.
  TranslationCache() = default;
  /// Loads `file` if it exists; new entries are appended to it.
  explicit TranslationCache(std::filesystem::path file);

  TranslationCache(const TranslationCache&) = delete;
  TranslationCache& operator=(const TranslationCache&) = delete;

  static std::string key(const std::string& engine_id, const LangPair& pair,
                         const std::string& text);

  std::optional<std::string> get(const std::string& key) const;
  void put_batch(const std::vector<std::pair<std::string, std::string>>& entries);
  std::size_t size() const;

  const std::filesystem::path& file() const { return file_; }

 private:
  void load();

  std::filesystem::path file_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
  std::ofstream out_;
};

}  // namespace bbapp
