#include "bbapp/cache.hpp"

#include "json.hpp"

#include "bbapp/error.hpp"
#include "bbapp/hash.hpp"

namespace bbapp {

using nlohmann::json;

TranslationCache::TranslationCache(std::filesystem::path file) : file_(std::move(file)) {
  load();
}

std::string TranslationCache::key(const std::string& engine_id, const LangPair& pair,
                                  const std::string& text) {
  return sha256_fields({engine_id, pair.source(), pair.target(), text});
}

void TranslationCache::load() {
  std::error_code ec;
  if (std::filesystem::exists(file_, ec)) {
    std::ifstream in(file_, std::ios::binary);
    if (!in) throw Error("cannot read cache file " + file_.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    std::size_t good_end = 0;
    std::size_t line_no = 0;
    while (pos < content.size()) {
      const auto nl = content.find('\n', pos);
      ++line_no;
      if (nl == std::string::npos) break;  // torn tail
      const std::string_view line(content.data() + pos, nl - pos);
      if (!line.empty()) {
        try {
          const auto entry = json::parse(line);
          entries_[entry.at("k").get<std::string>()] = entry.at("v").get<std::string>();
        } catch (const json::exception& e) {
          throw ParseError("corrupt cache entry in " + file_.string() + ": " + e.what(),
                           line_no);
        }
      }
      pos = nl + 1;
      good_end = pos;
    }
    if (good_end < content.size()) std::filesystem::resize_file(file_, good_end);
  } else if (file_.has_parent_path()) {
    std::filesystem::create_directories(file_.parent_path());
  }
  out_.open(file_, std::ios::binary | std::ios::app);
  if (!out_) throw Error("cannot open cache file " + file_.string() + " for writing");
}

std::optional<std::string> TranslationCache::get(const std::string& key) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void TranslationCache::put_batch(
    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::unique_lock lock(mutex_);
  if (out_.is_open()) {
    for (const auto& [k, v] : entries) {
      out_ << json{{"k", k}, {"v", v}}.dump() << '\n';
    }
    out_.flush();
    if (!out_) throw Error("write to cache file " + file_.string() + " failed");
  }
  for (const auto& [k, v] : entries) entries_[k] = v;
}

std::size_t TranslationCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

}  // namespace bbapp
