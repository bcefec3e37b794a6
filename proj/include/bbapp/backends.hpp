#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bbapp/cache.hpp"
#include "bbapp/lang.hpp"
#include "bbapp/rules.hpp"

namespace bbapp {

/// A black-box translation system. Output is aligned 1:1 with input.
/// Implementations are safe to share across threads.
class Translator {
 public:
  virtual ~Translator() = default;
  /// `texts` must be non-empty; empty strings inside it are fine.
  virtual std::vector<std::string> translate_batch(std::span<const std::string> texts,
                                                   const LangPair& pair) = 0;
  virtual bool supports(const LangPair& pair) const = 0;
  /// Identifies the engine for cache keys and run ids.
  virtual std::string engine_id() const = 0;
};

/// Source-side rewriter applied before translation. Output aligned 1:1.
class Simplifier {
 public:
  virtual ~Simplifier() = default;
  virtual std::vector<std::string> simplify_batch(std::span<const std::string> texts) = 0;
  virtual std::string id() const = 0;
};

// ---------------------------------------------------------------------------
// Mock translator

/// Offline stand-in for a black-box system. Translating out of the base
/// language maps every whitespace token through a per-target token map;
/// by default `w -> reverse(w) + "·" + target`. The opposite direction
/// inverts that map and then rewrites the result with `reverse_rules`,
/// which models the literal phrasing that back-translation produces.
struct MockLexicon {
  std::string base_language = "en";
  /// target language -> explicit token overrides (base token -> target token)
  std::map<std::string, std::map<std::string, std::string>> overrides;
  RuleSet reverse_rules;
};

class MockTranslator final : public Translator {
 public:
  /// Throws ContractViolation if an override table is not injective.
  explicit MockTranslator(MockLexicon lexicon = {});

  std::vector<std::string> translate_batch(std::span<const std::string> texts,
                                           const LangPair& pair) override;
  bool supports(const LangPair& pair) const override;
  std::string engine_id() const override { return engine_id_; }

  /// Forward token map for one token.
  std::string map_token(const std::string& token, const std::string& target) const;
  /// Inverse of `map_token`; tokens it never produces pass through.
  std::string unmap_token(const std::string& token, const std::string& target) const;

 private:
  std::string translate_one(const std::string& text, const LangPair& pair) const;

  MockLexicon lexicon_;
  std::map<std::string, std::map<std::string, std::string>> inverse_;
  std::string engine_id_;
};

/// Default token map used by the mock.
std::string mock_default_token(const std::string& token, const std::string& target);

/// Loads mock overrides from a TSV file with lines `target<TAB>token<TAB>mapped`.
std::map<std::string, std::map<std::string, std::string>> load_mock_overrides(
    const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// HTTP backend

struct HttpResponse {
  int status = 0;  // < 0 means no response (connection failure, timeout)
  std::string body;
  std::string error;
};

/// POSTs a JSON body to a path relative to the endpoint.
using HttpTransport =
    std::function<HttpResponse(const std::string& path, const std::string& body)>;

struct HttpConfig {
  std::string endpoint;  // "http://host:port[/prefix]"
  std::size_t batch_size = 32;
  int max_concurrency = 4;
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{200};
  std::chrono::seconds timeout{60};
  std::string engine_id;  // defaults to "http:" + endpoint
};

/// Transport backed by cpp-httplib.
HttpTransport make_http_transport(const std::string& endpoint, std::chrono::seconds timeout);

/// Client for the JSON translation protocol:
///   POST {endpoint}/translate
///   {"source_lang": s, "target_lang": t, "texts": [...]}
///   -> 200 {"translations": [...]} with one entry per text.
/// Inputs are chunked by `batch_size`; at most `max_concurrency` chunks are
/// in flight. A chunk is attempted at most `max_retries + 1` times with
/// exponential backoff; exhausted retries raise TransportError with the
/// chunk's index range. A well-formed 200 answer with the wrong shape raises
/// ProtocolError and is not retried.
class HttpClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpClient(HttpConfig config, HttpTransport transport = nullptr,
                      Sleeper sleep = nullptr);

  std::vector<std::string> translate(std::span<const std::string> texts,
                                     const std::string& source_lang,
                                     const std::string& target_lang) const;

  const HttpConfig& config() const { return config_; }

 private:
  std::vector<std::string> translate_chunk(std::span<const std::string> texts,
                                           const std::string& source_lang,
                                           const std::string& target_lang,
                                           std::size_t first) const;

  HttpConfig config_;
  HttpTransport transport_;
  Sleeper sleep_;
};

std::string encode_translate_request(std::span<const std::string> texts,
                                     const std::string& source_lang,
                                     const std::string& target_lang);
/// Throws ProtocolError unless `body` holds exactly `expected` strings.
std::vector<std::string> decode_translate_response(const std::string& body,
                                                   std::size_t expected);

class HttpTranslator final : public Translator {
 public:
  explicit HttpTranslator(HttpConfig config, HttpTransport transport = nullptr,
                          HttpClient::Sleeper sleep = nullptr);

  std::vector<std::string> translate_batch(std::span<const std::string> texts,
                                           const LangPair& pair) override;
  bool supports(const LangPair&) const override { return true; }
  std::string engine_id() const override;

 private:
  HttpClient client_;
};

// ---------------------------------------------------------------------------
// Caching decorator

/// Serves repeated (engine, pair, text) requests from a TranslationCache and
/// forwards only the distinct misses to the inner backend.
class CachedTranslator final : public Translator {
 public:
  CachedTranslator(std::shared_ptr<Translator> inner,
                   std::shared_ptr<TranslationCache> cache);

  std::vector<std::string> translate_batch(std::span<const std::string> texts,
                                           const LangPair& pair) override;
  bool supports(const LangPair& pair) const override { return inner_->supports(pair); }
  std::string engine_id() const override { return inner_->engine_id(); }

  const TranslationCache& cache() const { return *cache_; }

 private:
  std::shared_ptr<Translator> inner_;
  std::shared_ptr<TranslationCache> cache_;
};

// ---------------------------------------------------------------------------
// Simplifiers

class IdentitySimplifier final : public Simplifier {
 public:
  std::vector<std::string> simplify_batch(std::span<const std::string> texts) override;
  std::string id() const override { return "identity"; }
};

/// Applies a paraphrase rule set to every text with `apply_rules`.
class RuleSimplifier final : public Simplifier {
 public:
  explicit RuleSimplifier(RuleSet rules);

  std::vector<std::string> simplify_batch(std::span<const std::string> texts) override;
  std::string id() const override { return id_; }
  const RuleSet& rules() const { return rules_; }

 private:
  RuleSet rules_;
  std::string id_;
};

/// Remote simplifier speaking the translation protocol with
/// source_lang == target_lang == `language`.
class HttpSimplifier final : public Simplifier {
 public:
  HttpSimplifier(HttpConfig config, std::string language, HttpTransport transport = nullptr,
                 HttpClient::Sleeper sleep = nullptr);

  std::vector<std::string> simplify_batch(std::span<const std::string> texts) override;
  std::string id() const override;

 private:
  HttpClient client_;
  std::string language_;
};

/// Stable digest of a rule set, used in simplifier ids.
std::string rules_digest(const RuleSet& rules);

}  // namespace bbapp
