#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "bbapp/backends.hpp"
#include "bbapp/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace bbapp {

using nlohmann::json;

namespace {

struct Endpoint {
  std::string scheme_host_port;
  std::string prefix;
};

Endpoint split_endpoint(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw ContractViolation("endpoint must start with http:// or https://, got '" + endpoint +
                            "'");
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  Endpoint out;
  out.scheme_host_port = endpoint.substr(0, path_start);
  if (path_start != std::string::npos) {
    out.prefix = endpoint.substr(path_start);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  }
  return out;
}

bool retriable(const HttpResponse& r) {
  return r.status < 0 || r.status == 408 || r.status == 429 || r.status >= 500;
}

}  // namespace

HttpTransport make_http_transport(const std::string& endpoint, std::chrono::seconds timeout) {
  Endpoint ep = split_endpoint(endpoint);
  return [ep, timeout](const std::string& path, const std::string& body) {
    // httplib::Client is not safe for concurrent requests; one per call.
    httplib::Client client(ep.scheme_host_port);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    HttpResponse out;
    auto res = client.Post(ep.prefix + path, body, "application/json");
    if (!res) {
      out.status = -1;
      out.error = httplib::to_string(res.error());
      return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
  };
}

std::string encode_translate_request(std::span<const std::string> texts,
                                     const std::string& source_lang,
                                     const std::string& target_lang) {
  json body = {{"source_lang", source_lang},
               {"target_lang", target_lang},
               {"texts", json::array()}};
  for (const auto& t : texts) body["texts"].push_back(t);
  return body.dump();
}

std::vector<std::string> decode_translate_response(const std::string& body,
                                                   std::size_t expected) {
  json parsed;
  try {
    parsed = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("translation response is not JSON: ") + e.what());
  }
  if (!parsed.is_object() || !parsed.contains("translations") ||
      !parsed["translations"].is_array()) {
    throw ProtocolError("translation response lacks a \"translations\" array");
  }
  const auto& arr = parsed["translations"];
  if (arr.size() != expected) {
    throw ProtocolError("translation response has " + std::to_string(arr.size()) +
                        " entries for " + std::to_string(expected) + " inputs");
  }
  std::vector<std::string> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_string()) throw ProtocolError("non-string entry in \"translations\"");
    out.push_back(v.get<std::string>());
  }
  return out;
}

HttpClient::HttpClient(HttpConfig config, HttpTransport transport, Sleeper sleep)
    : config_(std::move(config)), transport_(std::move(transport)), sleep_(std::move(sleep)) {
  if (config_.batch_size < 1) throw ContractViolation("batch_size must be >= 1");
  if (config_.max_concurrency < 1) throw ContractViolation("max_concurrency must be >= 1");
  if (config_.max_retries < 0) throw ContractViolation("max_retries must be >= 0");
  if (!transport_) transport_ = make_http_transport(config_.endpoint, config_.timeout);
  if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (config_.engine_id.empty()) config_.engine_id = "http:" + config_.endpoint;
}

std::vector<std::string> HttpClient::translate_chunk(std::span<const std::string> texts,
                                                     const std::string& source_lang,
                                                     const std::string& target_lang,
                                                     std::size_t first) const {
  const std::string body = encode_translate_request(texts, source_lang, target_lang);
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) sleep_(config_.backoff_base * (1LL << std::min(attempt - 1, 20)));
    const HttpResponse r = transport_("/translate", body);
    if (r.status == 200) return decode_translate_response(r.body, texts.size());
    last_error = r.status < 0 ? r.error : "HTTP " + std::to_string(r.status);
    if (!retriable(r)) break;
  }
  throw TransportError("translation chunk [" + std::to_string(first) + ", " +
                           std::to_string(first + texts.size()) + ") failed: " + last_error,
                       first, first + texts.size());
}

std::vector<std::string> HttpClient::translate(std::span<const std::string> texts,
                                               const std::string& source_lang,
                                               const std::string& target_lang) const {
  if (texts.empty()) throw ContractViolation("translate_batch: empty input list");
  const std::size_t chunk = config_.batch_size;
  const std::size_t chunks = (texts.size() + chunk - 1) / chunk;
  std::vector<std::string> out(texts.size());
  std::vector<std::exception_ptr> errors(chunks);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&] {
    for (std::size_t c = next++; c < chunks && !failed; c = next++) {
      const std::size_t first = c * chunk;
      const std::size_t count = std::min(chunk, texts.size() - first);
      try {
        auto part = translate_chunk(texts.subspan(first, count), source_lang, target_lang, first);
        std::move(part.begin(), part.end(), out.begin() + static_cast<std::ptrdiff_t>(first));
      } catch (...) {
        errors[c] = std::current_exception();
        failed = true;
      }
    }
  };

  const auto workers =
      std::min<std::size_t>(chunks, static_cast<std::size_t>(config_.max_concurrency));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

HttpTranslator::HttpTranslator(HttpConfig config, HttpTransport transport,
                               HttpClient::Sleeper sleep)
    : client_(std::move(config), std::move(transport), std::move(sleep)) {}

std::vector<std::string> HttpTranslator::translate_batch(std::span<const std::string> texts,
                                                         const LangPair& pair) {
  return client_.translate(texts, pair.source(), pair.target());
}

std::string HttpTranslator::engine_id() const { return client_.config().engine_id; }

HttpSimplifier::HttpSimplifier(HttpConfig config, std::string language, HttpTransport transport,
                               HttpClient::Sleeper sleep)
    : client_(std::move(config), std::move(transport), std::move(sleep)),
      language_(std::move(language)) {
  validate_lang_code(language_);
}

std::vector<std::string> HttpSimplifier::simplify_batch(std::span<const std::string> texts) {
  if (texts.empty()) return {};
  return client_.translate(texts, language_, language_);
}

std::string HttpSimplifier::id() const { return client_.config().engine_id; }

}  // namespace bbapp
