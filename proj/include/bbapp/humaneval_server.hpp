#pragma once

#include <memory>
#include <string>

#include "bbapp/humaneval.hpp"

namespace httplib {
class Server;
}

namespace bbapp::humaneval {

/// JSON-over-HTTP front end for a Service.
///
///   POST /sessions              {evaluator_id, language} -> 201 {session_id, total}
///   GET  /sessions/{id}/next    -> blinded item | {"done": true}
///   POST /sessions/{id}/ratings {item_id, scores: {A, B, C}} -> 204
///   GET  /report[?language=xx]  -> aggregate report
///   GET  /export                -> every effective rating as JSONL
///
/// Errors are {"error": message} with 400 (validation), 404 (unknown
/// session or item) or 409 (duplicate session).
class Server {
 public:
  explicit Server(Service& service);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds to an ephemeral port and returns it (-1 on failure).
  int bind_to_any_port(const std::string& host = "127.0.0.1");
  bool bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  Service& service_;
  std::unique_ptr<httplib::Server> http_;
};

/// Body of GET /sessions/{id}/next for an item.
std::string blinded_item_json(const BlindedItem& item, const SessionState& session);

}  // namespace bbapp::humaneval
