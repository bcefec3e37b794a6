#include "bbapp/humaneval_server.hpp"

#include "httplib.h"
#include "json.hpp"

namespace bbapp::humaneval {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void send_json(httplib::Response& res, int status, const std::string& body) {
  res.status = status;
  res.set_content(body, "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, json{{"error", message}}.dump());
}

json parse_body(const httplib::Request& req) {
  try {
    auto body = json::parse(req.body);
    if (!body.is_object()) throw ValidationError("request body must be a JSON object");
    return body;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed JSON body: ") + e.what());
  }
}

std::string string_field(const json& body, const char* name) {
  if (!body.contains(name) || !body[name].is_string()) {
    throw ValidationError(std::string("missing string field \"") + name + "\"");
  }
  return body[name].get<std::string>();
}

// Maps toolkit errors onto HTTP status codes.
template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const ValidationError& e) {
      send_error(res, 400, e.what());
    } catch (const NotFound& e) {
      send_error(res, 404, e.what());
    } catch (const Conflict& e) {
      send_error(res, 409, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

}  // namespace

std::string blinded_item_json(const BlindedItem& item, const SessionState& session) {
  ordered_json j;
  j["item_id"] = item.item_id;
  j["language"] = item.language;
  j["source"] = item.source;
  ordered_json candidates;
  for (std::size_t s = 0; s < 3; ++s) candidates[std::string(1, kSlots[s])] = item.candidates[s];
  j["candidates"] = std::move(candidates);
  ordered_json anchors;
  for (const auto& [score, text] : score_anchors()) anchors[std::to_string(score)] = text;
  j["anchors"] = std::move(anchors);
  j["progress"] = {{"completed", session.completed.size()}, {"total", session.queue.size()}};
  return j.dump();
}

Server::Server(Service& service) : service_(service), http_(std::make_unique<httplib::Server>()) {
  http_->Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const auto session =
        service_.create_session(string_field(body, "evaluator_id"), string_field(body, "language"));
    send_json(res, 201,
              json{{"session_id", session.session_id}, {"total", session.queue.size()}}.dump());
  }));

  http_->Get(R"(/sessions/([^/]+)/next)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               const std::string id = req.matches[1];
               const auto session = service_.session(id);
               const auto item = service_.next_item(id);
               if (!item) {
                 send_json(res, 200,
                           json{{"done", true}, {"completed", session.completed.size()}}.dump());
                 return;
               }
               send_json(res, 200, blinded_item_json(*item, session));
             }));

  http_->Post(R"(/sessions/([^/]+)/ratings)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const std::string id = req.matches[1];
                const json body = parse_body(req);
                const std::string item_id = string_field(body, "item_id");
                if (!body.contains("scores") || !body["scores"].is_object()) {
                  throw ValidationError("missing \"scores\" object");
                }
                SlotScores scores{};
                for (std::size_t s = 0; s < 3; ++s) {
                  const std::string key(1, kSlots[s]);
                  const auto& v = body["scores"];
                  if (!v.contains(key) || !v[key].is_number_integer()) {
                    throw ValidationError("slot " + key + " needs an integer score");
                  }
                  const auto raw = v[key].get<long long>();
                  if (raw < kMinScore || raw > kMaxScore) {
                    throw ValidationError("score for slot " + key + " is " + std::to_string(raw) +
                                          ", expected 0..6");
                  }
                  scores[s] = static_cast<int>(raw);
                }
                service_.submit_rating(id, item_id, scores);
                res.status = 204;
              }));

  http_->Get("/report", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> language;
    if (req.has_param("language")) language = req.get_param_value("language");
    send_json(res, 200, report_json(service_.report(language)));
  }));

  http_->Get("/export", guarded([this](const httplib::Request&, httplib::Response& res) {
    res.status = 200;
    res.set_content(service_.export_ratings(), "application/x-ndjson");
  }));
}

Server::~Server() { stop(); }

int Server::bind_to_any_port(const std::string& host) { return http_->bind_to_any_port(host); }

bool Server::bind(const std::string& host, int port) { return http_->bind_to_port(host, port); }

bool Server::listen_after_bind() { return http_->listen_after_bind(); }

void Server::stop() {
  if (http_) http_->stop();
}

void Server::wait_until_ready() const { http_->wait_until_ready(); }

}  // namespace bbapp::humaneval
