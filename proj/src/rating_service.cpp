#include <algorithm>
#include <chrono>
#include <ctime>
#include <sstream>

#include "bbapp/hash.hpp"
#include "bbapp/humaneval.hpp"
#include "bbapp/random.hpp"
#include "json.hpp"

namespace bbapp::humaneval {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const auto secs = std::chrono::system_clock::to_time_t(now);
  const auto millis =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03lldZ", buf, static_cast<long long>(millis));
  return out;
}

ordered_json scores_json(const SlotScores& scores) {
  ordered_json j;
  for (std::size_t s = 0; s < 3; ++s) j[std::string(1, kSlots[s])] = scores[s];
  return j;
}

SlotScores scores_from_json(const json& j) {
  SlotScores out{};
  for (std::size_t s = 0; s < 3; ++s) out[s] = j.at(std::string(1, kSlots[s])).get<int>();
  return out;
}

ordered_json session_json(const SessionState& s) {
  ordered_json j;
  j["session_id"] = s.session_id;
  j["evaluator_id"] = s.evaluator_id;
  j["language"] = s.language;
  j["queue"] = s.queue;
  j["completed"] = std::vector<std::string>(s.completed.begin(), s.completed.end());
  return j;
}

ordered_json rating_json(const Rating& r) {
  ordered_json j;
  j["item_id"] = r.item_id;
  j["evaluator_id"] = r.evaluator_id;
  j["scores"] = scores_json(r.scores);
  j["timestamp"] = r.timestamp;
  return j;
}

Rating rating_from_json(const json& j) {
  return Rating{j.at("item_id").get<std::string>(), j.at("evaluator_id").get<std::string>(),
                scores_from_json(j.at("scores")), j.value("timestamp", "")};
}

}  // namespace

std::vector<Rating> ServiceState::rating_list() const {
  std::vector<Rating> out;
  out.reserve(ratings.size());
  for (const auto& [key, r] : ratings) out.push_back(r);
  return out;
}

void apply_event(ServiceState& state, const std::string& event_json) {
  const auto e = json::parse(event_json);
  const std::string type = e.at("type").get<std::string>();
  if (type == "session") {
    SessionState s;
    s.session_id = e.at("session_id").get<std::string>();
    s.evaluator_id = e.at("evaluator_id").get<std::string>();
    s.language = e.at("language").get<std::string>();
    s.queue = e.at("queue").get<std::vector<std::string>>();
    state.sessions[s.session_id] = std::move(s);
  } else if (type == "rating") {
    Rating r = rating_from_json(e);
    auto it = state.sessions.find(e.at("session_id").get<std::string>());
    if (it != state.sessions.end()) it->second.completed.insert(r.item_id);
    state.ratings[{r.item_id, r.evaluator_id}] = std::move(r);
  } else {
    throw ParseError("unknown event type '" + type + "'", 0);
  }
  state.seq = e.at("seq").get<long>();
}

ServiceState replay_log(std::istream& log) {
  ServiceState state;
  std::string line;
  while (std::getline(log, line)) {
    if (line.empty()) continue;
    try {
      apply_event(state, line);
    } catch (const json::exception&) {
      if (log.peek() == std::char_traits<char>::eof()) break;  // torn tail
      throw;
    }
  }
  return state;
}

std::string snapshot_json(const ServiceState& state) {
  ordered_json j;
  j["seq"] = state.seq;
  ordered_json sessions = ordered_json::array();
  for (const auto& [id, s] : state.sessions) sessions.push_back(session_json(s));
  j["sessions"] = std::move(sessions);
  ordered_json ratings = ordered_json::array();
  for (const auto& [key, r] : state.ratings) ratings.push_back(rating_json(r));
  j["ratings"] = std::move(ratings);
  return j.dump();
}

ServiceState parse_snapshot(const std::string& text) {
  try {
    const auto j = json::parse(text);
    ServiceState state;
    state.seq = j.at("seq").get<long>();
    for (const auto& sj : j.at("sessions")) {
      SessionState s;
      s.session_id = sj.at("session_id").get<std::string>();
      s.evaluator_id = sj.at("evaluator_id").get<std::string>();
      s.language = sj.at("language").get<std::string>();
      s.queue = sj.at("queue").get<std::vector<std::string>>();
      for (const auto& c : sj.at("completed")) s.completed.insert(c.get<std::string>());
      state.sessions[s.session_id] = std::move(s);
    }
    for (const auto& rj : j.at("ratings")) {
      Rating r = rating_from_json(rj);
      state.ratings[{r.item_id, r.evaluator_id}] = std::move(r);
    }
    return state;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed snapshot: ") + e.what(), 0);
  }
}

Service::Service(std::vector<EvalItem> items, std::filesystem::path state_dir,
                 ServiceOptions options)
    : items_(std::move(items)), dir_(std::move(state_dir)), options_(options) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!item_index_.emplace(items_[i].item_id, i).second) {
      throw ContractViolation("duplicate item id '" + items_[i].item_id + "'");
    }
  }
  std::filesystem::create_directories(dir_);

  ServiceState state;
  const auto snapshot_path = dir_ / "snapshot.json";
  if (std::filesystem::exists(snapshot_path)) {
    std::ifstream in(snapshot_path, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    state = parse_snapshot(text);
  }

  const auto log_path = dir_ / "events.jsonl";
  if (std::filesystem::exists(log_path)) {
    std::ifstream in(log_path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    std::size_t good_end = 0;
    while (pos < content.size()) {
      const auto nl = content.find('\n', pos);
      if (nl == std::string::npos) break;  // torn tail: never acknowledged
      const std::string line = content.substr(pos, nl - pos);
      if (!line.empty()) {
        const long seq = json::parse(line).at("seq").get<long>();
        if (seq > state.seq) apply_event(state, line);
      }
      pos = nl + 1;
      good_end = pos;
    }
    if (good_end < content.size()) std::filesystem::resize_file(log_path, good_end);
  }
  log_.open(log_path, std::ios::binary | std::ios::app);
  if (!log_) throw Error("cannot open event log " + log_path.string());
  state_ = std::make_shared<const ServiceState>(std::move(state));
}

std::shared_ptr<const ServiceState> Service::snapshot() const {
  std::lock_guard lock(state_mutex_);
  return state_;
}

const EvalItem* Service::find_item(const std::string& item_id) const {
  auto it = item_index_.find(item_id);
  return it == item_index_.end() ? nullptr : &items_[it->second];
}

void Service::commit(const std::string& event_json) {
  // Caller holds write_mutex_.
  auto next = std::make_shared<ServiceState>(*snapshot());
  apply_event(*next, event_json);
  log_ << event_json << '\n';
  log_.flush();
  if (!log_) throw Error("append to event log failed");
  if (options_.snapshot_every > 0 &&
      next->seq % static_cast<long>(options_.snapshot_every) == 0) {
    write_snapshot(*next);
  }
  std::lock_guard lock(state_mutex_);
  state_ = std::move(next);
}

void Service::write_snapshot(const ServiceState& state) {
  const auto tmp = dir_ / "snapshot.json.tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << snapshot_json(state);
    out.flush();
    if (!out) throw Error("snapshot write failed");
  }
  std::filesystem::rename(tmp, dir_ / "snapshot.json");
}

SessionState Service::create_session(const std::string& evaluator_id, const std::string& language) {
  if (evaluator_id.empty()) throw ValidationError("evaluator_id must not be empty");
  std::lock_guard write(write_mutex_);
  const auto state = snapshot();
  for (const auto& [id, s] : state->sessions) {
    if (s.evaluator_id == evaluator_id && s.language == language && !s.done()) {
      throw Conflict("evaluator '" + evaluator_id + "' already has active session " + id +
                     " for " + language);
    }
  }
  std::vector<std::string> pool;
  for (const auto& item : items_) {
    if (item.language == language) pool.push_back(item.item_id);
  }
  if (pool.empty()) throw ValidationError("no items for language '" + language + "'");

  const long seq = state->seq + 1;
  const std::string session_id =
      "s-" + sha256_fields({evaluator_id, language, std::to_string(seq)}).substr(0, 12);
  const auto order_seed = options_.seed ^
                          std::stoull(sha256_fields({evaluator_id, language}).substr(0, 16),
                                      nullptr, 16);
  std::vector<std::string> queue;
  for (std::size_t i : seeded_permutation(pool.size(), order_seed)) queue.push_back(pool[i]);

  ordered_json event;
  event["seq"] = seq;
  event["type"] = "session";
  event["session_id"] = session_id;
  event["evaluator_id"] = evaluator_id;
  event["language"] = language;
  event["queue"] = queue;
  event["ts"] = utc_now();
  commit(event.dump());
  return snapshot()->sessions.at(session_id);
}

SessionState Service::session(const std::string& session_id) const {
  const auto state = snapshot();
  auto it = state->sessions.find(session_id);
  if (it == state->sessions.end()) throw NotFound("unknown session '" + session_id + "'");
  return it->second;
}

std::optional<BlindedItem> Service::next_item(const std::string& session_id) const {
  const SessionState s = session(session_id);
  const auto next = s.next();
  if (!next) return std::nullopt;
  return blind(*find_item(*next));
}

void Service::submit_rating(const std::string& session_id, const std::string& item_id,
                            const SlotScores& scores) {
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] < kMinScore || scores[i] > kMaxScore) {
      throw ValidationError("score for slot " + std::string(1, kSlots[i]) + " is " +
                            std::to_string(scores[i]) + ", expected 0..6");
    }
  }
  std::lock_guard write(write_mutex_);
  const auto state = snapshot();
  auto it = state->sessions.find(session_id);
  if (it == state->sessions.end()) throw NotFound("unknown session '" + session_id + "'");
  const auto& queue = it->second.queue;
  if (std::find(queue.begin(), queue.end(), item_id) == queue.end()) {
    throw NotFound("item '" + item_id + "' is not part of session " + session_id);
  }
  ordered_json event;
  event["seq"] = state->seq + 1;
  event["type"] = "rating";
  event["session_id"] = session_id;
  event["item_id"] = item_id;
  event["evaluator_id"] = it->second.evaluator_id;
  event["scores"] = scores_json(scores);
  event["timestamp"] = utc_now();
  commit(event.dump());
}

AggregateReport Service::report(const std::optional<std::string>& language) const {
  const auto ratings = snapshot()->rating_list();
  return aggregate(ratings, items_, language);
}

std::string Service::export_ratings() const {
  std::string out;
  for (const auto& [key, r] : snapshot()->ratings) out += rating_json(r).dump() + "\n";
  return out;
}

}  // namespace bbapp::humaneval
