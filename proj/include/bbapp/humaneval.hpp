#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bbapp/pipeline.hpp"

namespace bbapp::humaneval {

enum class System { kOriginalMt, kSimplifiedMt, kReference };
enum class Stratum { kPositive, kNegative };

inline constexpr std::array<char, 3> kSlots = {'A', 'B', 'C'};
inline constexpr int kMinScore = 0;
inline constexpr int kMaxScore = 6;

std::string to_string(System system);
std::string to_string(Stratum stratum);
System parse_system(const std::string& name);
Stratum parse_stratum(const std::string& name);

/// One side-by-side judgment unit. Slots A/B/C hold the three candidate
/// translations in a seeded order; `mapping` records which system sits in
/// which slot and is never sent to raters.
struct EvalItem {
  std::string item_id;
  std::string source_lang;
  std::string language;  // target language
  std::string x;
  std::string y;
  std::array<std::string, 3> slots;
  std::array<System, 3> mapping;
  Stratum stratum = Stratum::kPositive;
  double delta_gleu = 0.0;
};

/// What a rater sees: no system identities, no separate reference.
struct BlindedItem {
  std::string item_id;
  std::string language;
  std::string source;
  std::array<std::string, 3> candidates;
};

/// Places the three systems of `record` into slots using a permutation
/// derived from (seed, record id).
EvalItem make_item(const EvalRecord& record, const LangPair& pair, Stratum stratum,
                   std::uint64_t seed);
BlindedItem blind(const EvalItem& item);
/// Candidate text per system, indexed by System, recovered through the
/// hidden mapping.
std::array<std::string, 3> unblind(const BlindedItem& blinded, const std::array<System, 3>& mapping);
/// Slot index holding `system`.
std::size_t slot_of(const EvalItem& item, System system);

struct SampleOptions {
  std::size_t n_per_stratum = 100;
  double pos_threshold = 0.4;
  /// Sources need strictly more tokens than this.
  std::size_t min_tokens = 4;
  std::uint64_t seed = 0;
};

struct SampleResult {
  std::vector<EvalItem> items;
  std::vector<std::string> warnings;
};

/// Draws up to n items uniformly without replacement from each stratum:
/// positive = delta_gleu > pos_threshold, negative = delta_gleu < 0.
/// Records whose source has min_tokens tokens or fewer are never drawn.
/// A stratum smaller than n is taken whole and reported in `warnings`.
SampleResult stratified_sample(const EvalRun& run, const SampleOptions& options = {});

void write_items_jsonl(std::span<const EvalItem> items, std::ostream& out);
std::vector<EvalItem> read_items_jsonl(std::istream& in);

/// Scores for slots A/B/C, each 0..6.
using SlotScores = std::array<int, 3>;

struct Rating {
  std::string item_id;
  std::string evaluator_id;
  SlotScores scores{};
  std::string timestamp;
};

struct SessionState {
  std::string session_id;
  std::string evaluator_id;
  std::string language;
  std::vector<std::string> queue;
  std::set<std::string> completed;

  bool done() const { return completed.size() >= queue.size(); }
  /// First queue entry not yet rated.
  std::optional<std::string> next() const;
};

struct LanguageReport {
  std::string language;
  std::size_t items = 0;
  double mean_original = 0.0;
  double mean_simple = 0.0;
  double mean_human = 0.0;
  double pct_positive = 0.0;
  double pct_negative = 0.0;
  double pct_same = 0.0;
};

struct AggregateReport {
  std::vector<LanguageReport> languages;
};

/// Unblinds every rating through its item's mapping and averages per
/// system. An item rated by several evaluators contributes the mean of
/// their latest ratings; the +/-/same split compares those per-item means
/// of the simplified and original systems. Ratings must reference known
/// items (ContractViolation otherwise). `language` filters the report.
AggregateReport aggregate(std::span<const Rating> ratings, std::span<const EvalItem> items,
                          const std::optional<std::string>& language = std::nullopt);

/// "Hu<TAB>2.52<TAB>3.11<TAB>4.45<TAB>38.5%<TAB>18.5%<TAB>43%"
std::string format_report_row(const LanguageReport& row);
std::string format_report(const AggregateReport& report);
std::string report_json(const AggregateReport& report);

/// Rating scale anchor texts shown to raters (scores 0, 2, 4, 6).
const std::map<int, std::string>& score_anchors();

// ---------------------------------------------------------------------------

/// Replayable service state. Every mutation is an event; applying the same
/// event sequence always yields the same state.
struct ServiceState {
  long seq = 0;
  std::map<std::string, SessionState> sessions;
  /// (item_id, evaluator_id) -> latest rating
  std::map<std::pair<std::string, std::string>, Rating> ratings;

  std::vector<Rating> rating_list() const;
};

/// Applies one log event (as produced by the service) to `state`.
void apply_event(ServiceState& state, const std::string& event_json);

/// Replays a JSONL event log. A torn final line is ignored.
ServiceState replay_log(std::istream& log);

struct ServiceOptions {
  std::uint64_t seed = 0;
  /// Write a snapshot after this many events (0 disables snapshots).
  std::size_t snapshot_every = 100;
};

/// Persistent rating service.
///
/// State lives in `state_dir`:
///   events.jsonl   append-only event log, one JSON event per line
///   snapshot.json  state as of event `seq`, rewritten atomically
/// On start the snapshot is loaded and later log events are replayed.
/// Writes are serialized and flushed to the log before they are
/// acknowledged; reads work on immutable state snapshots.
class Service {
 public:
  Service(std::vector<EvalItem> items, std::filesystem::path state_dir, ServiceOptions options = {});

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Queue = every item of `language` in a seeded order. Conflict if the
  /// evaluator already has an unfinished session for the language;
  /// ValidationError if the language has no items.
  SessionState create_session(const std::string& evaluator_id, const std::string& language);

  /// nullopt once every item in the session is rated. NotFound for an
  /// unknown session.
  std::optional<BlindedItem> next_item(const std::string& session_id) const;

  /// Latest submission wins. NotFound for unknown session or an item
  /// outside the session; ValidationError for a score outside 0..6.
  void submit_rating(const std::string& session_id, const std::string& item_id,
                     const SlotScores& scores);

  SessionState session(const std::string& session_id) const;
  AggregateReport report(const std::optional<std::string>& language = std::nullopt) const;
  /// Every effective rating as JSONL with per-slot scores. Slots stay
  /// blinded; unblinding needs the items file.
  std::string export_ratings() const;

  std::shared_ptr<const ServiceState> snapshot() const;
  const std::vector<EvalItem>& items() const { return items_; }
  const EvalItem* find_item(const std::string& item_id) const;

 private:
  void commit(const std::string& event_json);
  void write_snapshot(const ServiceState& state);

  std::vector<EvalItem> items_;
  std::map<std::string, std::size_t> item_index_;
  std::filesystem::path dir_;
  ServiceOptions options_;

  std::mutex write_mutex_;
  std::ofstream log_;
  mutable std::mutex state_mutex_;
  std::shared_ptr<const ServiceState> state_;
};

/// Serializes ServiceState to the snapshot format.
std::string snapshot_json(const ServiceState& state);
ServiceState parse_snapshot(const std::string& text);

}  // namespace bbapp::humaneval
