#include <algorithm>
#include <cstdlib>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "bbapp/error.hpp"
#include "bbapp/metrics.hpp"

namespace bbapp {

namespace {

using Ids = std::vector<int>;

struct IdsHash {
  std::size_t operator()(const Ids& ids) const noexcept {
    std::size_t seed = ids.size();
    for (int v : ids) {
      seed ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (seed << 6) +
              (seed >> 2);
    }
    return seed;
  }
};

class Levenshtein {
 public:
  long operator()(const Ids& a, const Ids& b) {
    prev_.resize(b.size() + 1);
    cur_.resize(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev_[j] = static_cast<long>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
      cur_[0] = static_cast<long>(i);
      for (std::size_t j = 1; j <= b.size(); ++j) {
        const long sub = prev_[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
        cur_[j] = std::min({sub, prev_[j] + 1, cur_[j - 1] + 1});
      }
      std::swap(prev_, cur_);
    }
    return prev_[b.size()];
  }

 private:
  std::vector<long> prev_;
  std::vector<long> cur_;
};

struct Encoded {
  Ids hyp;
  Ids ref;
};

Encoded encode(std::span<const Token> hyp, std::span<const Token> ref) {
  std::unordered_map<std::string_view, int> ids;
  auto id_of = [&](const Token& t) {
    auto [it, inserted] = ids.emplace(t, static_cast<int>(ids.size()));
    return it->second;
  };
  Encoded e;
  for (const auto& t : ref) e.ref.push_back(id_of(t));
  for (const auto& t : hyp) e.hyp.push_back(id_of(t));
  return e;
}

// Moves cur[from, from+len) so that it starts at index `to` of the sequence
// with the block removed.
Ids apply_shift(const Ids& cur, std::size_t from, std::size_t len, std::size_t to) {
  Ids rest;
  rest.reserve(cur.size());
  rest.insert(rest.end(), cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(from));
  rest.insert(rest.end(), cur.begin() + static_cast<std::ptrdiff_t>(from + len), cur.end());
  Ids out;
  out.reserve(cur.size());
  out.insert(out.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(to));
  out.insert(out.end(), cur.begin() + static_cast<std::ptrdiff_t>(from),
             cur.begin() + static_cast<std::ptrdiff_t>(from + len));
  out.insert(out.end(), rest.begin() + static_cast<std::ptrdiff_t>(to), rest.end());
  return out;
}

}  // namespace

long edit_distance(std::span<const Token> hyp, std::span<const Token> ref) {
  const Encoded e = encode(hyp, ref);
  Levenshtein lev;
  return lev(e.hyp, e.ref);
}

TerReport ter_edits(std::span<const Token> hyp, std::span<const Token> ref, TerMode mode,
                    TerShiftLimits limits) {
  const Encoded e = encode(hyp, ref);
  Levenshtein lev;
  Ids cur = e.hyp;
  long dist = lev(cur, e.ref);
  long shifts = 0;

  if (mode == TerMode::kShifts && !cur.empty() && !e.ref.empty()) {
    const std::size_t max_block =
        std::min(static_cast<std::size_t>(std::max(limits.max_block, 0)), cur.size());
    const auto max_distance = static_cast<std::size_t>(std::max(limits.max_distance, 0));

    // Only blocks that occur verbatim in the reference may move.
    std::unordered_set<Ids, IdsHash> ref_blocks;
    for (std::size_t len = 1; len <= max_block; ++len) {
      for (std::size_t i = 0; i + len <= e.ref.size(); ++i) {
        ref_blocks.emplace(e.ref.begin() + static_cast<std::ptrdiff_t>(i),
                           e.ref.begin() + static_cast<std::ptrdiff_t>(i + len));
      }
    }

    while (dist > 0) {
      long best_gain = 0;
      Ids best;
      long best_dist = dist;
      // Enumeration order realizes the tie-break: smaller block, then
      // leftmost origin, then smaller displacement (leftward first).
      for (std::size_t len = 1; len <= max_block; ++len) {
        for (std::size_t from = 0; from + len <= cur.size(); ++from) {
          const Ids block(cur.begin() + static_cast<std::ptrdiff_t>(from),
                          cur.begin() + static_cast<std::ptrdiff_t>(from + len));
          if (!ref_blocks.contains(block)) continue;
          const std::size_t last_slot = cur.size() - len;
          for (std::size_t d = 1; d <= max_distance; ++d) {
            for (int side = 0; side < 2; ++side) {
              std::size_t to = 0;
              if (side == 0) {
                if (d > from) continue;
                to = from - d;
              } else {
                to = from + d;
                if (to > last_slot) continue;
              }
              Ids candidate = apply_shift(cur, from, len, to);
              const long cand_dist = lev(candidate, e.ref);
              const long gain = dist - (cand_dist + 1);
              if (gain > best_gain) {
                best_gain = gain;
                best = std::move(candidate);
                best_dist = cand_dist;
              }
            }
          }
        }
      }
      if (best_gain <= 0) break;
      cur = std::move(best);
      dist = best_dist;
      ++shifts;
    }
  }

  TerReport report;
  report.shifts = shifts;
  report.edits = dist + shifts;
  report.ref_len = static_cast<long>(ref.size());
  report.ter = ref.empty() ? 0.0
                           : static_cast<double>(report.edits) /
                                 static_cast<double>(report.ref_len);
  return report;
}

TerReport ter(std::span<const Token> hyp, std::span<const Token> ref, TerMode mode,
              TerShiftLimits limits) {
  if (ref.empty()) throw UndefinedError("ter: empty reference has no defined rate");
  return ter_edits(hyp, ref, mode, limits);
}

}  // namespace bbapp
