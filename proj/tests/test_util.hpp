#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bbapp/text.hpp"

namespace bbapp::testing {

/// Splits on single spaces; test inputs are pre-tokenized.
inline Tokens toks(const std::string& s) {
  Tokens out;
  std::istringstream in(s);
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

/// Random sentence over `alphabet` with length in [min_len, max_len].
inline Tokens random_sentence(std::mt19937_64& rng, const std::vector<std::string>& alphabet,
                              std::size_t min_len, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  Tokens out(len(rng));
  for (auto& t : out) t = alphabet[pick(rng)];
  return out;
}

/// Every sentence of length 0..max_len over `alphabet`.
inline std::vector<Tokens> all_sentences(const std::vector<std::string>& alphabet,
                                         std::size_t max_len) {
  std::vector<Tokens> out{{}};
  std::vector<Tokens> frontier{{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<Tokens> next;
    for (const auto& s : frontier) {
      for (const auto& a : alphabet) {
        auto t = s;
        t.push_back(a);
        next.push_back(t);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Independent oracles. None of these call into the library's n-gram or
// edit-distance code.

/// Occurrences of `gram` in `s`, by direct scan.
inline long count_occurrences(const Tokens& s, const Tokens& gram) {
  long c = 0;
  if (gram.size() > s.size()) return 0;
  for (std::size_t i = 0; i + gram.size() <= s.size(); ++i) {
    if (std::equal(gram.begin(), gram.end(), s.begin() + static_cast<std::ptrdiff_t>(i))) ++c;
  }
  return c;
}

/// Clipped n-gram matches and hypothesis n-gram total, by brute force.
inline std::pair<long, long> oracle_clipped(const Tokens& hyp, const Tokens& ref, std::size_t n) {
  std::set<Tokens> distinct;
  long total = 0;
  for (std::size_t i = 0; i + n <= hyp.size(); ++i) {
    distinct.insert(Tokens(hyp.begin() + static_cast<std::ptrdiff_t>(i),
                           hyp.begin() + static_cast<std::ptrdiff_t>(i + n)));
    ++total;
  }
  long matches = 0;
  for (const auto& g : distinct) {
    matches += std::min(count_occurrences(hyp, g), count_occurrences(ref, g));
  }
  return {matches, total};
}

/// Edit distance by memoized recursion over suffixes.
inline long oracle_edit_distance(const Tokens& a, const Tokens& b) {
  std::map<std::pair<std::size_t, std::size_t>, long> memo;
  auto rec = [&](auto&& self, std::size_t i, std::size_t j) -> long {
    if (i == a.size()) return static_cast<long>(b.size() - j);
    if (j == b.size()) return static_cast<long>(a.size() - i);
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    long best = std::min(self(self, i + 1, j) + 1, self(self, i, j + 1) + 1);
    best = std::min(best, self(self, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1));
    memo[key] = best;
    return best;
  };
  return rec(rec, 0, 0);
}

/// Set of n-grams of `s`, built by direct slicing.
inline std::set<Tokens> oracle_gram_set(const Tokens& s, std::size_t n) {
  std::set<Tokens> out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    out.insert(Tokens(s.begin() + static_cast<std::ptrdiff_t>(i),
                      s.begin() + static_cast<std::ptrdiff_t>(i + n)));
  }
  return out;
}

/// Sentence GLEU from pooled brute-force clipping.
inline double oracle_gleu(const Tokens& hyp, const Tokens& ref) {
  if (hyp.empty() && ref.empty()) return 1.0;
  if (hyp.empty() || ref.empty()) return 0.0;
  long m = 0;
  long th = 0;
  long tr = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    auto [mm, t1] = oracle_clipped(hyp, ref, n);
    m += mm;
    th += t1;
    tr += oracle_clipped(ref, ref, n).second;
  }
  return std::min(static_cast<double>(m) / static_cast<double>(th),
                  static_cast<double>(m) / static_cast<double>(tr));
}

/// SARI from std::set arithmetic.
inline double oracle_sari(const Tokens& src, const Tokens& out, const std::vector<Tokens>& refs, int orders) {
  auto ratio = [](std::size_t num, std::size_t den, std::size_t other) {
    if (den == 0) return other == 0 ? 1.0 : 0.0;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  auto inter = [](const std::set<Tokens>& a, const std::set<Tokens>& b) {
    std::set<Tokens> o;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(o, o.begin()));
    return o;
  };
  auto diff = [](const std::set<Tokens>& a, const std::set<Tokens>& b) {
    std::set<Tokens> o;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(o, o.begin()));
    return o;
  };
  auto f = [&](const std::set<Tokens>& c, const std::set<Tokens>& r) {
    const auto hit = inter(c, r).size();
    const double p = ratio(hit, c.size(), r.size());
    const double q = ratio(hit, r.size(), c.size());
    return p + q > 0 ? 2 * p * q / (p + q) : 0.0;
  };
  double total = 0;
  for (int n = 1; n <= orders; ++n) {
    const auto S = oracle_gram_set(src, static_cast<std::size_t>(n));
    const auto O = oracle_gram_set(out, static_cast<std::size_t>(n));
    std::set<Tokens> R;
    for (const auto& r : refs) {
      auto g = oracle_gram_set(r, static_cast<std::size_t>(n));
      R.insert(g.begin(), g.end());
    }
    const double keep = f(inter(S, O), inter(S, R));
    const double add = f(diff(O, S), diff(R, S));
    const auto del_c = diff(S, O);
    const auto del_r = diff(S, R);
    const double del = ratio(inter(del_c, del_r).size(), del_c.size(), del_r.size());
    total += (keep + add + del) / 3.0;
  }
  return 100.0 * total / orders;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  static std::mt19937_64 rng(std::random_device{}());
  auto dir = std::filesystem::temp_directory_path() /
             ("bbapp-" + name + "-" + std::to_string(rng() % 1000000007ULL));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace bbapp::testing
