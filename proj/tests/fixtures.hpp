#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bbapp/backends.hpp"
#include "bbapp/corpus.hpp"
#include "bbapp/humaneval.hpp"

namespace bbapp::testing {

/// Idiomatic phrase and its plain paraphrase.
inline const std::vector<std::pair<std::string, std::string>>& idioms() {
  static const std::vector<std::pair<std::string, std::string>> table{
      {"jump in", "take part"},
      {"you're nuts", "you're crazy"},
      {"marooned", "stranded"},
      {"hit the sack", "go to bed"},
      {"a piece of cake", "very easy"},
      {"under the weather", "sick"},
      {"spill the beans", "tell the secret"},
      {"call it a day", "stop working"},
  };
  return table;
}

/// Test bitext where references translate the plain paraphrase, so a
/// literal translation of the idiom loses n-grams and the matching rule
/// simplifier wins them back.
struct IdiomFixture {
  Bitext test{LangPair("en", "hu"), {}, {}};
  RuleSet simplifier_rules;
  MockLexicon lexicon;
  std::size_t idiomatic = 0;
};

inline IdiomFixture make_idiom_fixture(std::size_t n, std::uint64_t seed,
                                       const LangPair& pair = LangPair("en", "hu")) {
  static const std::vector<std::string> fillers{
      "we", "should", "feel", "free", "to", "now", "at", "home", "they", "said",
      "still", "think", "when", "I", "was", "here", "today", "after", "work"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> filler(0, fillers.size() - 1);
  std::uniform_int_distribution<std::size_t> idiom(0, idioms().size() - 1);
  std::uniform_int_distribution<int> len(2, 6);
  std::uniform_int_distribution<int> coin(0, 9);

  IdiomFixture f;
  f.test = Bitext{pair, {}, "idiom fixture"};
  std::vector<ParaphraseRule> rules;
  for (const auto& [from, to] : idioms()) rules.push_back(make_rule(from, to));
  f.simplifier_rules = RuleSet(std::move(rules));

  MockTranslator mt(f.lexicon);
  for (std::size_t i = 0; i < n; ++i) {
    std::string head;
    std::string tail;
    for (int k = len(rng); k > 0; --k) head += fillers[filler(rng)] + " ";
    for (int k = len(rng); k > 0; --k) tail += " " + fillers[filler(rng)];
    std::string src = head;
    std::string plain = head;
    if (coin(rng) < 7) {
      const auto& [phrase, paraphrase] = idioms()[idiom(rng)];
      src += phrase;
      plain += paraphrase;
      ++f.idiomatic;
    } else {
      src += "okay";
      plain += "okay";
    }
    src += tail;
    plain += tail;
    const auto ref = mt.translate_batch(std::vector<std::string>{plain}, pair);
    f.test.pairs.push_back({std::to_string(i + 1), src, ref[0]});
  }
  return f;
}

/// 200 single-rater items whose aggregate is 2.52 / 3.11 / 4.45 with a
/// 77 / 37 / 86 better / worse / same split (38.5% / 18.5% / 43%).
struct RatedFixture {
  std::vector<humaneval::EvalItem> items;
  std::vector<humaneval::Rating> ratings;
};

inline RatedFixture make_rated_fixture(const std::string& language = "hu") {
  // (original, simplified, reference) per item, by construction:
  //   77 better: 1 -> 3 (one of them 1 -> 4)
  //   37 worse:  3 -> 2
  //   86 same:   58 at 4, 28 at 3
  //   reference: 90 items at 5, 110 at 4
  std::vector<std::array<int, 3>> scores;
  for (int i = 0; i < 77; ++i) scores.push_back({1, i == 0 ? 4 : 3, 0});
  for (int i = 0; i < 37; ++i) scores.push_back({3, 2, 0});
  for (int i = 0; i < 86; ++i) scores.push_back({i < 58 ? 4 : 3, i < 58 ? 4 : 3, 0});
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i][2] = i < 90 ? 5 : 4;

  RatedFixture f;
  const LangPair pair("en", language);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    EvalRecord r;
    r.id = language + "-" + std::to_string(i);
    r.x = "source sentence number " + std::to_string(i);
    r.y = "reference " + std::to_string(i);
    r.y_hat = "original " + std::to_string(i);
    r.y_hat_star = "simplified " + std::to_string(i);
    auto item = humaneval::make_item(r, pair, humaneval::Stratum::kPositive, 17);
    humaneval::SlotScores slot_scores{};
    for (std::size_t sys = 0; sys < 3; ++sys) {
      slot_scores[humaneval::slot_of(item, static_cast<humaneval::System>(sys))] = scores[i][sys];
    }
    f.ratings.push_back({item.item_id, "rater-1", slot_scores, ""});
    f.items.push_back(std::move(item));
  }
  return f;
}

}  // namespace bbapp::testing
