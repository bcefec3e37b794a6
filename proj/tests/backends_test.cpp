#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "bbapp/backends.hpp"
#include "bbapp/error.hpp"
#include "bbapp/hash.hpp"
#include "httplib.h"
#include "json.hpp"
#include "test_util.hpp"

namespace bbapp {
namespace {

using nlohmann::json;
using testing::toks;

const LangPair kEnHu("en", "hu");
const LangPair kHuEn("hu", "en");

std::vector<std::string> one(std::string s) { return {std::move(s)}; }

// --- language pairs ----------------------------------------------------------

TEST(LangPair, ValidatesCodes) {
  EXPECT_EQ(kEnHu.str(), "en-hu");
  EXPECT_EQ(kEnHu.reversed(), kHuEn);
  EXPECT_THROW(LangPair("en", "en"), ContractViolation);
  EXPECT_THROW(LangPair("", "hu"), ContractViolation);
  EXPECT_THROW(LangPair("EN", "hu"), ContractViolation);
  EXPECT_EQ(parse_lang_pair("en-uk"), LangPair("en", "uk"));
  EXPECT_EQ(parse_lang_pair("en:uk"), LangPair("en", "uk"));
  EXPECT_THROW(parse_lang_pair("enuk"), ContractViolation);
}

// --- rules -------------------------------------------------------------------

TEST(RuleSimplify, NoMatchLeavesInputUnchanged) {
  const RuleSet rules({make_rule("marooned", "stranded")});
  EXPECT_EQ(rule_simplify(rules, toks("a b c")), toks("a b c"));
}

TEST(RuleSimplify, LongestMatchWins) {
  const std::vector<ParaphraseRule> rules{make_rule("a", "y"), make_rule("a b", "x")};
  EXPECT_EQ(rule_simplify(rules, toks("a b")), toks("x"));
  EXPECT_EQ(rule_simplify(rules, toks("a c")), toks("y c"));
}

TEST(RuleSimplify, ReplacementsAreNotRescanned) {
  const std::vector<ParaphraseRule> rules{make_rule("a", "b"), make_rule("b", "c")};
  EXPECT_EQ(rule_simplify(rules, toks("a")), toks("b"));
  EXPECT_EQ(rule_simplify(rules, toks("a b")), toks("b c"));
}

// Oracle: at each position try every rule, keep the longest match.
Tokens oracle_rule_pass(const std::vector<ParaphraseRule>& rules, const Tokens& in) {
  Tokens out;
  std::size_t i = 0;
  while (i < in.size()) {
    const ParaphraseRule* best = nullptr;
    for (const auto& r : rules) {
      if (i + r.pattern.size() > in.size()) continue;
      if (!std::equal(r.pattern.begin(), r.pattern.end(), in.begin() + static_cast<long>(i))) {
        continue;
      }
      if (!best || r.pattern.size() > best->pattern.size()) best = &r;
    }
    if (best) {
      out.insert(out.end(), best->replacement.begin(), best->replacement.end());
      i += best->pattern.size();
    } else {
      out.push_back(in[i++]);
    }
  }
  return out;
}

TEST(RuleSimplify, MatchesEnumerationOracle) {
  std::mt19937_64 rng(3);
  const std::vector<std::string> alpha{"a", "b", "c"};
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<ParaphraseRule> rules;
    std::set<Tokens> seen;
    for (int k = 0; k < 4; ++k) {
      auto p = testing::random_sentence(rng, alpha, 1, 3);
      if (!seen.insert(p).second) continue;
      auto r = testing::random_sentence(rng, {"x", "y", "a"}, 0, 2);
      rules.push_back({p, r, join(r)});
    }
    const auto input = testing::random_sentence(rng, alpha, 0, 12);
    ASSERT_EQ(rule_simplify(rules, input), oracle_rule_pass(rules, input));
  }
}

TEST(RuleSet, RejectsInvalidRules) {
  EXPECT_THROW(RuleSet({make_rule("a", "b"), make_rule("a", "c")}), ContractViolation);
  EXPECT_THROW(RuleSet({ParaphraseRule{{}, toks("x"), "x"}}), ContractViolation);
}

TEST(ApplyRules, IdiomSentenceExamples) {
  const RuleSet rules({make_rule("you're nuts", "you're crazy"), make_rule("marooned", "stranded")});
  EXPECT_EQ(apply_rules(rules, "I still think you're nuts"), "I still think you're crazy");
  EXPECT_EQ(apply_rules(rules, "When I was marooned here"), "When I was stranded here");
}

TEST(ApplyRules, KeepsSurroundingTextAndIgnoresCase) {
  const RuleSet rules({make_rule("jump in", "take part")});
  EXPECT_EQ(apply_rules(rules, "Please  Jump In, now."), "Please  take part, now.");
  EXPECT_EQ(apply_rules(rules, "no change here"), "no change here");
}

TEST(ParseRules, CommentsBlankLinesAndErrors) {
  std::istringstream ok("# header\n\nyou're nuts\tyou're crazy\r\nmarooned\tstranded\n");
  const RuleSet rules = parse_rules(ok);
  EXPECT_EQ(rules.size(), 2u);
  std::istringstream bad("a\tb\nmissing tab\n");
  try {
    parse_rules(bad);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream dup("a\tb\na\tc\n");
  EXPECT_THROW(parse_rules(dup), Error);
}

TEST(Simplifiers, IdentityAndRules) {
  IdentitySimplifier id;
  EXPECT_EQ(id.simplify_batch(one("a b")), one("a b"));
  RuleSimplifier rs(RuleSet({make_rule("you're nuts", "you're crazy")}));
  EXPECT_EQ(rs.simplify_batch(one("I still think you're nuts")), one("I still think you're crazy"));
  RuleSimplifier same(RuleSet({make_rule("you're nuts", "you're crazy")}));
  EXPECT_EQ(rs.id(), same.id());
  RuleSimplifier other(RuleSet({make_rule("marooned", "stranded")}));
  EXPECT_NE(rs.id(), other.id());
}

// --- mock translator ---------------------------------------------------------

TEST(MockTranslator, DefaultTokenMap) {
  MockTranslator mt;
  EXPECT_EQ(mt.translate_batch(one("cat dog"), kEnHu), one("tac·hu god·hu"));
  EXPECT_EQ(mock_default_token("ár", "hu"), "rá·hu");
}

TEST(MockTranslator, RoundTripIsIdentityWithoutRules) {
  MockTranslator mt;
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const std::string s = join(testing::random_sentence(rng, {"the", "cat", "ő", "x1", "sat"}, 0, 9));
    const auto fwd = mt.translate_batch(one(s), LangPair("en", "uk"));
    EXPECT_EQ(mt.translate_batch(fwd, LangPair("uk", "en")), one(s));
  }
}

TEST(MockTranslator, ReverseRulesSimulateParaphrase) {
  MockLexicon lex;
  lex.reverse_rules = RuleSet({make_rule("jump in", "take part")});
  MockTranslator mt(lex);
  const auto fwd = mt.translate_batch(one("feel free to jump in"), kEnHu);
  EXPECT_EQ(mt.translate_batch(fwd, kHuEn), one("feel free to take part"));
}

TEST(MockTranslator, OverridesAndInjectivity) {
  MockLexicon lex;
  lex.overrides["hu"] = {{"cat", "macska"}};
  MockTranslator mt(lex);
  EXPECT_EQ(mt.translate_batch(one("cat"), kEnHu), one("macska"));
  EXPECT_EQ(mt.translate_batch(one("macska"), kHuEn), one("cat"));

  MockLexicon clash;
  clash.overrides["hu"] = {{"a", "z"}, {"b", "z"}};
  EXPECT_THROW(MockTranslator{clash}, ContractViolation);
  MockLexicon shadow;
  shadow.overrides["hu"] = {{"a", "god·hu"}};  // default image of "dog"
  EXPECT_THROW(MockTranslator{shadow}, ContractViolation);
}

TEST(MockTranslator, SupportAndEngineId) {
  MockTranslator mt;
  EXPECT_TRUE(mt.supports(kEnHu));
  EXPECT_FALSE(mt.supports(LangPair("hu", "uk")));
  EXPECT_THROW(mt.translate_batch(one("x"), LangPair("hu", "uk")), ContractViolation);
  EXPECT_THROW(mt.translate_batch(std::vector<std::string>{}, kEnHu), ContractViolation);
  MockLexicon lex;
  lex.reverse_rules = RuleSet({make_rule("a", "b")});
  EXPECT_NE(MockTranslator(lex).engine_id(), mt.engine_id());
  EXPECT_EQ(MockTranslator().engine_id(), mt.engine_id());
}

TEST(MockTranslator, EmptyStringsStayAligned) {
  MockTranslator mt;
  const std::vector<std::string> in{"", "a", ""};
  const auto out = mt.translate_batch(in, kEnHu);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0], "");
  EXPECT_EQ(out[2], "");
}

TEST(MockOverrides, LoadsTsv) {
  const auto dir = testing::temp_dir("lex");
  std::ofstream(dir / "lex.tsv") << "# comment\nhu\tcat\tmacska\nuk\tcat\tkit\n";
  const auto o = load_mock_overrides(dir / "lex.tsv");
  EXPECT_EQ(o.at("hu").at("cat"), "macska");
  EXPECT_EQ(o.at("uk").at("cat"), "kit");
  std::ofstream(dir / "bad.tsv") << "hu\tcat\n";
  EXPECT_THROW(load_mock_overrides(dir / "bad.tsv"), ParseError);
}

// --- HTTP client with a fake transport ---------------------------------------

// Echo server: uppercases nothing, just prefixes the target language.
HttpResponse echo(const std::string& body) {
  const auto req = json::parse(body);
  json out = {{"translations", json::array()}};
  for (const auto& t : req["texts"]) {
    out["translations"].push_back(req["target_lang"].get<std::string>() + ":" + t.get<std::string>());
  }
  return {200, out.dump(), ""};
}

struct Recorder {
  std::mutex mu;
  std::vector<std::size_t> batch_sizes;
  std::vector<std::chrono::milliseconds> sleeps;
  std::atomic<int> calls{0};
  std::atomic<int> in_flight{0};
  std::atomic<int> max_in_flight{0};
};

TEST(HttpClient, ChunksAndKeepsOrder) {
  Recorder rec;
  HttpConfig cfg{.endpoint = "http://fake", .batch_size = 3, .max_concurrency = 2};
  HttpTransport t = [&](const std::string& path, const std::string& body) {
    EXPECT_EQ(path, "/translate");
    const int now = ++rec.in_flight;
    int prev = rec.max_in_flight.load();
    while (now > prev && !rec.max_in_flight.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
    {
      std::lock_guard lock(rec.mu);
      rec.batch_sizes.push_back(json::parse(body)["texts"].size());
    }
    --rec.in_flight;
    return echo(body);
  };
  HttpTranslator tr(cfg, t);
  std::vector<std::string> in;
  for (int i = 0; i < 10; ++i) in.push_back("s" + std::to_string(i));
  const auto out = tr.translate_batch(in, kEnHu);
  ASSERT_EQ(out.size(), in.size());
  for (std::size_t i = 0; i < in.size(); ++i) EXPECT_EQ(out[i], "hu:" + in[i]);
  std::sort(rec.batch_sizes.begin(), rec.batch_sizes.end());
  EXPECT_EQ(rec.batch_sizes, (std::vector<std::size_t>{1, 3, 3, 3}));
  EXPECT_LE(rec.max_in_flight.load(), 2);
  EXPECT_EQ(tr.engine_id(), "http:http://fake");
}

TEST(HttpClient, RetryBoundAndBackoff) {
  for (int retries : {0, 1, 3}) {
    Recorder rec;
    HttpConfig cfg{.endpoint = "http://fake", .batch_size = 4, .max_concurrency = 1,
                   .max_retries = retries, .backoff_base = std::chrono::milliseconds(10)};
    HttpTranslator tr(
        cfg, [&](const std::string&, const std::string&) {
          ++rec.calls;
          return HttpResponse{503, "busy", ""};
        },
        [&](std::chrono::milliseconds d) {
          std::lock_guard lock(rec.mu);
          rec.sleeps.push_back(d);
        });
    std::vector<std::string> in(6, "x");
    try {
      tr.translate_batch(in, kEnHu);
      FAIL() << "expected TransportError";
    } catch (const TransportError& e) {
      EXPECT_EQ(e.first(), 0u);
      EXPECT_EQ(e.last(), 4u);
    }
    EXPECT_EQ(rec.calls.load(), retries + 1);
    ASSERT_EQ(rec.sleeps.size(), static_cast<std::size_t>(retries));
    for (int a = 0; a < retries; ++a) {
      EXPECT_EQ(rec.sleeps[static_cast<std::size_t>(a)], std::chrono::milliseconds(10 << a));
    }
  }
}

TEST(HttpClient, RecoversAfterTransientFailure) {
  std::atomic<int> calls{0};
  HttpConfig cfg{.endpoint = "http://fake", .max_retries = 2};
  HttpTranslator tr(
      cfg,
      [&](const std::string&, const std::string& body) {
        if (++calls == 1) return HttpResponse{-1, "", "connection refused"};
        return echo(body);
      },
      [](std::chrono::milliseconds) {});
  EXPECT_EQ(tr.translate_batch(one("a"), kEnHu), one("hu:a"));
  EXPECT_EQ(calls.load(), 2);
}

TEST(HttpClient, ClientErrorsAreNotRetried) {
  std::atomic<int> calls{0};
  HttpConfig cfg{.endpoint = "http://fake", .max_retries = 5};
  HttpTranslator tr(
      cfg,
      [&](const std::string&, const std::string&) {
        ++calls;
        return HttpResponse{400, "bad", ""};
      },
      [](std::chrono::milliseconds) {});
  EXPECT_THROW(tr.translate_batch(one("a"), kEnHu), TransportError);
  EXPECT_EQ(calls.load(), 1);
}

TEST(HttpClient, CountMismatchIsProtocolError) {
  std::atomic<int> calls{0};
  HttpConfig cfg{.endpoint = "http://fake", .max_retries = 3};
  HttpTranslator tr(cfg, [&](const std::string&, const std::string&) {
    ++calls;
    return HttpResponse{200, R"({"translations":["only one"]})", ""};
  });
  EXPECT_THROW(tr.translate_batch(std::vector<std::string>{"a", "b"}, kEnHu), ProtocolError);
  EXPECT_EQ(calls.load(), 1);
  EXPECT_THROW(decode_translate_response("not json", 1), ProtocolError);
  EXPECT_THROW(decode_translate_response(R"({"translations":[1]})", 1), ProtocolError);
  EXPECT_THROW(decode_translate_response(R"({"x":[]})", 0), ProtocolError);
}

TEST(HttpClient, RejectsBadConfig) {
  auto t = [](const std::string&, const std::string& b) { return echo(b); };
  EXPECT_THROW(HttpClient(HttpConfig{.endpoint = "x", .batch_size = 0}, t), ContractViolation);
  EXPECT_THROW(HttpClient(HttpConfig{.endpoint = "x", .max_concurrency = 0}, t), ContractViolation);
  EXPECT_THROW(HttpClient(HttpConfig{.endpoint = "x", .max_retries = -1}, t), ContractViolation);
  EXPECT_THROW(make_http_transport("localhost:80", std::chrono::seconds(1)), ContractViolation);
}

TEST(HttpSimplifier, UsesSameLanguageOnBothSides) {
  HttpConfig cfg{.endpoint = "http://fake", .engine_id = "simp"};
  std::string seen;
  HttpSimplifier s(cfg, "en", [&](const std::string&, const std::string& body) {
    seen = body;
    return echo(body);
  });
  EXPECT_EQ(s.simplify_batch(one("a")), one("en:a"));
  const auto req = json::parse(seen);
  EXPECT_EQ(req["source_lang"], "en");
  EXPECT_EQ(req["target_lang"], "en");
  EXPECT_EQ(s.id(), "simp");
}

// --- HTTP client against a real local server --------------------------------

TEST(HttpClient, TalksToLocalServer) {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/translate", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    const auto r = echo(req.body);
    res.set_content(r.body, "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpConfig cfg{.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/",
                 .batch_size = 2, .max_concurrency = 3, .timeout = std::chrono::seconds(5)};
  HttpTranslator tr(cfg);
  std::vector<std::string> in{"ä", "b", "c", "d", "e"};
  const auto out = tr.translate_batch(in, kEnHu);
  server.stop();
  th.join();
  EXPECT_EQ(out, (std::vector<std::string>{"hu:ä", "hu:b", "hu:c", "hu:d", "hu:e"}));
  EXPECT_EQ(hits.load(), 3);
}

TEST(HttpClient, UnreachableServerIsTransportError) {
  // Bind then release a port so nothing listens on it.
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  HttpConfig cfg{.endpoint = "http://127.0.0.1:" + std::to_string(port), .max_retries = 1,
                 .timeout = std::chrono::seconds(1)};
  HttpTranslator tr(cfg, nullptr, [](std::chrono::milliseconds) {});
  EXPECT_THROW(tr.translate_batch(one("a"), kEnHu), TransportError);
}

// --- cache -------------------------------------------------------------------

class CountingTranslator final : public Translator {
 public:
  std::vector<std::string> translate_batch(std::span<const std::string> texts,
                                           const LangPair& pair) override {
    ++calls;
    texts_seen += texts.size();
    return inner.translate_batch(texts, pair);
  }
  bool supports(const LangPair& p) const override { return inner.supports(p); }
  std::string engine_id() const override { return inner.engine_id(); }

  MockTranslator inner;
  std::atomic<int> calls{0};
  std::atomic<std::size_t> texts_seen{0};
};

TEST(CachedTranslator, SecondCallHitsCacheOnly) {
  auto inner = std::make_shared<CountingTranslator>();
  CachedTranslator cached(inner, std::make_shared<TranslationCache>());
  const std::vector<std::string> in{"a b", "c", "a b"};
  const auto first = cached.translate_batch(in, kEnHu);
  EXPECT_EQ(inner->calls.load(), 1);
  EXPECT_EQ(inner->texts_seen.load(), 2u);  // duplicates collapse
  const auto second = cached.translate_batch(in, kEnHu);
  EXPECT_EQ(second, first);
  EXPECT_EQ(inner->calls.load(), 1);
}

TEST(CachedTranslator, CoherentWithUncached) {
  auto inner = std::make_shared<CountingTranslator>();
  CachedTranslator cached(inner, std::make_shared<TranslationCache>());
  MockTranslator plain;
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    std::vector<std::string> batch;
    for (int k = 0; k < 5; ++k) batch.push_back(join(testing::random_sentence(rng, {"a", "b", "c"}, 0, 4)));
    EXPECT_EQ(cached.translate_batch(batch, kEnHu), plain.translate_batch(batch, kEnHu));
  }
}

TEST(CachedTranslator, KeysSeparatePairsAndEngines) {
  const auto k1 = TranslationCache::key("e1", kEnHu, "x");
  EXPECT_NE(k1, TranslationCache::key("e2", kEnHu, "x"));
  EXPECT_NE(k1, TranslationCache::key("e1", kHuEn, "x"));
  EXPECT_NE(k1, TranslationCache::key("e1", kEnHu, "y"));
  // Field boundaries matter.
  EXPECT_NE(sha256_fields({"ab", "c"}), sha256_fields({"a", "bc"}));
  EXPECT_EQ(k1.size(), 64u);
}

TEST(TranslationCache, PersistsAcrossInstances) {
  const auto dir = testing::temp_dir("cache");
  const auto file = dir / "sub" / "cache.jsonl";
  {
    auto inner = std::make_shared<CountingTranslator>();
    CachedTranslator c(inner, std::make_shared<TranslationCache>(file));
    c.translate_batch(std::vector<std::string>{"a", "b\nc"}, kEnHu);
  }
  auto inner = std::make_shared<CountingTranslator>();
  auto cache = std::make_shared<TranslationCache>(file);
  EXPECT_EQ(cache->size(), 2u);
  CachedTranslator c(inner, cache);
  c.translate_batch(std::vector<std::string>{"a", "b\nc"}, kEnHu);
  EXPECT_EQ(inner->calls.load(), 0);
}

TEST(TranslationCache, TornTailIsDropped) {
  const auto dir = testing::temp_dir("torn");
  const auto file = dir / "cache.jsonl";
  {
    TranslationCache c(file);
    c.put_batch({{"k1", "v1"}, {"k2", "v2"}});
  }
  std::ofstream(file, std::ios::app) << R"({"k":"k3","v":"par)";
  {
    TranslationCache c(file);
    EXPECT_EQ(c.size(), 2u);
    EXPECT_FALSE(c.get("k3"));
    c.put_batch({{"k3", "v3"}});
  }
  TranslationCache c(file);
  EXPECT_EQ(c.get("k3"), "v3");
  EXPECT_EQ(c.size(), 3u);
}

TEST(TranslationCache, LaterEntryWins) {
  TranslationCache c;
  c.put_batch({{"k", "old"}});
  c.put_batch({{"k", "new"}});
  EXPECT_EQ(c.get("k"), "new");
}

TEST(TranslationCache, ConcurrentReadersAndWriters) {
  const auto dir = testing::temp_dir("conc");
  auto cache = std::make_shared<TranslationCache>(dir / "c.jsonl");
  auto inner = std::make_shared<CountingTranslator>();
  CachedTranslator c(inner, cache);
  MockTranslator plain;
  std::vector<std::jthread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 50; ++i) {
        const std::vector<std::string> in{"w" + std::to_string((i + t) % 20)};
        if (c.translate_batch(in, kEnHu) != plain.translate_batch(in, kEnHu)) ++mismatches;
      }
    });
  }
  threads.clear();
  EXPECT_EQ(mismatches.load(), 0);
  EXPECT_EQ(cache->size(), 20u);
  EXPECT_EQ(TranslationCache(dir / "c.jsonl").size(), 20u);
}

}  // namespace
}  // namespace bbapp
