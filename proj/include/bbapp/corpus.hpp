#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bbapp/backends.hpp"
#include "bbapp/error.hpp"
#include "bbapp/lang.hpp"

namespace bbapp {

struct SentencePair {
  std::string id;
  std::string src;
  std::string tgt;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

/// Aligned sentence pairs for one language pair. Ids are unique.
struct Bitext {
  LangPair pair;
  std::vector<SentencePair> pairs;
  std::string provenance;

  std::size_t size() const { return pairs.size(); }
};

enum class BitextFormat { kTsv, kJsonl, kMoses };

BitextFormat parse_bitext_format(const std::string& name);

/// Loads a bitext.
///   tsv:   `src<TAB>tgt` or `id<TAB>src<TAB>tgt`; every line must use the
///          same column count. Blank lines are skipped.
///   jsonl: one {"src", "tgt", "id"?} object per line.
///   moses: `path` is a prefix; sentences are read from `path.<source>` and
///          `path.<target>`, zipped by line.
/// Missing ids become the 1-based line number. Input must be UTF-8.
Bitext load_bitext(const std::filesystem::path& path, BitextFormat format, const LangPair& pair);
Bitext load_moses(const std::filesystem::path& src_file, const std::filesystem::path& tgt_file,
                  const LangPair& pair);
Bitext read_bitext_tsv(std::istream& in, const LangPair& pair, std::string provenance = {});
Bitext read_bitext_jsonl(std::istream& in, const LangPair& pair, std::string provenance = {});

/// Writes `id<TAB>src<TAB>tgt` lines.
void write_bitext_tsv(const Bitext& bitext, std::ostream& out);

/// Throws ParseError on duplicate ids.
void check_unique_ids(const Bitext& bitext);

/// Inclusive token-count bounds applied to both sides of a pair.
struct LengthFilter {
  std::size_t min_len = 3;
  std::size_t max_len = 50;

  void validate() const;
  bool accepts(std::string_view a, std::string_view b) const;
};

/// Keeps pairs whose source and target token counts both lie in
/// [min_len, max_len]. Order is preserved.
Bitext filter_pairs(const Bitext& bitext, std::size_t min_len = 3, std::size_t max_len = 50);

/// One simplification training example: an original source sentence and the
/// back-translation of its reference translation, both in the source
/// language.
struct AppRecord {
  std::string id;
  std::string original_src;
  std::string backtranslation;
  LangPair origin_pair;

  friend bool operator==(const AppRecord&, const AppRecord&) = default;
};

struct AppCorpus {
  std::string source_lang;
  std::vector<AppRecord> records;

  std::size_t size() const { return records.size(); }
};

struct BuildOptions {
  LengthFilter filter;
  bool dedupe = false;
  /// Texts per backend call. With a cached backend every completed chunk is
  /// persisted, so an interrupted build resumes from the last chunk.
  std::size_t chunk_size = 64;
  /// Chunks translated concurrently.
  int concurrency = 1;
};

/// Raised when a backend call fails during a corpus build. The backend's
/// own exception is nested (std::rethrow_if_nested).
class CorpusBuildError : public Error {
 public:
  CorpusBuildError(const std::string& what, std::size_t bitext_index, std::size_t first,
                   std::size_t last)
      : Error(what), bitext_index_(bitext_index), first_(first), last_(last) {}
  std::size_t bitext_index() const { return bitext_index_; }
  std::size_t first() const { return first_; }
  std::size_t last() const { return last_; }

 private:
  std::size_t bitext_index_;
  std::size_t first_;
  std::size_t last_;
};

/// Back-translates the target side of every bitext into the shared source
/// language and pairs each result with its original source sentence. The
/// length filter is applied to (original_src, backtranslation). Records keep
/// per-bitext order, bitexts are concatenated in input order. Record ids
/// are "<src>-<tgt>:<pair id>".
AppCorpus build_app_corpus(std::span<const Bitext> bitexts, Translator& backend,
                           const BuildOptions& options = {});

/// JSONL, one record per line with keys in this order:
/// id, original_src, backtranslation, origin_src_lang, origin_tgt_lang.
void write_app_corpus(const AppCorpus& corpus, std::ostream& out);
std::string app_corpus_jsonl(const AppCorpus& corpus);
AppCorpus read_app_corpus(std::istream& in);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct CorpusSplit {
  AppCorpus train;
  AppCorpus val;
  AppCorpus test;
};

/// Partition sizes: each part gets floor(ratio * n); the remaining records
/// go one at a time to the parts with the largest fractional remainders
/// (ties to the earlier part).
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios);

/// Seeded shuffle, then contiguous train/val/test partition.
CorpusSplit split_corpus(const AppCorpus& corpus, const SplitRatios& ratios, std::uint64_t seed);

/// Uniform sample of `n` pairs without replacement, in original order.
Bitext sample_pairs(const Bitext& bitext, std::size_t n, std::uint64_t seed);

}  // namespace bbapp
