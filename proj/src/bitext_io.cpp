#include <fstream>
#include <set>
#include <sstream>

#include "bbapp/corpus.hpp"
#include "json.hpp"

namespace bbapp {

using nlohmann::json;

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return in;
}

std::string id_from_json(const json& v, std::size_t line_no) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ParseError("\"id\" must be a string or integer", line_no);
}

}  // namespace

BitextFormat parse_bitext_format(const std::string& name) {
  if (name == "tsv") return BitextFormat::kTsv;
  if (name == "jsonl") return BitextFormat::kJsonl;
  if (name == "moses") return BitextFormat::kMoses;
  throw ContractViolation("unknown bitext format '" + name + "' (tsv, jsonl, moses)");
}

void check_unique_ids(const Bitext& bitext) {
  std::set<std::string_view> seen;
  for (const auto& p : bitext.pairs) {
    if (!seen.insert(p.id).second) throw ParseError("duplicate sentence id '" + p.id + "'", 0);
  }
}

Bitext read_bitext_tsv(std::istream& in, const LangPair& pair, std::string provenance) {
  Bitext out{pair, {}, std::move(provenance)};
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    if (!is_valid_utf8(line)) throw ParseError("invalid UTF-8", line_no);
    auto fields = split_tabs(line);
    if (fields.size() != 2 && fields.size() != 3) {
      throw ParseError("expected 2 or 3 tab-separated columns, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    if (columns == 0) columns = fields.size();
    if (fields.size() != columns) {
      throw ParseError("mixed column counts: " + std::to_string(fields.size()) + " vs " +
                           std::to_string(columns),
                       line_no);
    }
    if (columns == 2) {
      out.pairs.push_back({std::to_string(line_no), std::move(fields[0]), std::move(fields[1])});
    } else {
      out.pairs.push_back({std::move(fields[0]), std::move(fields[1]), std::move(fields[2])});
    }
  }
  check_unique_ids(out);
  return out;
}

Bitext read_bitext_jsonl(std::istream& in, const LangPair& pair, std::string provenance) {
  Bitext out{pair, {}, std::move(provenance)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object() || !obj.contains("src") || !obj.contains("tgt") ||
        !obj["src"].is_string() || !obj["tgt"].is_string()) {
      throw ParseError("expected an object with string \"src\" and \"tgt\"", line_no);
    }
    SentencePair p;
    p.id = obj.contains("id") ? id_from_json(obj["id"], line_no) : std::to_string(line_no);
    p.src = obj["src"].get<std::string>();
    p.tgt = obj["tgt"].get<std::string>();
    if (!is_valid_utf8(p.src) || !is_valid_utf8(p.tgt) || !is_valid_utf8(p.id)) {
      throw ParseError("invalid UTF-8", line_no);
    }
    out.pairs.push_back(std::move(p));
  }
  check_unique_ids(out);
  return out;
}

Bitext load_moses(const std::filesystem::path& src_file, const std::filesystem::path& tgt_file,
                  const LangPair& pair) {
  auto read_lines = [](const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
      strip_cr(line);
      if (!is_valid_utf8(line)) {
        throw ParseError("invalid UTF-8 in " + path.string(), lines.size() + 1);
      }
      lines.push_back(std::move(line));
    }
    return lines;
  };
  auto src = read_lines(src_file);
  auto tgt = read_lines(tgt_file);
  if (src.size() != tgt.size()) {
    throw ParseError("alignment error: " + src_file.string() + " has " +
                         std::to_string(src.size()) + " lines but " + tgt_file.string() +
                         " has " + std::to_string(tgt.size()),
                     0);
  }
  Bitext out{pair, {}, src_file.string() + " + " + tgt_file.string()};
  out.pairs.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    out.pairs.push_back({std::to_string(i + 1), std::move(src[i]), std::move(tgt[i])});
  }
  return out;
}

Bitext load_bitext(const std::filesystem::path& path, BitextFormat format, const LangPair& pair) {
  switch (format) {
    case BitextFormat::kTsv: {
      auto in = open_input(path);
      return read_bitext_tsv(in, pair, path.string());
    }
    case BitextFormat::kJsonl: {
      auto in = open_input(path);
      return read_bitext_jsonl(in, pair, path.string());
    }
    case BitextFormat::kMoses: {
      auto with_ext = [&](const std::string& lang) {
        auto p = path;
        p += "." + lang;
        return p;
      };
      return load_moses(with_ext(pair.source()), with_ext(pair.target()), pair);
    }
  }
  throw ContractViolation("unknown bitext format");
}

void write_bitext_tsv(const Bitext& bitext, std::ostream& out) {
  for (const auto& p : bitext.pairs) {
    for (const auto* field : {&p.id, &p.src, &p.tgt}) {
      if (field->find_first_of("\t\n") != std::string::npos) {
        throw ContractViolation("field of pair '" + p.id + "' contains a tab or newline");
      }
    }
    out << p.id << '\t' << p.src << '\t' << p.tgt << '\n';
  }
}

}  // namespace bbapp
