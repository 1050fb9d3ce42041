#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fntriage/error.hpp"

namespace fntriage {

enum class Ambiguity { indicative, ambiguous, out_of_scope };

inline constexpr std::array<Ambiguity, 3> kAllAmbiguities = {
    Ambiguity::indicative, Ambiguity::ambiguous, Ambiguity::out_of_scope};

// Label carried by every out-of-scope record.
inline constexpr std::string_view kOutOfScopeLabel = "__oos__";

inline std::string_view to_string(Ambiguity a) {
  switch (a) {
    case Ambiguity::indicative: return "indicative";
    case Ambiguity::ambiguous: return "ambiguous";
    case Ambiguity::out_of_scope: return "out_of_scope";
  }
  return "";
}

inline std::optional<Ambiguity> parse_ambiguity(std::string_view s) {
  for (Ambiguity a : kAllAmbiguities)
    if (to_string(a) == s) return a;
  return std::nullopt;
}

struct FileNameRecord {
  std::string file_name;
  std::string label;
  Ambiguity ambiguity = Ambiguity::indicative;

  bool in_scope() const { return ambiguity != Ambiguity::out_of_scope; }

  friend bool operator==(const FileNameRecord&, const FileNameRecord&) = default;
};

// A labeled collection of file names. `categories` fixes the class-index
// mapping used by every model trained on this data.
struct Dataset {
  std::vector<FileNameRecord> records;
  std::vector<std::string> categories;

  // Validates the records and derives `categories` as the sorted distinct
  // in-scope labels. Out-of-scope labels are rewritten to kOutOfScopeLabel.
  static Dataset from_records(std::vector<FileNameRecord> records) {
    std::set<std::string> labels;
    for (std::size_t i = 0; i < records.size(); ++i) {
      auto& r = records[i];
      if (r.file_name.empty())
        throw DataError("record " + std::to_string(i) + ": empty file_name");
      if (!r.in_scope()) {
        r.label = kOutOfScopeLabel;
        continue;
      }
      if (r.label.empty() || r.label == kOutOfScopeLabel)
        throw DataError("record " + std::to_string(i) + ": in-scope record needs a category label");
      labels.insert(r.label);
    }
    return Dataset{std::move(records), {labels.begin(), labels.end()}};
  }

  std::optional<std::size_t> category_index(std::string_view label) const {
    auto it = std::lower_bound(categories.begin(), categories.end(), label);
    if (it == categories.end() || *it != label) return std::nullopt;
    return static_cast<std::size_t>(it - categories.begin());
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

enum class DatasetFormat { csv, jsonl };

inline DatasetFormat format_from_path(std::string_view path) {
  auto ends_with = [&](std::string_view suf) {
    return path.size() >= suf.size() && path.substr(path.size() - suf.size()) == suf;
  };
  return ends_with(".jsonl") || ends_with(".ndjson") ? DatasetFormat::jsonl : DatasetFormat::csv;
}

namespace detail {

// RFC 4180 record splitter. Returns false at end of input.
inline bool read_csv_row(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  int c;
  while ((c = in.get()) != EOF) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(static_cast<char>(c));
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get();
      break;
    } else if (c == '\n') {
      break;
    } else {
      field.push_back(static_cast<char>(c));
    }
  }
  if (!any) return false;
  ++line_no;
  if (in_quotes) throw DataError("line " + std::to_string(line_no) + ": unterminated quoted field");
  fields.push_back(std::move(field));
  return true;
}

inline std::string csv_quote(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline FileNameRecord make_record(std::size_t row, std::string file_name, std::string label,
                                  std::string_view ambiguity) {
  auto where = [&] { return "row " + std::to_string(row); };
  if (file_name.empty()) throw DataError(where() + ": field 'file_name' is empty");
  auto amb = parse_ambiguity(ambiguity);
  if (!amb)
    throw DataError(where() + ": field 'ambiguity' has unknown value '" + std::string(ambiguity) + "'");
  if (*amb != Ambiguity::out_of_scope && label.empty())
    throw DataError(where() + ": field 'label' is empty");
  return {std::move(file_name), std::move(label), *amb};
}

inline std::vector<FileNameRecord> parse_csv(std::istream& in) {
  std::vector<std::string> fields;
  std::size_t line_no = 0;
  if (!read_csv_row(in, fields, line_no)) throw DataError("no records");
  if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);

  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < fields.size(); ++i) column[fields[i]] = i;
  for (const char* name : {"file_name", "label", "ambiguity"})
    if (!column.count(name)) throw DataError(std::string("header is missing column '") + name + "'");
  const std::size_t fc = column["file_name"], lc = column["label"], ac = column["ambiguity"];

  std::vector<FileNameRecord> out;
  std::size_t row = 0;
  while (read_csv_row(in, fields, line_no)) {
    ++row;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    auto need = [&](std::size_t col, const char* name) -> std::string& {
      if (col >= fields.size())
        throw DataError("row " + std::to_string(row) + ": missing field '" + name + "'");
      return fields[col];
    };
    std::string& f = need(fc, "file_name");
    std::string& l = need(lc, "label");
    std::string& a = need(ac, "ambiguity");
    out.push_back(make_record(row, std::move(f), std::move(l), a));
  }
  return out;
}

inline std::vector<FileNameRecord> parse_jsonl(std::istream& in) {
  std::vector<FileNameRecord> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("row " + std::to_string(row) + ": invalid JSON (" + e.what() + ")");
    }
    auto field = [&](const char* name) -> std::string {
      if (!j.is_object() || !j.contains(name))
        throw DataError("row " + std::to_string(row) + ": missing field '" + name + "'");
      if (j[name].is_null() && std::string_view(name) == "label") return {};
      if (!j[name].is_string())
        throw DataError("row " + std::to_string(row) + ": field '" + name + "' is not a string");
      return j[name].get<std::string>();
    };
    out.push_back(make_record(row, field("file_name"), field("label"), field("ambiguity")));
  }
  return out;
}

}  // namespace detail

inline Dataset read_dataset(std::istream& in, DatasetFormat format) {
  auto records = format == DatasetFormat::csv ? detail::parse_csv(in) : detail::parse_jsonl(in);
  if (records.empty()) throw DataError("no records");
  return Dataset::from_records(std::move(records));
}

inline Dataset load_dataset(const std::string& path, DatasetFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  try {
    return read_dataset(in, format);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

inline Dataset load_dataset(const std::string& path) { return load_dataset(path, format_from_path(path)); }

inline void write_dataset(std::ostream& out, const Dataset& ds, DatasetFormat format) {
  if (format == DatasetFormat::csv) {
    out << "file_name,label,ambiguity\n";
    for (const auto& r : ds.records)
      out << detail::csv_quote(r.file_name) << ',' << detail::csv_quote(r.label) << ','
          << to_string(r.ambiguity) << '\n';
    return;
  }
  for (const auto& r : ds.records) {
    nlohmann::json j = {{"file_name", r.file_name}, {"label", r.label},
                        {"ambiguity", std::string(to_string(r.ambiguity))}};
    out << j.dump() << '\n';
  }
}

inline void save_dataset(const Dataset& ds, const std::string& path, DatasetFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset '" + path + "'");
  write_dataset(out, ds, format);
}

inline void save_dataset(const Dataset& ds, const std::string& path) { save_dataset(ds, path, format_from_path(path)); }

inline Dataset filter_by_ambiguity(const Dataset& ds, std::initializer_list<Ambiguity> kinds) {
  Dataset out{{}, ds.categories};
  for (const auto& r : ds.records)
    if (std::find(kinds.begin(), kinds.end(), r.ambiguity) != kinds.end()) out.records.push_back(r);
  return out;
}

inline Dataset filter_by_ambiguity(const Dataset& ds, const std::set<Ambiguity>& kinds) {
  Dataset out{{}, ds.categories};
  for (const auto& r : ds.records)
    if (kinds.count(r.ambiguity)) out.records.push_back(r);
  return out;
}

// Fold assignment for k-fold cross validation, one entry per record.
struct CvSplit {
  std::size_t fold_count = 0;
  std::vector<std::size_t> assignments;

  std::vector<std::size_t> test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] == fold) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] != fold) out.push_back(i);
    return out;
  }

  friend bool operator==(const CvSplit&, const CvSplit&) = default;
};

// Stratified by label. Within a label, indicative records are dealt first and
// ambiguous ones continue the same round-robin, so both the per-label and the
// per-(label, ambiguity) fold sizes differ by at most one.
inline CvSplit stratified_kfold(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("fold count must be at least 2, got " + std::to_string(k));

  std::map<std::string, std::array<std::vector<std::size_t>, 3>> strata;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    strata[r.label][static_cast<std::size_t>(r.ambiguity)].push_back(i);
  }
  for (const auto& c : ds.categories) {
    auto it = strata.find(c);
    std::size_t n = it == strata.end() ? 0 : it->second[0].size();
    if (n < k)
      throw DataError("category '" + c + "' has " + std::to_string(n) +
                      " indicative records, fewer than the fold count " + std::to_string(k));
  }

  std::mt19937_64 rng(seed);
  CvSplit split{k, std::vector<std::size_t>(ds.records.size(), 0)};
  for (auto& [label, groups] : strata) {
    std::size_t next = 0;
    for (auto& group : groups) {
      std::shuffle(group.begin(), group.end(), rng);
      for (std::size_t idx : group) split.assignments[idx] = next++ % k;
    }
  }
  return split;
}

inline Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices) {
  Dataset out{{}, ds.categories};
  out.records.reserve(indices.size());
  for (std::size_t i : indices) out.records.push_back(ds.records.at(i));
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic fixtures

namespace detail {

inline constexpr std::array<std::string_view, 24> kSurnames = {
    "smith", "johnson", "garcia", "miller", "davis", "lopez", "wilson", "anderson",
    "thomas", "taylor", "moore", "jackson", "martin", "lee", "perez", "thompson",
    "white", "harris", "clark", "lewis", "walker", "hall", "young", "king"};

inline constexpr std::array<std::string_view, 16> kFiller = {
    "final", "draft", "v2", "updated", "copy", "new", "official", "public",
    "county", "city", "school", "dept", "annual", "spring", "fall", "board"};

inline constexpr std::array<std::string_view, 12> kMonths = {
    "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};

inline std::vector<std::string> split_label(std::string_view label) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : label) {
    if (c == '_' || c == '-' || c == ' ') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

inline std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

template <class Container>
std::string_view pick(const Container& c, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, c.size() - 1);
  return c[d(rng)];
}

inline std::string pick_year(std::mt19937_64& rng) {
  return std::to_string(std::uniform_int_distribution<int>(2005, 2024)(rng));
}

}  // namespace detail

// Indicative file names built from each category's own words mixed with
// names, dates and filler, in snake_case, kebab-case, CamelCase, glued and
// percent-encoded styles.
inline Dataset synth_fixture(const std::vector<std::string>& categories, int per_class, std::uint64_t seed) {
  if (per_class < 1) throw std::invalid_argument("per_class must be at least 1");
  using namespace detail;
  std::mt19937_64 rng(seed);
  std::vector<FileNameRecord> records;
  for (const auto& cat : categories) {
    const auto words = split_label(cat);
    for (int i = 0; i < per_class; ++i) {
      std::vector<std::string> parts;
      int shape = std::uniform_int_distribution<int>(0, 3)(rng);
      if (shape == 0 || shape == 3) parts.emplace_back(pick(kSurnames, rng));
      if (shape == 1) parts.emplace_back(pick(kFiller, rng));
      parts.insert(parts.end(), words.begin(), words.end());
      if (shape != 3) parts.emplace_back(pick_year(rng));
      if (shape == 2) parts.emplace_back(pick(kMonths, rng));

      std::string name;
      switch (std::uniform_int_distribution<int>(0, 5)(rng)) {
        case 0:  // snake_case
          for (std::size_t p = 0; p < parts.size(); ++p) name += (p ? "_" : "") + parts[p];
          break;
        case 1:  // kebab-case
          for (std::size_t p = 0; p < parts.size(); ++p) name += (p ? "-" : "") + parts[p];
          break;
        case 2:  // CamelCase
          for (const auto& p : parts) name += capitalize(p);
          break;
        case 3:  // glued lowercase, digits glued on
          for (const auto& p : parts) name += p;
          break;
        case 4:  // percent-encoded spaces
          for (std::size_t p = 0; p < parts.size(); ++p) name += (p ? "%20" : "") + capitalize(parts[p]);
          break;
        default:  // Mixed: CamelCase words, underscore before digits
          for (const auto& p : parts) {
            if (!p.empty() && p[0] >= '0' && p[0] <= '9') name += "_";
            name += capitalize(p);
          }
          break;
      }
      records.push_back({name + ".pdf", cat, Ambiguity::indicative});
    }
  }
  return Dataset::from_records(std::move(records));
}

// Ambiguous names (hashes, dates, scan ids) carrying randomly chosen
// in-scope labels.
inline std::vector<FileNameRecord> synth_ambiguous(const std::vector<std::string>& categories, int count,
                                                   std::uint64_t seed) {
  if (categories.empty() || count < 0) throw std::invalid_argument("synth_ambiguous: bad arguments");
  using namespace detail;
  std::mt19937_64 rng(seed);
  std::vector<FileNameRecord> out;
  static constexpr std::string_view hex = "0123456789abcdef";
  for (int i = 0; i < count; ++i) {
    std::string name;
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
      case 0:
        for (int j = 0; j < 32; ++j) name.push_back(hex[std::uniform_int_distribution<int>(0, 15)(rng)]);
        break;
      case 1:
        name = std::to_string(std::uniform_int_distribution<int>(10000000, 12312099)(rng)) + "-" +
               std::string(pick(kMonths, rng));
        break;
      case 2:
        name = "scan_" + std::to_string(std::uniform_int_distribution<int>(1, 9999)(rng));
        break;
      default:
        name = "document" + std::to_string(std::uniform_int_distribution<int>(1, 99)(rng));
        break;
    }
    out.push_back({name + ".pdf", std::string(pick(categories, rng)), Ambiguity::ambiguous});
  }
  return out;
}

inline std::vector<FileNameRecord> synth_out_of_scope(int count, std::uint64_t seed) {
  using namespace detail;
  static constexpr std::array<std::string_view, 10> kTopics = {
      "privacy_notice", "balance_sheet", "invoice", "brochure", "receipt",
      "annual_report", "catalogue", "certificate", "poster", "thesis"};
  std::mt19937_64 rng(seed);
  std::vector<FileNameRecord> out;
  for (int i = 0; i < count; ++i) {
    std::string name;
    for (const auto& w : split_label(pick(kTopics, rng))) name += capitalize(w);
    name += "_" + pick_year(rng);
    out.push_back({name + ".pdf", std::string(kOutOfScopeLabel), Ambiguity::out_of_scope});
  }
  return out;
}

}  // namespace fntriage
