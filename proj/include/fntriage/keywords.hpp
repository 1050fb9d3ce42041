#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fntriage/dataset.hpp"
#include "fntriage/error.hpp"
#include "fntriage/tokenizer.hpp"
#include "fntriage/trie.hpp"

namespace fntriage {

// How inverse document frequency is computed over category "documents".
enum class IdfFormula {
  plain,     // ln(C / df)
  smoothed,  // ln(1 + C / df)
};

inline std::string_view to_string(IdfFormula f) { return f == IdfFormula::plain ? "plain" : "smoothed"; }

inline IdfFormula parse_idf_formula(std::string_view s) {
  if (s == "plain") return IdfFormula::plain;
  if (s == "smoothed") return IdfFormula::smoothed;
  throw std::invalid_argument("unknown idf formula '" + std::string(s) + "'");
}

// Keywords shorter than this never enter the trie.
inline constexpr std::size_t kMinKeywordLength = 2;

// TF-IDF where each category's pooled token bag is one document:
// tf(t,c) = count(t,c) / total(c), idf(t) = ln(C / df(t)), score = tf * idf.
struct TfidfTable {
  IdfFormula formula = IdfFormula::plain;
  std::size_t category_count = 0;
  std::vector<std::size_t> category_token_totals;
  std::map<std::string, std::vector<std::size_t>> counts;  // token -> per-category count
  std::map<std::string, std::size_t> doc_freq;

  double idf(std::string_view token) const {
    auto it = doc_freq.find(std::string(token));
    if (it == doc_freq.end()) return 0.0;
    const double ratio = static_cast<double>(category_count) / static_cast<double>(it->second);
    return formula == IdfFormula::plain ? std::log(ratio) : std::log1p(ratio);
  }

  double score(std::string_view token, std::size_t category) const {
    auto it = counts.find(std::string(token));
    if (it == counts.end() || it->second[category] == 0) return 0.0;
    const double tf =
        static_cast<double>(it->second[category]) / static_cast<double>(category_token_totals[category]);
    return tf * idf(token);
  }

  double max_score(std::string_view token) const {
    double best = 0.0;
    for (std::size_t c = 0; c < category_count; ++c) best = std::max(best, score(token, c));
    return best;
  }
};

// Builds the table from one token bag per category.
inline TfidfTable compute_tfidf(const std::vector<std::vector<std::string>>& bags,
                                IdfFormula formula = IdfFormula::plain) {
  if (bags.empty()) throw std::invalid_argument("compute_tfidf: no categories");
  TfidfTable t;
  t.formula = formula;
  t.category_count = bags.size();
  t.category_token_totals.assign(bags.size(), 0);
  for (std::size_t c = 0; c < bags.size(); ++c) {
    if (bags[c].empty()) throw DataError("compute_tfidf: category " + std::to_string(c) + " has no tokens");
    for (const auto& tok : bags[c]) {
      auto& row = t.counts[tok];
      if (row.empty()) row.assign(bags.size(), 0);
      ++row[c];
      ++t.category_token_totals[c];
    }
  }
  for (const auto& [tok, row] : t.counts)
    t.doc_freq[tok] = static_cast<std::size_t>(std::count_if(row.begin(), row.end(), [](auto n) { return n > 0; }));
  return t;
}

// Token bags come from universal_tokenize followed by lemmatize.
inline TfidfTable compute_tfidf(const Dataset& train, IdfFormula formula = IdfFormula::plain) {
  if (train.records.empty()) throw DataError("compute_tfidf: empty training set");
  std::vector<std::vector<std::string>> bags(train.categories.size());
  for (const auto& r : train.records) {
    auto idx = train.category_index(r.label);
    if (!r.in_scope() || !idx) throw DataError("compute_tfidf: training record '" + r.file_name + "' is not in scope");
    for (auto& tok : lemmatize(universal_tokenize(r.file_name)).tokens) bags[*idx].push_back(std::move(tok));
  }
  for (std::size_t c = 0; c < bags.size(); ++c)
    if (bags[c].empty()) throw DataError("compute_tfidf: category '" + train.categories[c] + "' has no records");
  return compute_tfidf(bags, formula);
}

class KeywordIndex {
 public:
  KeywordIndex() = default;

  KeywordIndex(double k, IdfFormula formula, std::vector<std::string> keywords)
      : k_(k), formula_(formula), keywords_(std::move(keywords)) {
    std::sort(keywords_.begin(), keywords_.end());
    keywords_.erase(std::unique(keywords_.begin(), keywords_.end()), keywords_.end());
    std::erase_if(keywords_, [](const std::string& w) { return w.size() < kMinKeywordLength; });
    for (const auto& w : keywords_) trie_.insert(w);
  }

  double k() const { return k_; }
  IdfFormula formula() const { return formula_; }
  const std::vector<std::string>& keywords() const { return keywords_; }
  const Trie& trie() const { return trie_; }
  bool empty() const { return keywords_.empty(); }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["k"] = std::isfinite(k_) ? nlohmann::json(k_) : nlohmann::json(nullptr);
    j["formula"] = std::string(to_string(formula_));
    j["keywords"] = keywords_;
    return j;
  }

  static KeywordIndex from_json(const nlohmann::json& j) {
    const double k = j.at("k").is_null() ? std::numeric_limits<double>::infinity() : j.at("k").get<double>();
    return {k, parse_idf_formula(j.at("formula").get<std::string>()),
            j.at("keywords").get<std::vector<std::string>>()};
  }

 private:
  double k_ = std::numeric_limits<double>::infinity();
  IdfFormula formula_ = IdfFormula::plain;
  std::vector<std::string> keywords_;
  Trie trie_;
};

// Keywords are the tokens whose best per-category score exceeds k.
inline KeywordIndex extract_keywords(const TfidfTable& table, double k) {
  if (!(k >= 0.0)) throw std::invalid_argument("keyword threshold k must be >= 0");
  std::vector<std::string> words;
  for (const auto& [tok, row] : table.counts)
    if (table.max_score(tok) > k) words.push_back(tok);
  return {k, table.formula, std::move(words)};
}

// Greedy left-to-right longest-keyword match. Bytes that start no keyword
// collect into a residue segment, so the output always concatenates back to
// the input.
inline std::vector<std::string> trie_segment(const KeywordIndex& index, std::string_view token) {
  std::vector<std::string> out;
  if (index.empty()) {
    if (!token.empty()) out.emplace_back(token);
    return out;
  }
  std::string residue;
  std::size_t i = 0;
  while (i < token.size()) {
    const std::size_t len = index.trie().longest_prefix(token, i);
    if (len == 0) {
      residue.push_back(token[i++]);
      continue;
    }
    if (!residue.empty()) out.push_back(std::move(residue));
    residue.clear();
    out.emplace_back(token.substr(i, len));
    i += len;
  }
  if (!residue.empty()) out.push_back(std::move(residue));
  return out;
}

// universal_tokenize, then trie_segment on every token, then lemmatize.
inline TokenSequence tokenize_full(const KeywordIndex& index, std::string_view name) {
  TokenSequence base = universal_tokenize(name);
  TokenSequence out{{}, std::move(base.source)};
  out.tokens.reserve(base.tokens.size());
  for (const auto& tok : base.tokens)
    for (auto& piece : trie_segment(index, tok)) out.tokens.push_back(lemmatize(piece));
  return out;
}

inline void save_keywords(const KeywordIndex& index, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write keyword index '" + path + "'");
  out << index.to_json().dump(2) << '\n';
}

inline KeywordIndex load_keywords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open keyword index '" + path + "'");
  try {
    return KeywordIndex::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": invalid keyword index (" + e.what() + ")");
  }
}

}  // namespace fntriage
