#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fntriage {

struct TokenSequence {
  std::vector<std::string> tokens;
  std::string source;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }

  std::string joined(char sep = ' ') const {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) out.push_back(sep);
      out += tokens[i];
    }
    return out;
  }
};

namespace ascii {

constexpr bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
constexpr bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
constexpr bool is_digit(char c) { return c >= '0' && c <= '9'; }
constexpr bool is_alpha(char c) { return is_lower(c) || is_upper(c); }
constexpr bool is_alnum(char c) { return is_alpha(c) || is_digit(c); }
constexpr char to_lower(char c) { return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c; }

constexpr int hex_value(char c) {
  if (is_digit(c)) return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace ascii

// Single left-to-right pass; decoded bytes are not rescanned, and a '%' not
// followed by two hex digits is copied through.
inline std::string decode_escapes(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (std::size_t i = 0; i < name.size(); ++i) {
    if (name[i] == '%' && i + 2 < name.size()) {
      int hi = ascii::hex_value(name[i + 1]);
      int lo = ascii::hex_value(name[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    out.push_back(name[i]);
  }
  return out;
}

// Splits on every non-[A-Za-z0-9] byte (dropped), on lower->upper
// transitions and on letter<->digit transitions, then lowercases.
inline TokenSequence universal_tokenize(std::string_view name) {
  const std::string text = decode_escapes(name);
  TokenSequence seq{{}, std::string(name)};
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) seq.tokens.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (!ascii::is_alnum(c)) {
      flush();
      continue;
    }
    if (!cur.empty()) {
      const char prev = text[i - 1];
      const bool camel = ascii::is_lower(prev) && ascii::is_upper(c);
      const bool digit_edge = ascii::is_digit(prev) != ascii::is_digit(c);
      if (camel || digit_edge) flush();
    }
    cur.push_back(ascii::to_lower(c));
  }
  flush();
  return seq;
}

namespace detail {

// Irregular and protected forms. Every value is a fixed point of lemmatize().
inline const std::unordered_map<std::string_view, std::string_view>& lemma_exceptions() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"syllabi", "syllabus"},   {"syllabuses", "syllabus"}, {"curricula", "curriculum"},
      {"criteria", "criterion"}, {"data", "data"},            {"media", "media"},
      {"analyses", "analysis"},  {"theses", "thesis"},        {"indices", "index"},
      {"appendices", "appendix"},{"matrices", "matrix"},      {"children", "child"},
      {"men", "man"},            {"women", "woman"},          {"people", "people"},
      {"feet", "foot"},          {"teeth", "tooth"},          {"mice", "mouse"},
      {"leaves", "leaf"},        {"lives", "life"},           {"wives", "wife"},
      {"knives", "knife"},       {"halves", "half"},          {"shelves", "shelf"},
      {"menus", "menu"},         {"minutes", "minutes"},      {"news", "news"},
      {"series", "series"},      {"species", "species"},      {"means", "means"},
      {"physics", "physics"},    {"mathematics", "mathematics"}, {"economics", "economics"},
      {"politics", "politics"},  {"ethics", "ethics"},        {"statistics", "statistic"},
      {"bus", "bus"},            {"buses", "bus"},            {"statuses", "status"},
      {"campuses", "campus"},    {"bonuses", "bonus"},        {"viruses", "virus"},
      {"houses", "house"},       {"courses", "course"},       {"purposes", "purpose"},
      {"cases", "case"},         {"releases", "release"},     {"licenses", "license"},
      {"expenses", "expense"},   {"responses", "response"},   {"classes", "class"},
      {"addresses", "address"},  {"businesses", "business"},  {"ties", "tie"},
      {"pies", "pie"},           {"movies", "movie"},         {"cookies", "cookie"},
      {"gas", "gas"},            {"has", "has"},              {"was", "was"},
      {"its", "its"},            {"this", "this"},            {"his", "his"},
      {"yes", "yes"},            {"always", "always"},        {"sales", "sale"},
  };
  return table;
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace detail

// Rule-based noun lemmatizer covering regular English plurals plus a small
// exception table. Tokens containing digits are returned unchanged.
inline std::string lemmatize(std::string_view token) {
  using detail::ends_with;
  if (token.empty() || std::any_of(token.begin(), token.end(), ascii::is_digit)) return std::string(token);

  const auto& table = detail::lemma_exceptions();
  if (auto it = table.find(token); it != table.end()) return std::string(it->second);
  if (token.size() <= 3) return std::string(token);

  std::string_view stem = token;
  if (ends_with(token, "ies") && token.size() > 4) return std::string(token.substr(0, token.size() - 3)) + "y";
  if (ends_with(token, "sses") || ends_with(token, "xes") || ends_with(token, "ches") ||
      ends_with(token, "shes") || ends_with(token, "zzes"))
    stem = token.substr(0, token.size() - 2);
  else if (ends_with(token, "ss") || ends_with(token, "us") || ends_with(token, "is"))
    return std::string(token);
  else if (ends_with(token, "s"))
    stem = token.substr(0, token.size() - 1);

  // The stripped form must be a fixed point ("criterias" -> "criteria" would
  // map on to "criterion").
  std::string out(stem);
  if (out != token && lemmatize(out) != out) return std::string(token);
  return out;
}

inline TokenSequence lemmatize(TokenSequence seq) {
  for (auto& t : seq.tokens) t = lemmatize(t);
  return seq;
}

}  // namespace fntriage
