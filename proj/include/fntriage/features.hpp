#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fntriage/tokenizer.hpp"

namespace fntriage {

// Dense token -> index mapping; indices follow sorted token order.
class Vocabulary {
 public:
  Vocabulary() = default;

  // `tokens` must be sorted and distinct.
  explicit Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (!std::is_sorted(tokens_.begin(), tokens_.end()) ||
        std::adjacent_find(tokens_.begin(), tokens_.end()) != tokens_.end())
      throw std::invalid_argument("vocabulary tokens must be sorted and distinct");
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], static_cast<std::uint32_t>(i));
  }

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(std::size_t i) const { return tokens_.at(i); }

  const std::uint32_t* find(std::string_view tok) const {
    auto it = index_.find(std::string(tok));
    return it == index_.end() ? nullptr : &it->second;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Sparse bag-of-words counts, sorted by vocabulary index.
struct FeatureVector {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;  // (index, count >= 1)
  std::size_t dropped = 0;                                       // out-of-vocabulary tokens seen

  std::uint32_t count(std::uint32_t index) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), index,
                               [](const auto& e, std::uint32_t i) { return e.first < i; });
    return it != entries.end() && it->first == index ? it->second : 0;
  }

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.second;
    return n;
  }

  bool empty() const { return entries.empty(); }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline Vocabulary build_vocab(const std::vector<TokenSequence>& train_tokens) {
  if (train_tokens.empty()) throw std::invalid_argument("build_vocab: empty training set");
  std::set<std::string> distinct;
  for (const auto& seq : train_tokens) distinct.insert(seq.tokens.begin(), seq.tokens.end());
  return Vocabulary({distinct.begin(), distinct.end()});
}

// Counts in-vocabulary tokens; with `binary` every present token counts once.
inline FeatureVector encode(const Vocabulary& vocab, const TokenSequence& seq, bool binary = false) {
  FeatureVector fv;
  std::vector<std::uint32_t> hits;
  hits.reserve(seq.tokens.size());
  for (const auto& tok : seq.tokens) {
    if (const auto* idx = vocab.find(tok))
      hits.push_back(*idx);
    else
      ++fv.dropped;
  }
  std::sort(hits.begin(), hits.end());
  for (std::uint32_t idx : hits) {
    if (!fv.entries.empty() && fv.entries.back().first == idx) {
      if (!binary) ++fv.entries.back().second;
    } else {
      fv.entries.emplace_back(idx, 1);
    }
  }
  return fv;
}

}  // namespace fntriage
