#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fntriage {

// Byte-wise prefix tree answering longest-prefix queries.
class Trie {
 public:
  Trie() : nodes_(1) {}

  void insert(std::string_view word) {
    if (word.empty()) return;
    std::uint32_t cur = 0;
    for (char c : word) {
      std::uint32_t next = child(cur, c);
      if (next == kNone) {
        next = static_cast<std::uint32_t>(nodes_.size());
        auto& kids = nodes_[cur].children;
        kids.insert(std::lower_bound(kids.begin(), kids.end(), std::make_pair(c, std::uint32_t{0})),
                    {c, next});
        nodes_.emplace_back();
      }
      cur = next;
    }
    if (!nodes_[cur].terminal) ++size_;
    nodes_[cur].terminal = true;
  }

  bool contains(std::string_view word) const {
    if (word.empty()) return false;
    std::uint32_t cur = 0;
    for (char c : word) {
      cur = child(cur, c);
      if (cur == kNone) return false;
    }
    return nodes_[cur].terminal;
  }

  // Length of the longest stored word that is a prefix of text.substr(pos);
  // 0 when none is.
  std::size_t longest_prefix(std::string_view text, std::size_t pos = 0) const {
    std::uint32_t cur = 0;
    std::size_t best = 0;
    for (std::size_t i = pos; i < text.size(); ++i) {
      cur = child(cur, text[i]);
      if (cur == kNone) break;
      if (nodes_[cur].terminal) best = i - pos + 1;
    }
    return best;
  }

  // Every stored word, in lexicographic byte order.
  std::vector<std::string> words() const {
    std::vector<std::string> out;
    std::string buf;
    collect(0, buf, out);
    return out;
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

 private:
  static constexpr std::uint32_t kNone = ~std::uint32_t{0};

  struct Node {
    std::vector<std::pair<char, std::uint32_t>> children;  // sorted by char
    bool terminal = false;
  };

  std::uint32_t child(std::uint32_t node, char c) const {
    const auto& kids = nodes_[node].children;
    auto it = std::lower_bound(kids.begin(), kids.end(), c,
                               [](const auto& kid, char ch) { return kid.first < ch; });
    return it != kids.end() && it->first == c ? it->second : kNone;
  }

  void collect(std::uint32_t node, std::string& buf, std::vector<std::string>& out) const {
    if (nodes_[node].terminal) out.push_back(buf);
    for (const auto& [c, next] : nodes_[node].children) {
      buf.push_back(c);
      collect(next, buf, out);
      buf.pop_back();
    }
  }

  std::vector<Node> nodes_;
  std::size_t size_ = 0;
};

}  // namespace fntriage
