#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "fntriage/error.hpp"
#include "fntriage/features.hpp"
#include "fntriage/prediction.hpp"

namespace fntriage {

// Binary CART tree over sparse count features. Node i is internal when
// feature[i] >= 0: samples with count <= threshold[i] go to left[i].
// Leaves carry the (bootstrap-weighted) class counts of their samples.
struct DecisionTree {
  std::vector<std::int32_t> feature;
  std::vector<double> threshold;
  std::vector<std::uint32_t> left;
  std::vector<std::uint32_t> right;
  std::vector<std::int32_t> leaf;            // row into leaf_counts, -1 for internal nodes
  std::vector<std::uint32_t> leaf_counts;    // row-major [leaf][class]
  std::size_t class_count = 0;

  std::size_t node_count() const { return feature.size(); }
  std::size_t leaf_count() const { return class_count ? leaf_counts.size() / class_count : 0; }

  std::size_t find_leaf(const FeatureVector& fv) const {
    std::size_t node = 0;
    while (feature[node] >= 0) {
      const auto value = fv.count(static_cast<std::uint32_t>(feature[node]));
      node = value <= threshold[node] ? left[node] : right[node];
    }
    return static_cast<std::size_t>(leaf[node]);
  }

  // Normalized class distribution of the leaf reached by fv.
  std::vector<double> distribution(const FeatureVector& fv) const {
    const std::size_t row = find_leaf(fv);
    std::vector<double> out(class_count);
    double total = 0.0;
    for (std::size_t c = 0; c < class_count; ++c) total += leaf_counts[row * class_count + c];
    for (std::size_t c = 0; c < class_count; ++c) out[c] = leaf_counts[row * class_count + c] / total;
    return out;
  }

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct RandomForestModel {
  Vocabulary vocab;
  std::vector<std::string> categories;
  std::uint64_t seed = 0;
  std::vector<DecisionTree> trees;

  std::size_t tree_count() const { return trees.size(); }
};

struct ForestOptions {
  std::size_t tree_count = 100;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency
};

// Independent RNG stream per (seed, tree) so that tree order and worker count
// never influence the result.
inline std::mt19937_64 tree_rng(std::uint64_t seed, std::size_t tree_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tree_index), static_cast<std::uint32_t>(tree_index >> 32)};
  return std::mt19937_64(seq);
}

// Multiplicity of each sample in an n-draw bootstrap.
inline std::vector<std::uint32_t> bootstrap_weights(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::uint32_t> w(n, 0);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t i = 0; i < n; ++i) ++w[pick(rng)];
  return w;
}

inline std::vector<std::uint32_t> bootstrap_weights(std::size_t n, std::uint64_t seed, std::size_t tree_index) {
  auto rng = tree_rng(seed, tree_index);
  return bootstrap_weights(n, rng);
}

namespace detail {

inline std::size_t isqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

class TreeBuilder {
 public:
  TreeBuilder(std::span<const LabeledVector> samples, std::size_t n_features, std::size_t n_classes,
              std::mt19937_64& rng)
      : samples_(samples),
        n_classes_(n_classes),
        max_features_(std::max<std::size_t>(1, isqrt(n_features))),
        rng_(rng) {}

  DecisionTree build(const std::vector<std::uint32_t>& weights) {
    weights_ = &weights;
    tree_ = DecisionTree{};
    tree_.class_count = n_classes_;

    std::vector<std::uint32_t> root;
    for (std::uint32_t i = 0; i < weights.size(); ++i)
      if (weights[i] > 0) root.push_back(i);

    struct Pending {
      std::uint32_t node;
      std::vector<std::uint32_t> members;
    };
    std::vector<Pending> stack;
    stack.push_back({new_node(), std::move(root)});
    while (!stack.empty()) {
      Pending p = std::move(stack.back());
      stack.pop_back();
      auto split = find_split(p.members);
      if (!split) {
        make_leaf(p.node, p.members);
        continue;
      }
      std::vector<std::uint32_t> lo, hi;
      for (auto s : p.members)
        (samples_[s].features.count(split->feature) <= split->threshold ? lo : hi).push_back(s);
      const std::uint32_t l = new_node();
      const std::uint32_t r = new_node();
      tree_.feature[p.node] = static_cast<std::int32_t>(split->feature);
      tree_.threshold[p.node] = split->threshold;
      tree_.left[p.node] = l;
      tree_.right[p.node] = r;
      // Right pushed first so the left subtree is numbered first.
      stack.push_back({r, std::move(hi)});
      stack.push_back({l, std::move(lo)});
    }
    return std::move(tree_);
  }

 private:
  struct Split {
    std::uint32_t feature;
    double threshold;
  };

  std::uint32_t new_node() {
    tree_.feature.push_back(-1);
    tree_.threshold.push_back(0.0);
    tree_.left.push_back(0);
    tree_.right.push_back(0);
    tree_.leaf.push_back(-1);
    return static_cast<std::uint32_t>(tree_.feature.size() - 1);
  }

  void make_leaf(std::uint32_t node, const std::vector<std::uint32_t>& members) {
    tree_.leaf[node] = static_cast<std::int32_t>(tree_.leaf_count());
    std::vector<std::uint32_t> counts(n_classes_, 0);
    for (auto s : members) counts[samples_[s].label] += (*weights_)[s];
    tree_.leaf_counts.insert(tree_.leaf_counts.end(), counts.begin(), counts.end());
  }

  static double gini_proxy(const std::vector<double>& counts, double total) {
    if (total <= 0.0) return 0.0;
    double sq = 0.0;
    for (double c : counts) sq += c * c;
    return sq / total;
  }

  std::optional<Split> find_split(const std::vector<std::uint32_t>& members) {
    if (members.size() < 2) return std::nullopt;

    std::vector<double> node_counts(n_classes_, 0.0);
    double node_weight = 0.0;
    for (auto s : members) {
      node_counts[samples_[s].label] += (*weights_)[s];
      node_weight += (*weights_)[s];
    }
    if (std::count_if(node_counts.begin(), node_counts.end(), [](double c) { return c > 0.0; }) <= 1)
      return std::nullopt;

    // (feature, value, sample) for every nonzero entry of the node's samples.
    entries_.clear();
    for (auto s : members)
      for (auto [f, v] : samples_[s].features.entries) entries_.emplace_back(f, v, s);
    std::sort(entries_.begin(), entries_.end());

    // Non-constant features and the extent of their entries.
    struct Range {
      std::uint32_t feature;
      std::size_t begin, end;
    };
    std::vector<Range> candidates;
    for (std::size_t i = 0; i < entries_.size();) {
      std::size_t j = i;
      while (j < entries_.size() && std::get<0>(entries_[j]) == std::get<0>(entries_[i])) ++j;
      const bool has_zero = (j - i) < members.size();
      const bool varies = std::get<1>(entries_[i]) != std::get<1>(entries_[j - 1]);
      if (has_zero || varies) candidates.push_back({std::get<0>(entries_[i]), i, j});
      i = j;
    }
    if (candidates.empty()) return std::nullopt;

    // Uniform sample of max_features non-constant features (constant ones are
    // skipped without counting against the budget).
    const std::size_t draw = std::min(max_features_, candidates.size());
    for (std::size_t i = 0; i < draw; ++i) {
      std::uniform_int_distribution<std::size_t> d(i, candidates.size() - 1);
      std::swap(candidates[i], candidates[d(rng_)]);
    }

    std::optional<Split> best;
    double best_proxy = -1.0;
    std::vector<double> left(n_classes_), right(n_classes_);
    for (std::size_t ci = 0; ci < draw; ++ci) {
      const Range& r = candidates[ci];
      // Class weights of samples with a zero count form the lowest bucket.
      std::vector<double> zero(node_counts);
      double zero_weight = node_weight;
      for (std::size_t e = r.begin; e < r.end; ++e) {
        const auto s = std::get<2>(entries_[e]);
        zero[samples_[s].label] -= (*weights_)[s];
        zero_weight -= (*weights_)[s];
      }
      std::fill(left.begin(), left.end(), 0.0);
      double left_weight = 0.0;
      double prev_value = 0.0;
      bool have_prev = false;
      if (r.end - r.begin < members.size()) {
        left = zero;
        left_weight = zero_weight;
        have_prev = true;
      }
      for (std::size_t e = r.begin; e < r.end;) {
        const auto value = std::get<1>(entries_[e]);
        if (have_prev) {
          for (std::size_t c = 0; c < n_classes_; ++c) right[c] = node_counts[c] - left[c];
          const double proxy = gini_proxy(left, left_weight) + gini_proxy(right, node_weight - left_weight);
          if (proxy > best_proxy) {
            best_proxy = proxy;
            best = Split{r.feature, prev_value + (value - prev_value) / 2.0};
          }
        }
        for (; e < r.end && std::get<1>(entries_[e]) == value; ++e) {
          const auto s = std::get<2>(entries_[e]);
          left[samples_[s].label] += (*weights_)[s];
          left_weight += (*weights_)[s];
        }
        prev_value = value;
        have_prev = true;
      }
    }
    return best;
  }

  std::span<const LabeledVector> samples_;
  std::size_t n_classes_;
  std::size_t max_features_;
  std::mt19937_64& rng_;
  const std::vector<std::uint32_t>* weights_ = nullptr;
  DecisionTree tree_;
  std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> entries_;
};

inline bool canonical_less(const LabeledVector& a, const LabeledVector& b) {
  if (a.label != b.label) return a.label < b.label;
  return a.features.entries < b.features.entries;
}

}  // namespace detail

// Bagged CART ensemble: Gini impurity, floor(sqrt(V)) candidate features per
// split, unlimited depth, min_samples_split = 2.
inline RandomForestModel train_rf(std::span<const LabeledVector> train, Vocabulary vocab,
                                  std::vector<std::string> categories, const ForestOptions& opts = {}) {
  if (train.empty()) throw DataError("train_rf: empty training set");
  if (opts.tree_count < 1) throw std::invalid_argument("train_rf: tree_count must be >= 1");
  if (categories.empty()) throw std::invalid_argument("train_rf: no categories");
  for (const auto& s : train)
    if (s.label >= categories.size()) throw std::invalid_argument("train_rf: label out of range");

  // Canonical order makes the model independent of input order.
  std::vector<LabeledVector> samples(train.begin(), train.end());
  std::stable_sort(samples.begin(), samples.end(), detail::canonical_less);

  RandomForestModel model{std::move(vocab), std::move(categories), opts.seed, {}};
  model.trees.resize(opts.tree_count);
  const std::size_t n_features = std::max<std::size_t>(1, model.vocab.size());
  const std::size_t n_classes = model.categories.size();

  auto grow = [&](std::size_t t) {
    auto rng = tree_rng(opts.seed, t);
    auto weights = bootstrap_weights(samples.size(), rng);
    detail::TreeBuilder builder(samples, n_features, n_classes, rng);
    model.trees[t] = builder.build(weights);
  };

  unsigned workers = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, opts.tree_count));
  if (workers <= 1) {
    for (std::size_t t = 0; t < opts.tree_count; ++t) grow(t);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < opts.tree_count; t += workers) grow(t);
      });
  }
  return model;
}

// Per-tree leaf distributions averaged over the ensemble.
inline Prediction predict_rf(const RandomForestModel& m, const FeatureVector& fv) {
  const std::size_t n_classes = m.categories.size();
  std::vector<double> scores(n_classes, 0.0);
  std::vector<double> row(n_classes);
  for (const auto& tree : m.trees) {
    const std::size_t leaf = tree.find_leaf(fv);
    const auto* counts = &tree.leaf_counts[leaf * n_classes];
    double total = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) total += counts[c];
    for (std::size_t c = 0; c < n_classes; ++c) scores[c] += counts[c] / total;
  }
  const double n = static_cast<double>(m.trees.size());
  for (double& s : scores) s /= n;
  return Prediction::from_scores(std::move(scores));
}

}  // namespace fntriage
