#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fntriage/dataset.hpp"
#include "fntriage/features.hpp"
#include "fntriage/keywords.hpp"
#include "fntriage/naive_bayes.hpp"
#include "fntriage/prediction.hpp"
#include "fntriage/random_forest.hpp"

namespace fntriage {

enum class ModelKind { naive_bayes, random_forest };

inline std::string_view to_string(ModelKind k) { return k == ModelKind::naive_bayes ? "naive_bayes" : "random_forest"; }

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "nb" || s == "naive_bayes") return ModelKind::naive_bayes;
  if (s == "rf" || s == "random_forest") return ModelKind::random_forest;
  throw std::invalid_argument("unknown model type '" + std::string(s) + "' (expected nb or rf)");
}

struct TrainConfig {
  ModelKind kind = ModelKind::random_forest;
  double k = 0.2;
  IdfFormula formula = IdfFormula::plain;
  bool use_trie = true;  // false: universal tokenizer + lemmatizer only
  bool binary = false;   // presence instead of counts
  double alpha = 1.0;
  std::size_t tree_count = 100;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

using Model = std::variant<NaiveBayesModel, RandomForestModel>;

// End-to-end file-name classifier: keyword index, bag-of-words vocabulary and
// a trained model. Immutable after construction; classify() is thread-safe.
class Classifier {
 public:
  Classifier(KeywordIndex keywords, Model model, bool binary = false, std::optional<double> threshold = {})
      : keywords_(std::move(keywords)), model_(std::move(model)), binary_(binary), threshold_(threshold) {}

  TokenSequence tokenize(std::string_view name) const { return tokenize_full(keywords_, name); }

  FeatureVector features(std::string_view name) const { return encode(vocab(), tokenize(name), binary_); }

  Prediction predict(const FeatureVector& fv) const {
    return std::visit(
        [&](const auto& m) {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, NaiveBayesModel>)
            return predict_nb(m, fv);
          else
            return predict_rf(m, fv);
        },
        model_);
  }

  Prediction classify(std::string_view name) const { return predict(features(name)); }

  const KeywordIndex& keywords() const { return keywords_; }
  const Model& model() const { return model_; }
  bool binary() const { return binary_; }
  std::optional<double> threshold() const { return threshold_; }
  void set_threshold(std::optional<double> t) { threshold_ = t; }

  ModelKind kind() const {
    return std::holds_alternative<NaiveBayesModel>(model_) ? ModelKind::naive_bayes : ModelKind::random_forest;
  }

  const Vocabulary& vocab() const {
    return std::visit([](const auto& m) -> const Vocabulary& { return m.vocab; }, model_);
  }

  const std::vector<std::string>& categories() const {
    return std::visit([](const auto& m) -> const std::vector<std::string>& { return m.categories; }, model_);
  }

 private:
  KeywordIndex keywords_;
  Model model_;
  bool binary_;
  std::optional<double> threshold_;
};

// Keyword index and vocabulary come from `train` alone. Out-of-scope records
// in `train` are rejected; callers pick the ambiguity kinds beforehand.
inline Classifier train_classifier(const Dataset& train, const TrainConfig& cfg) {
  if (train.records.empty()) throw DataError("training set is empty");
  for (const auto& r : train.records)
    if (!r.in_scope() || !train.category_index(r.label))
      throw DataError("training record '" + r.file_name + "' is not in scope");

  KeywordIndex keywords =
      cfg.use_trie ? extract_keywords(compute_tfidf(train, cfg.formula), cfg.k) : KeywordIndex{};

  std::vector<TokenSequence> seqs;
  seqs.reserve(train.records.size());
  for (const auto& r : train.records) seqs.push_back(tokenize_full(keywords, r.file_name));
  Vocabulary vocab = build_vocab(seqs);

  std::vector<LabeledVector> samples;
  samples.reserve(seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i)
    samples.push_back({encode(vocab, seqs[i], cfg.binary), *train.category_index(train.records[i].label)});

  if (cfg.kind == ModelKind::naive_bayes)
    return {std::move(keywords), train_nb(samples, std::move(vocab), train.categories, cfg.alpha), cfg.binary};
  return {std::move(keywords),
          train_rf(samples, std::move(vocab), train.categories, {cfg.tree_count, cfg.seed, cfg.threads}),
          cfg.binary};
}

}  // namespace fntriage
