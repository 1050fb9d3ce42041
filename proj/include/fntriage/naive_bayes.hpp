#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fntriage/error.hpp"
#include "fntriage/features.hpp"
#include "fntriage/prediction.hpp"

namespace fntriage {

// Multinomial Naive Bayes with additive (Laplace) smoothing.
struct NaiveBayesModel {
  Vocabulary vocab;
  std::vector<std::string> categories;
  double alpha = 1.0;
  std::vector<double> class_log_prior;
  std::vector<double> token_log_likelihood;  // row-major [class][vocab index]

  std::size_t class_count() const { return categories.size(); }

  double log_likelihood(std::size_t cls, std::size_t token) const {
    return token_log_likelihood[cls * vocab.size() + token];
  }
};

inline NaiveBayesModel train_nb(std::span<const LabeledVector> train, Vocabulary vocab,
                                std::vector<std::string> categories, double alpha = 1.0) {
  if (!(alpha > 0.0)) throw std::invalid_argument("naive bayes alpha must be > 0");
  const std::size_t n_classes = categories.size();
  const std::size_t n_tokens = vocab.size();
  if (n_classes == 0) throw std::invalid_argument("train_nb: no categories");

  std::vector<double> class_count(n_classes, 0.0);
  std::vector<double> token_count(n_classes * n_tokens, 0.0);
  for (const auto& s : train) {
    if (s.label >= n_classes) throw std::invalid_argument("train_nb: label out of range");
    class_count[s.label] += 1.0;
    for (auto [idx, cnt] : s.features.entries) token_count[s.label * n_tokens + idx] += cnt;
  }
  for (std::size_t c = 0; c < n_classes; ++c)
    if (class_count[c] == 0.0) throw DataError("train_nb: class '" + categories[c] + "' has no training samples");

  NaiveBayesModel m{std::move(vocab), std::move(categories), alpha, {}, {}};
  const double n = static_cast<double>(train.size());
  m.class_log_prior.resize(n_classes);
  m.token_log_likelihood.resize(n_classes * n_tokens);
  for (std::size_t c = 0; c < n_classes; ++c) {
    m.class_log_prior[c] = std::log(class_count[c] / n);
    double total = 0.0;
    for (std::size_t t = 0; t < n_tokens; ++t) total += token_count[c * n_tokens + t];
    const double denom = std::log(total + alpha * static_cast<double>(n_tokens));
    for (std::size_t t = 0; t < n_tokens; ++t)
      m.token_log_likelihood[c * n_tokens + t] = std::log(token_count[c * n_tokens + t] + alpha) - denom;
  }
  return m;
}

inline Prediction predict_nb(const NaiveBayesModel& m, const FeatureVector& fv) {
  std::vector<double> joint(m.class_log_prior);
  for (std::size_t c = 0; c < joint.size(); ++c)
    for (auto [idx, cnt] : fv.entries) joint[c] += cnt * m.log_likelihood(c, idx);

  const double peak = *std::max_element(joint.begin(), joint.end());
  double sum = 0.0;
  for (double& v : joint) sum += (v = std::exp(v - peak));
  for (double& v : joint) v /= sum;
  return Prediction::from_scores(std::move(joint));
}

}  // namespace fntriage
