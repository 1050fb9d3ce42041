#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fntriage/features.hpp"

namespace fntriage {

struct LabeledVector {
  FeatureVector features;
  std::size_t label = 0;  // class index into the model's categories
};

struct Prediction {
  std::size_t label = 0;  // argmax of class_scores, lowest index on ties
  double confidence = 0.0;
  std::vector<double> class_scores;

  static Prediction from_scores(std::vector<double> scores) {
    Prediction p;
    for (std::size_t c = 1; c < scores.size(); ++c)
      if (scores[c] > scores[p.label]) p.label = c;
    p.confidence = scores.empty() ? 0.0 : scores[p.label];
    p.class_scores = std::move(scores);
    return p;
  }
};

}  // namespace fntriage
