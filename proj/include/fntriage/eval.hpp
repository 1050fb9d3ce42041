#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fntriage/classifier.hpp"
#include "fntriage/dataset.hpp"
#include "fntriage/error.hpp"

namespace fntriage {

// One scored prediction: its confidence and whether the label was right.
// Out-of-scope inputs are never correct.
struct Outcome {
  double confidence = 0.0;
  bool correct = false;
};

struct ThresholdMetrics {
  double threshold = 0.0;
  std::optional<double> prediction_accuracy;  // empty when nothing is predicted
  double prediction_rate = 0.0;
  std::size_t n_correct = 0;
  std::size_t n_incorrect = 0;
  std::size_t n_deferred = 0;
};

// Predictions with confidence strictly above t are kept; the rest deferred.
inline ThresholdMetrics apply_threshold(std::span<const Outcome> outcomes, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("threshold must lie in [0, 1]");
  ThresholdMetrics m;
  m.threshold = t;
  for (const auto& o : outcomes) {
    if (o.confidence > t)
      ++(o.correct ? m.n_correct : m.n_incorrect);
    else
      ++m.n_deferred;
  }
  const std::size_t predicted = m.n_correct + m.n_incorrect;
  if (predicted) m.prediction_accuracy = static_cast<double>(m.n_correct) / static_cast<double>(predicted);
  if (!outcomes.empty()) m.prediction_rate = static_cast<double>(predicted) / static_cast<double>(outcomes.size());
  return m;
}

// Ascending grid 0, step, 2*step, ..., 1. When 1/step is an integer n the
// points are computed as i/n so that e.g. 0.51 is the exact double 0.51.
inline std::vector<double> threshold_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw std::invalid_argument("threshold step must lie in (0, 1]");
  std::vector<double> grid;
  const double inv = 1.0 / step;
  const auto n = static_cast<long long>(std::llround(inv));
  if (n > 0 && std::abs(inv - static_cast<double>(n)) < 1e-9 * inv) {
    for (long long i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) / static_cast<double>(n));
    return grid;
  }
  for (long long i = 0; static_cast<double>(i) * step < 1.0 - 1e-12; ++i) grid.push_back(static_cast<double>(i) * step);
  grid.push_back(1.0);
  return grid;
}

// Metrics at t = 1, 1 - step, ..., 0.
inline std::vector<ThresholdMetrics> threshold_sweep(std::span<const Outcome> outcomes, double step) {
  auto grid = threshold_grid(step);
  std::vector<ThresholdMetrics> out;
  out.reserve(grid.size());
  for (auto it = grid.rbegin(); it != grid.rend(); ++it) out.push_back(apply_threshold(outcomes, *it));
  return out;
}

// Highest prediction accuracy among thresholds whose prediction rate is at
// least rate_floor; ties go to the lowest threshold.
inline ThresholdMetrics best_threshold(std::span<const Outcome> outcomes, double rate_floor, double step) {
  if (!(rate_floor >= 0.0 && rate_floor <= 1.0)) throw std::invalid_argument("rate floor must lie in [0, 1]");
  std::optional<ThresholdMetrics> best;
  for (const auto& m : threshold_sweep(outcomes, step)) {
    if (m.prediction_rate < rate_floor || !m.prediction_accuracy) continue;
    if (!best || *m.prediction_accuracy >= *best->prediction_accuracy) best = m;
  }
  if (!best) throw DataError("no threshold reaches a prediction rate of " + std::to_string(rate_floor));
  return *best;
}

// Mann-Whitney AUROC with average ranks for ties: P(pos > neg) + P(tie) / 2.
inline double auroc(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) throw std::invalid_argument("auroc needs non-empty positive and negative sets");
  struct Item {
    double score;
    bool positive;
  };
  std::vector<Item> all;
  all.reserve(pos.size() + neg.size());
  for (double s : pos) all.push_back({s, true});
  for (double s : neg) all.push_back({s, false});
  std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.score < b.score; });

  double rank_sum = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (all[k].positive) rank_sum += avg_rank;
    i = j;
  }
  const double np = static_cast<double>(pos.size());
  const double nn = static_cast<double>(neg.size());
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

struct CostCurvePoint {
  double threshold = 0.0;
  double prediction_rate = 0.0;
  std::optional<double> prediction_accuracy;
  double overall_accuracy = 0.0;  // deferred inputs assumed handled correctly downstream
  double time_per_doc = 0.0;      // seconds
};

inline CostCurvePoint cost_point(const ThresholdMetrics& m, double t_fast, double t_heavy) {
  const double rate = m.prediction_rate;
  return {m.threshold, rate, m.prediction_accuracy, m.prediction_accuracy.value_or(0.0) * rate + (1.0 - rate),
          t_fast + t_heavy * (1.0 - rate)};
}

// Thresholds in ascending order.
inline std::vector<CostCurvePoint> cost_curve(std::span<const Outcome> outcomes, double t_fast, double t_heavy,
                                              double step) {
  if (t_fast < 0.0 || t_heavy < 0.0) throw std::invalid_argument("latencies must be non-negative");
  std::vector<CostCurvePoint> out;
  for (double t : threshold_grid(step)) out.push_back(cost_point(apply_threshold(outcomes, t), t_fast, t_heavy));
  return out;
}

// ---------------------------------------------------------------------------
// Scoring a classifier on labeled data

struct ScoredRecord {
  Prediction prediction;
  std::optional<std::size_t> truth;  // class index in the classifier's categories
  Ambiguity ambiguity = Ambiguity::indicative;

  Outcome outcome() const { return {prediction.confidence, truth && *truth == prediction.label}; }
};

inline std::vector<ScoredRecord> score_records(const Classifier& clf, const std::vector<FileNameRecord>& records) {
  const auto& cats = clf.categories();
  std::vector<ScoredRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    ScoredRecord s{clf.classify(r.file_name), std::nullopt, r.ambiguity};
    if (r.in_scope()) {
      auto it = std::find(cats.begin(), cats.end(), r.label);
      if (it != cats.end()) s.truth = static_cast<std::size_t>(it - cats.begin());
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<Outcome> outcomes_of(const std::vector<ScoredRecord>& scored, std::optional<Ambiguity> kind = {}) {
  std::vector<Outcome> out;
  for (const auto& s : scored)
    if (!kind || s.ambiguity == *kind) out.push_back(s.outcome());
  return out;
}

inline std::vector<double> confidences_of(const std::vector<ScoredRecord>& scored, Ambiguity kind) {
  std::vector<double> out;
  for (const auto& s : scored)
    if (s.ambiguity == kind) out.push_back(s.prediction.confidence);
  return out;
}

inline double plain_accuracy(std::span<const Outcome> outcomes) {
  if (outcomes.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& o : outcomes) ok += o.correct;
  return static_cast<double>(ok) / static_cast<double>(outcomes.size());
}

struct EvalOptions {
  double rate_floor = 0.9;
  double step = 0.01;
};

struct EvalReport {
  std::size_t n_indicative = 0;
  std::size_t n_ambiguous = 0;
  std::size_t n_out_of_scope = 0;
  double accuracy = 0.0;  // indicative records, no deferral
  std::vector<ThresholdMetrics> per_threshold;
  std::optional<ThresholdMetrics> best;
  std::optional<double> auroc_indicative_vs_ambiguous;
  std::optional<double> auroc_indicative_vs_oos;
  std::vector<std::string> categories;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted], indicative records

  std::vector<std::size_t> errors_per_class() const {
    std::vector<std::size_t> out(confusion.size(), 0);
    for (std::size_t t = 0; t < confusion.size(); ++t)
      for (std::size_t p = 0; p < confusion[t].size(); ++p)
        if (p != t) out[t] += confusion[t][p];
    return out;
  }
};

// Threshold metrics use the indicative records; AUROC compares their
// confidences against ambiguous and out-of-scope records when present.
inline EvalReport build_report(const std::vector<ScoredRecord>& scored, const std::vector<std::string>& categories,
                               const EvalOptions& opts) {
  EvalReport rep;
  rep.categories = categories;
  rep.confusion.assign(categories.size(), std::vector<std::size_t>(categories.size(), 0));
  for (const auto& s : scored) {
    switch (s.ambiguity) {
      case Ambiguity::indicative:
        ++rep.n_indicative;
        if (s.truth) ++rep.confusion[*s.truth][s.prediction.label];
        break;
      case Ambiguity::ambiguous: ++rep.n_ambiguous; break;
      case Ambiguity::out_of_scope: ++rep.n_out_of_scope; break;
    }
  }
  const auto indicative = outcomes_of(scored, Ambiguity::indicative);
  rep.accuracy = plain_accuracy(indicative);
  rep.per_threshold = threshold_sweep(indicative, opts.step);
  if (!indicative.empty()) {
    try {
      rep.best = best_threshold(indicative, opts.rate_floor, opts.step);
    } catch (const DataError&) {
    }
  }
  const auto conf_ind = confidences_of(scored, Ambiguity::indicative);
  const auto conf_amb = confidences_of(scored, Ambiguity::ambiguous);
  const auto conf_oos = confidences_of(scored, Ambiguity::out_of_scope);
  if (!conf_ind.empty() && !conf_amb.empty()) rep.auroc_indicative_vs_ambiguous = auroc(conf_ind, conf_amb);
  if (!conf_ind.empty() && !conf_oos.empty()) rep.auroc_indicative_vs_oos = auroc(conf_ind, conf_oos);
  return rep;
}

inline EvalReport evaluate(const Classifier& clf, const Dataset& test, const EvalOptions& opts = {}) {
  return build_report(score_records(clf, test.records), clf.categories(), opts);
}

struct CvResult {
  std::vector<double> fold_accuracy;
  std::vector<ScoredRecord> scored;  // every record scored once, by the fold that held it out
  EvalReport report;

  double mean_accuracy() const {
    double s = 0.0;
    for (double a : fold_accuracy) s += a;
    return fold_accuracy.empty() ? 0.0 : s / static_cast<double>(fold_accuracy.size());
  }
};

// Stratified k-fold: train on the indicative records of k-1 folds, score every
// record of the held-out fold. The report pools all held-out predictions.
inline CvResult cross_validate(const Dataset& ds, const TrainConfig& cfg, std::size_t folds, std::uint64_t split_seed,
                               const EvalOptions& opts = {}) {
  const CvSplit split = stratified_kfold(ds, folds, split_seed);
  CvResult res;
  for (std::size_t f = 0; f < folds; ++f) {
    const Dataset train = filter_by_ambiguity(subset(ds, split.train_indices(f)), {Ambiguity::indicative});
    const Dataset test = subset(ds, split.test_indices(f));
    const Classifier clf = train_classifier(train, cfg);
    auto scored = score_records(clf, test.records);
    res.fold_accuracy.push_back(plain_accuracy(outcomes_of(scored, Ambiguity::indicative)));
    for (auto& s : scored) res.scored.push_back(std::move(s));
  }
  res.report = build_report(res.scored, ds.categories, opts);
  res.report.accuracy = res.mean_accuracy();
  return res;
}

struct KSweepPoint {
  double k = 0.0;
  double accuracy = 0.0;
};

// Retrains keyword index and model for each k; accuracy over in-scope test records.
inline std::vector<KSweepPoint> k_sweep(const Dataset& train, const Dataset& test, TrainConfig cfg,
                                        std::span<const double> k_values) {
  if (k_values.empty()) throw std::invalid_argument("k_sweep needs at least one k value");
  const Dataset scored_test = filter_by_ambiguity(test, {Ambiguity::indicative, Ambiguity::ambiguous});
  std::vector<KSweepPoint> out;
  for (double k : k_values) {
    cfg.k = k;
    cfg.use_trie = true;
    const Classifier clf = train_classifier(train, cfg);
    out.push_back({k, plain_accuracy(outcomes_of(score_records(clf, scored_test.records)))});
  }
  return out;
}

// Mean k-sweep accuracy over stratified folds.
inline std::vector<KSweepPoint> k_sweep_cv(const Dataset& ds, const TrainConfig& cfg, std::span<const double> k_values,
                                           std::size_t folds, std::uint64_t split_seed) {
  const CvSplit split = stratified_kfold(ds, folds, split_seed);
  std::vector<KSweepPoint> total;
  for (std::size_t f = 0; f < folds; ++f) {
    const Dataset train = filter_by_ambiguity(subset(ds, split.train_indices(f)), {Ambiguity::indicative});
    const Dataset test = filter_by_ambiguity(subset(ds, split.test_indices(f)), {Ambiguity::indicative});
    auto pts = k_sweep(train, test, cfg, k_values);
    if (total.empty()) total = pts;
    else
      for (std::size_t i = 0; i < pts.size(); ++i) total[i].accuracy += pts[i].accuracy;
  }
  for (auto& p : total) p.accuracy /= static_cast<double>(folds);
  return total;
}

struct LatencyStats {
  double mean_s = 0.0;
  double ln_mean_s = 0.0;
  double p50_s = 0.0;
  double p99_s = 0.0;
  std::size_t samples = 0;
};

inline LatencyStats latency_stats(std::vector<double> seconds) {
  if (seconds.empty()) throw std::invalid_argument("no latency samples");
  LatencyStats st;
  st.samples = seconds.size();
  double sum = 0.0;
  for (double s : seconds) sum += s;
  st.mean_s = sum / static_cast<double>(seconds.size());
  st.ln_mean_s = std::log(st.mean_s);
  std::sort(seconds.begin(), seconds.end());
  auto nearest_rank = [&](double q) {
    auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(seconds.size())));
    return seconds[std::min(seconds.size() - 1, idx == 0 ? 0 : idx - 1)];
  };
  st.p50_s = nearest_rank(0.50);
  st.p99_s = nearest_rank(0.99);
  return st;
}

// End-to-end per-name latency (tokenize, encode, predict), batch size 1.
inline LatencyStats bench_latency(const Classifier& clf, std::span<const std::string> names, int warmup, int reps) {
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (names.empty()) throw std::invalid_argument("bench needs at least one input name");
  using clock = std::chrono::steady_clock;
  volatile double sink = 0.0;
  for (int w = 0; w < warmup; ++w)
    for (const auto& n : names) sink = sink + clf.classify(n).confidence;
  std::vector<double> seconds;
  seconds.reserve(names.size() * static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    for (const auto& n : names) {
      const auto t0 = clock::now();
      const double c = clf.classify(n).confidence;
      const auto t1 = clock::now();
      sink = sink + c;
      seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
  }
  return latency_stats(std::move(seconds));
}

// ---------------------------------------------------------------------------
// Output

inline nlohmann::json to_json(const ThresholdMetrics& m) {
  return {{"threshold", m.threshold},
          {"prediction_accuracy", m.prediction_accuracy ? nlohmann::json(*m.prediction_accuracy) : nlohmann::json()},
          {"prediction_rate", m.prediction_rate},
          {"n_correct", m.n_correct},
          {"n_incorrect", m.n_incorrect},
          {"n_deferred", m.n_deferred}};
}

inline nlohmann::json to_json(const EvalReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  nlohmann::json per = nlohmann::json::array();
  for (const auto& m : r.per_threshold) per.push_back(to_json(m));
  nlohmann::json errors = nlohmann::json::object();
  const auto errs = r.errors_per_class();
  for (std::size_t c = 0; c < r.categories.size(); ++c) errors[r.categories[c]] = errs[c];
  return {{"n_indicative", r.n_indicative},
          {"n_ambiguous", r.n_ambiguous},
          {"n_out_of_scope", r.n_out_of_scope},
          {"accuracy", r.accuracy},
          {"best", r.best ? to_json(*r.best) : nlohmann::json()},
          {"auroc_indicative_vs_ambiguous", opt(r.auroc_indicative_vs_ambiguous)},
          {"auroc_indicative_vs_oos", opt(r.auroc_indicative_vs_oos)},
          {"categories", r.categories},
          {"confusion", r.confusion},
          {"errors_per_class", errors},
          {"per_threshold", per}};
}

inline std::string format_optional(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os.precision(10);
  os << *v;
  return os.str();
}

inline void write_threshold_csv(std::ostream& out, std::span<const ThresholdMetrics> rows) {
  out << "threshold,prediction_accuracy,prediction_rate,n_correct,n_incorrect,n_deferred\n";
  out.precision(10);
  for (const auto& m : rows)
    out << m.threshold << ',' << format_optional(m.prediction_accuracy) << ',' << m.prediction_rate << ','
        << m.n_correct << ',' << m.n_incorrect << ',' << m.n_deferred << '\n';
}

inline void write_cost_csv(std::ostream& out, std::span<const CostCurvePoint> rows, double t_heavy) {
  out << "threshold,prediction_accuracy,prediction_rate,overall_accuracy,time_per_doc,speedup_vs_heavy\n";
  out.precision(10);
  for (const auto& p : rows)
    out << p.threshold << ',' << format_optional(p.prediction_accuracy) << ',' << p.prediction_rate << ','
        << p.overall_accuracy << ',' << p.time_per_doc << ',' << (p.time_per_doc > 0 ? t_heavy / p.time_per_doc : 0.0)
        << '\n';
}

inline void write_k_sweep_csv(std::ostream& out, std::span<const KSweepPoint> rows) {
  out << "k,accuracy\n";
  out.precision(10);
  for (const auto& p : rows) out << p.k << ',' << p.accuracy << '\n';
}

}  // namespace fntriage
