#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fntriage/fntriage.hpp"

namespace fntriage::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2 };

// Defaults for every subcommand that trains a model.
struct RunConfig {
  std::string model = "rf";
  double k = 0.2;
  std::string formula = "plain";
  bool no_trie = false;
  bool binary = false;
  std::size_t trees = 100;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  double rate_floor = 0.9;
  double step = 0.01;
  double cost_step = 0.001;
  double t_heavy = 0.0574;
  double t_fast = 1.23e-4;
  std::size_t folds = 5;

  TrainConfig train_config() const {
    TrainConfig c;
    c.kind = parse_model_kind(model);
    c.k = k;
    c.formula = parse_idf_formula(formula);
    c.use_trie = !no_trie;
    c.binary = binary;
    c.alpha = alpha;
    c.tree_count = trees;
    c.seed = seed;
    c.threads = threads;
    return c;
  }
};

namespace detail {

inline void add_train_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--model", cfg.model, "Model type")->check(CLI::IsMember({"nb", "rf"}))->capture_default_str();
  cmd->add_option("--k", cfg.k, "Keyword TF-IDF threshold")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_option("--formula", cfg.formula, "IDF formula")
      ->check(CLI::IsMember({"plain", "smoothed"}))
      ->capture_default_str();
  cmd->add_flag("--no-trie", cfg.no_trie, "Disable trie segmentation");
  cmd->add_flag("--binary", cfg.binary, "Binary bag-of-words instead of counts");
  cmd->add_option("--trees", cfg.trees, "Random forest tree count")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--alpha", cfg.alpha, "Naive Bayes smoothing")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "Seed for every random choice")->capture_default_str();
  cmd->add_option("--threads", cfg.threads, "Training threads (0: all cores)")->capture_default_str();
}

inline void add_eval_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--rate-floor", cfg.rate_floor, "Minimum prediction rate")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--step", cfg.step, "Threshold search step")->check(CLI::Range(1e-9, 1.0))->capture_default_str();
}

inline std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

class OutputFile {
 public:
  OutputFile(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path.empty() || path == "-") return;
    file_.open(path, std::ios::binary);
    if (!file_) throw DataError("cannot write '" + path + "'");
    stream_ = &file_;
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

inline std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

inline void print_report_summary(std::ostream& out, const EvalReport& rep) {
  out << "indicative\t" << rep.n_indicative << "\n";
  out << "accuracy\t" << fmt(100.0 * rep.accuracy, 6) << "\n";
  if (rep.best) {
    out << "best_threshold\t" << fmt(rep.best->threshold) << "\n";
    out << "prediction_accuracy\t" << fmt(100.0 * rep.best->prediction_accuracy.value_or(0.0), 6) << "\n";
    out << "prediction_rate\t" << fmt(rep.best->prediction_rate) << "\n";
  } else {
    out << "best_threshold\tnone\n";
  }
  if (rep.auroc_indicative_vs_ambiguous)
    out << "auroc_indicative_vs_ambiguous\t" << fmt(*rep.auroc_indicative_vs_ambiguous) << "\n";
  if (rep.auroc_indicative_vs_oos) out << "auroc_indicative_vs_oos\t" << fmt(*rep.auroc_indicative_vs_oos) << "\n";
}

}  // namespace detail

// Entry point behind the fntriage binary. Exit codes: 0 success, 1 usage
// error, 2 data or model error.
inline int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  using namespace detail;
  CLI::App app{"Triage documents by file name: tokenize, train, predict, evaluate.", "fntriage"};
  app.require_subcommand(1);
  RunConfig cfg;

  // tokenize
  std::vector<std::string> tok_names;
  std::string tok_keywords;
  auto* tokenize_cmd = app.add_subcommand("tokenize", "Print the tokens of each file name");
  tokenize_cmd->add_option("names", tok_names, "File names (stdin lines when omitted)");
  tokenize_cmd->add_option("--keywords", tok_keywords, "Keyword index for trie segmentation")->check(CLI::ExistingFile);

  // build-keywords
  std::string train_path, out_path;
  auto* keywords_cmd = app.add_subcommand("build-keywords", "Extract TF-IDF keywords from training names");
  keywords_cmd->add_option("--train", train_path, "Training dataset (csv or jsonl)")->required();
  keywords_cmd->add_option("--k", cfg.k, "Keyword TF-IDF threshold")->check(CLI::NonNegativeNumber)->capture_default_str();
  keywords_cmd->add_option("--formula", cfg.formula, "IDF formula")
      ->check(CLI::IsMember({"plain", "smoothed"}))
      ->capture_default_str();
  keywords_cmd->add_option("--out", out_path, "Output index JSON")->required();

  // train
  std::size_t calibrate_folds = 0;
  auto* train_cmd = app.add_subcommand("train", "Train a classifier and write the model file");
  train_cmd->add_option("--train", train_path, "Training dataset (csv or jsonl)")->required();
  train_cmd->add_option("--out", out_path, "Output model JSON")->required();
  add_train_options(train_cmd, cfg);
  add_eval_options(train_cmd, cfg);
  train_cmd->add_option("--calibrate-folds", calibrate_folds,
                        "Store the cross-validated best threshold (0: none)")
      ->capture_default_str();

  // predict
  std::string model_path;
  std::vector<std::string> predict_names;
  std::optional<double> threshold;
  auto* predict_cmd = app.add_subcommand("predict", "Classify file names; prints name, label, confidence, decision");
  predict_cmd->add_option("--model-file", model_path, "Model JSON")->required();
  predict_cmd->add_option("--name", predict_names, "File name (repeatable; stdin lines when omitted)");
  predict_cmd->add_option("--threshold", threshold, "Deferral threshold")->check(CLI::Range(0.0, 1.0));

  // evaluate
  std::string data_path, test_path, csv_path, json_path;
  auto* eval_cmd = app.add_subcommand("evaluate", "Cross-validate, or train on --data and test on --test");
  eval_cmd->add_option("--data", data_path, "Labeled dataset")->required();
  eval_cmd->add_option("--test", test_path, "Held-out dataset (skips cross validation)");
  eval_cmd->add_option("--model-file", model_path, "Evaluate an existing model on --data");
  eval_cmd->add_option("--folds", cfg.folds, "Cross-validation folds")->check(CLI::Range(2, 1000))->capture_default_str();
  eval_cmd->add_option("--csv", csv_path, "Per-threshold CSV output");
  eval_cmd->add_option("--json", json_path, "JSON report output");
  add_train_options(eval_cmd, cfg);
  add_eval_options(eval_cmd, cfg);

  // sweep
  double k_min = 0.0, k_max = 0.3, k_step = 0.001;
  auto* sweep_cmd = app.add_subcommand("sweep", "Accuracy as a function of the keyword threshold k");
  sweep_cmd->add_option("--data", data_path, "Labeled dataset")->required();
  sweep_cmd->add_option("--test", test_path, "Held-out dataset (skips cross validation)");
  sweep_cmd->add_option("--k-min", k_min)->check(CLI::NonNegativeNumber)->capture_default_str();
  sweep_cmd->add_option("--k-max", k_max)->check(CLI::NonNegativeNumber)->capture_default_str();
  sweep_cmd->add_option("--k-step", k_step)->check(CLI::PositiveNumber)->capture_default_str();
  sweep_cmd->add_option("--folds", cfg.folds)->check(CLI::Range(2, 1000))->capture_default_str();
  sweep_cmd->add_option("--out", out_path, "CSV output (stdout when omitted)");
  add_train_options(sweep_cmd, cfg);

  // cost-curve
  bool measure_fast = false;
  auto* cost_cmd = app.add_subcommand("cost-curve", "Overall accuracy and time per document across thresholds");
  cost_cmd->add_option("--model-file", model_path, "Model JSON")->required();
  cost_cmd->add_option("--data", data_path, "Dataset to score (all ambiguity kinds)")->required();
  cost_cmd->add_option("--t-heavy", cfg.t_heavy, "Seconds per deferred document")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cost_cmd->add_option("--t-fast", cfg.t_fast, "Seconds per file-name prediction")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cost_cmd->add_flag("--measure-fast", measure_fast, "Measure --t-fast on the dataset instead");
  cost_cmd->add_option("--step", cfg.cost_step, "Threshold step")->check(CLI::Range(1e-9, 1.0))->capture_default_str();
  cost_cmd->add_option("--out", out_path, "CSV output (stdout when omitted)");

  // bench
  int warmup = 1, reps = 5;
  auto* bench_cmd = app.add_subcommand("bench", "Per-name end-to-end prediction latency");
  bench_cmd->add_option("--model-file", model_path, "Model JSON")->required();
  bench_cmd->add_option("--data", data_path, "Dataset whose names are timed");
  bench_cmd->add_option("--name", predict_names, "File name (repeatable)");
  bench_cmd->add_option("--warmup", warmup)->check(CLI::NonNegativeNumber)->capture_default_str();
  bench_cmd->add_option("--reps", reps)->check(CLI::PositiveNumber)->capture_default_str();

  std::vector<std::string> argv_store{"fntriage"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (tokenize_cmd->parsed()) {
      KeywordIndex index = tok_keywords.empty() ? KeywordIndex{} : load_keywords(tok_keywords);
      const auto names = tok_names.empty() ? read_lines(in) : tok_names;
      for (const auto& n : names) out << tokenize_full(index, n).joined() << '\n';
      return kOk;
    }

    if (keywords_cmd->parsed()) {
      const Dataset ds = filter_by_ambiguity(load_dataset(train_path), {Ambiguity::indicative});
      const auto index = extract_keywords(compute_tfidf(ds, parse_idf_formula(cfg.formula)), cfg.k);
      save_keywords(index, out_path);
      out << index.keywords().size() << " keywords written to " << out_path << '\n';
      return kOk;
    }

    if (train_cmd->parsed()) {
      const Dataset ds = filter_by_ambiguity(load_dataset(train_path), {Ambiguity::indicative});
      const TrainConfig tc = cfg.train_config();
      Classifier clf = train_classifier(ds, tc);
      if (calibrate_folds >= 2) {
        auto cv = cross_validate(ds, tc, calibrate_folds, cfg.seed, {cfg.rate_floor, cfg.step});
        if (cv.report.best) clf.set_threshold(cv.report.best->threshold);
      }
      save_model(clf, out_path);
      out << "trained " << to_string(clf.kind()) << " on " << ds.records.size() << " names, "
          << clf.categories().size() << " categories, " << clf.vocab().size() << " tokens, "
          << clf.keywords().keywords().size() << " keywords";
      if (clf.threshold()) out << ", threshold " << fmt(*clf.threshold());
      out << '\n';
      return kOk;
    }

    if (predict_cmd->parsed()) {
      const Classifier clf = load_model(model_path);
      const double t = threshold ? *threshold : clf.threshold().value_or(0.5);
      const auto names = predict_names.empty() ? read_lines(in) : predict_names;
      for (const auto& n : names) {
        const Prediction p = clf.classify(n);
        out << n << '\t' << clf.categories()[p.label] << '\t' << fmt(p.confidence) << '\t'
            << (p.confidence > t ? "predict" : "defer") << '\n';
      }
      return kOk;
    }

    if (eval_cmd->parsed()) {
      const Dataset data = load_dataset(data_path);
      const EvalOptions eo{cfg.rate_floor, cfg.step};
      EvalReport rep;
      if (!model_path.empty()) {
        rep = evaluate(load_model(model_path), data, eo);
      } else if (!test_path.empty()) {
        const Classifier clf =
            train_classifier(filter_by_ambiguity(data, {Ambiguity::indicative}), cfg.train_config());
        rep = evaluate(clf, load_dataset(test_path), eo);
      } else {
        rep = cross_validate(data, cfg.train_config(), cfg.folds, cfg.seed, eo).report;
      }
      print_report_summary(out, rep);
      if (!csv_path.empty()) {
        OutputFile f(csv_path, out);
        write_threshold_csv(*f, rep.per_threshold);
      }
      if (!json_path.empty()) {
        OutputFile f(json_path, out);
        *f << to_json(rep).dump(2) << '\n';
      }
      return kOk;
    }

    if (sweep_cmd->parsed()) {
      if (k_max < k_min) throw std::invalid_argument("--k-max must be >= --k-min");
      std::vector<double> ks;
      const auto n = static_cast<long long>(std::floor((k_max - k_min) / k_step + 1e-9));
      for (long long i = 0; i <= n; ++i) ks.push_back(k_min + static_cast<double>(i) * k_step);
      const Dataset data = load_dataset(data_path);
      std::vector<KSweepPoint> pts;
      if (!test_path.empty())
        pts = k_sweep(filter_by_ambiguity(data, {Ambiguity::indicative}), load_dataset(test_path),
                      cfg.train_config(), ks);
      else
        pts = k_sweep_cv(data, cfg.train_config(), ks, cfg.folds, cfg.seed);
      OutputFile f(out_path, out);
      write_k_sweep_csv(*f, pts);
      return kOk;
    }

    if (cost_cmd->parsed()) {
      const Classifier clf = load_model(model_path);
      const Dataset data = load_dataset(data_path);
      double t_fast = cfg.t_fast;
      if (measure_fast) {
        std::vector<std::string> names;
        for (const auto& r : data.records) names.push_back(r.file_name);
        t_fast = bench_latency(clf, names, 1, 3).mean_s;
      }
      const auto outcomes = outcomes_of(score_records(clf, data.records));
      OutputFile f(out_path, out);
      write_cost_csv(*f, cost_curve(outcomes, t_fast, cfg.t_heavy, cfg.cost_step), cfg.t_heavy);
      return kOk;
    }

    if (bench_cmd->parsed()) {
      const Classifier clf = load_model(model_path);
      std::vector<std::string> names = predict_names;
      if (!data_path.empty())
        for (const auto& r : load_dataset(data_path).records) names.push_back(r.file_name);
      if (names.empty()) throw std::invalid_argument("bench needs --data or --name");
      const auto st = bench_latency(clf, names, warmup, reps);
      nlohmann::json j = {{"mean_s", st.mean_s}, {"ln_mean_s", st.ln_mean_s}, {"p50_s", st.p50_s},
                          {"p99_s", st.p99_s},   {"samples", st.samples}};
      out << j.dump() << '\n';
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cin, std::cout, std::cerr);
}

}  // namespace fntriage::cli
