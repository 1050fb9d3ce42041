// Acceptance runner. Prints one PASS/FAIL/SKIP line per criterion.
//
//   acceptance --offline                  latency and property suites
//   acceptance --datasets --data-dir DIR  reproduction runs on DIR/web_search.csv
//                                         and DIR/common_crawl.csv
//
// Exit status: 0 when every evaluated criterion passes, 1 on any failure,
// 77 when the datasets are missing (ctest reports the test as skipped).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <string>

#include "fntriage/fntriage.hpp"
#include "oracles.hpp"

using namespace fntriage;
namespace fs = std::filesystem;

namespace {

constexpr int kSkip = 77;

struct Tally {
  int failed = 0;

  void report(const std::string& id, bool ok, const std::string& detail) {
    std::cout << "criterion " << id << ": " << (ok ? "PASS" : "FAIL") << "  " << detail << std::endl;
    if (!ok) ++failed;
  }
};

std::string num(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Criterion 5

const std::vector<std::string> kLatencyCategories = {
    "resume",          "restaurant_menu", "course_syllabus", "press_release", "meeting_minutes",
    "policy",          "newsletter",      "spec_sheet",      "map",           "form",
    "letter",          "guide",           "bill",            "catalog",       "manual"};

void latency(Tally& tally) {
  const Dataset train = synth_fixture(kLatencyCategories, 100, 1);
  std::vector<std::string> names;
  for (const auto& r : synth_fixture(kLatencyCategories, 20, 2).records) names.push_back(r.file_name);
  for (const auto& r : synth_ambiguous(kLatencyCategories, 100, 3)) names.push_back(r.file_name);

  const double t_heavy = 0.0574;
  TrainConfig cfg;
  cfg.kind = ModelKind::random_forest;
  const auto rf = bench_latency(train_classifier(train, cfg), names, 1, 5);
  cfg.kind = ModelKind::naive_bayes;
  const auto nb = bench_latency(train_classifier(train, cfg), names, 1, 5);

  tally.report("5a (RF latency < 1 ms)", rf.mean_s < 1e-3,
               "mean " + sci(rf.mean_s) + " s, ln(mean) " + num(rf.ln_mean_s, 2) + ", p50 " + sci(rf.p50_s) +
                   " s, p99 " + sci(rf.p99_s) + " s, speedup vs t_heavy at full coverage " +
                   num(t_heavy / rf.mean_s, 0) + "x (reference: 1.30e-4 s, ln -8.95)");
  tally.report("5b (NB latency < 0.1 ms)", nb.mean_s < 1e-4,
               "mean " + sci(nb.mean_s) + " s, ln(mean) " + num(nb.ln_mean_s, 2) + ", p50 " + sci(nb.p50_s) +
                   " s, p99 " + sci(nb.p99_s) + " s (reference: 1.61e-6 s)");
}

// ---------------------------------------------------------------------------
// Criterion 6: each suite returns the number of violations.

int tokenizer_fuzz() {
  std::mt19937_64 rng(2024);
  int bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::string name = oracle::random_name(rng);
    const auto seq = universal_tokenize(name);
    std::string expected, concat;
    for (char c : decode_escapes(name))
      if (ascii::is_alnum(c)) expected += ascii::to_lower(c);
    for (const auto& t : seq.tokens) concat += t;
    const bool ok = concat == expected && seq.tokens == oracle::split_rules(decode_escapes(name)) &&
                    universal_tokenize(seq.joined()).tokens == seq.tokens;
    bool lemma_ok = true;
    for (const auto& t : seq.tokens) lemma_ok = lemma_ok && lemmatize(lemmatize(t)) == lemmatize(t);
    bad += !(ok && lemma_ok);
  }
  return bad;
}

int trie_fuzz() {
  std::mt19937_64 rng(31);
  const std::string alphabet = "abcde01";
  auto word = [&](std::size_t lo, std::size_t hi) {
    std::string w;
    for (std::size_t n = std::uniform_int_distribution<std::size_t>(lo, hi)(rng); w.size() < n;)
      w += alphabet[rng() % alphabet.size()];
    return w;
  };
  int bad = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<std::string> kws;
    for (int n = std::uniform_int_distribution<int>(0, 6)(rng); n > 0; --n) kws.push_back(word(1, 4));
    const KeywordIndex index(0.0, IdfFormula::plain, kws);
    const std::string token = word(0, 20);
    const auto pieces = trie_segment(index, token);
    std::string joined;
    for (const auto& p : pieces) joined += p;
    bad += joined != token || pieces != oracle::greedy_segment(index.keywords(), token);
  }
  return bad;
}

std::vector<std::vector<std::string>> random_bags(std::mt19937_64& rng) {
  static const std::vector<std::string> vocab = {"aa", "bb", "cc", "dd", "ee", "ff", "gg"};
  const std::size_t cats = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
  std::size_t budget = std::uniform_int_distribution<std::size_t>(cats, 20)(rng);
  std::vector<std::vector<std::string>> bags(cats);
  for (auto& b : bags) {
    b.push_back(vocab[rng() % vocab.size()]);
    --budget;
  }
  while (budget--) bags[rng() % cats].push_back(vocab[rng() % vocab.size()]);
  return bags;
}

int tfidf_oracle() {
  std::mt19937_64 rng(99);
  int bad = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const auto bags = random_bags(rng);
    const auto table = compute_tfidf(bags);
    for (const auto& [tok, row] : table.counts)
      for (std::size_t c = 0; c < bags.size(); ++c)
        bad += std::abs(table.score(tok, c) - oracle::tfidf(bags, tok, c)) > 1e-12;
  }
  return bad;
}

int keyword_monotonicity() {
  std::mt19937_64 rng(5);
  int bad = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const auto table = compute_tfidf(random_bags(rng));
    const double k1 = std::uniform_real_distribution<double>(0, 0.6)(rng);
    const double k2 = k1 + std::uniform_real_distribution<double>(0, 0.3)(rng);
    const auto lo = extract_keywords(table, k1).keywords();
    const auto hi = extract_keywords(table, k2).keywords();
    bad += !std::includes(lo.begin(), lo.end(), hi.begin(), hi.end());
  }
  return bad;
}

Vocabulary numbered_vocab(int n) {
  std::vector<std::string> toks;
  for (int i = 0; i < n; ++i) toks.push_back("t" + std::to_string(100 + i));
  return Vocabulary(toks);
}

int nb_oracle() {
  std::mt19937_64 rng(17);
  int bad = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int vocab = std::uniform_int_distribution<int>(1, 5)(rng);
    const int classes = std::uniform_int_distribution<int>(2, 3)(rng);
    const int n = std::uniform_int_distribution<int>(classes, 10)(rng);
    const double alpha = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
    std::vector<std::pair<std::vector<int>, int>> dense;
    std::vector<LabeledVector> sparse;
    auto draw = [&](std::vector<int>& x, FeatureVector& f) {
      x.assign(vocab, 0);
      for (int t = 0; t < vocab; ++t) {
        x[t] = static_cast<int>(rng() % 3);
        if (x[t]) f.entries.emplace_back(t, x[t]);
      }
    };
    for (int i = 0; i < n; ++i) {
      std::vector<int> x;
      FeatureVector f;
      draw(x, f);
      const int y = i < classes ? i : static_cast<int>(rng() % classes);
      dense.emplace_back(x, y);
      sparse.push_back({f, static_cast<std::size_t>(y)});
    }
    std::vector<std::string> cats;
    for (int c = 0; c < classes; ++c) cats.push_back("c" + std::to_string(c));
    const auto m = train_nb(sparse, numbered_vocab(vocab), cats, alpha);
    std::vector<int> q;
    FeatureVector qf;
    draw(q, qf);
    const auto expected = oracle::nb_posterior(dense, classes, vocab, alpha, q);
    const auto got = predict_nb(m, qf);
    for (int c = 0; c < classes; ++c) bad += std::abs(got.class_scores[c] - expected[c]) > 1e-10;
  }
  return bad;
}

int auroc_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> pos(std::uniform_int_distribution<std::size_t>(1, 200)(rng));
    std::vector<double> neg(std::uniform_int_distribution<std::size_t>(1, 200)(rng));
    for (auto& x : pos) x = std::round(u(rng) * 20.0) / 20.0;
    for (auto& x : neg) x = std::round(u(rng) * 20.0) / 20.0;
    bad += std::abs(auroc(pos, neg) - oracle::auroc_pairs(pos, neg)) > 1e-12;
  }
  return bad;
}

int rate_monotonicity() {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Outcome> o(std::uniform_int_distribution<std::size_t>(1, 100)(rng));
    for (auto& x : o) x = {std::round(u(rng) * 100.0) / 100.0, rng() % 4 != 0};
    // The sweep runs from t = 1 down to t = 0, so the rate never decreases.
    double prev = -1.0;
    for (const auto& m : threshold_sweep(o, 0.01)) {
      bad += m.prediction_rate < prev || m.n_correct + m.n_incorrect + m.n_deferred != o.size();
      prev = m.prediction_rate;
    }
  }
  return bad;
}

int model_roundtrip() {
  const auto ds = synth_fixture({"resume", "restaurant_menu", "course_syllabus", "press_release"}, 40, 8);
  std::mt19937_64 rng(1);
  int bad = 0;
  for (auto kind : {ModelKind::naive_bayes, ModelKind::random_forest}) {
    TrainConfig cfg;
    cfg.kind = kind;
    const auto clf = train_classifier(ds, cfg);
    const auto path = (fs::temp_directory_path() / ("fntriage_acceptance_" + std::string(to_string(kind)) + ".json")).string();
    save_model(clf, path);
    const auto back = load_model(path);
    fs::remove(path);
    for (int i = 0; i < 1000; ++i) {
      FeatureVector f;
      for (std::uint32_t t = 0; t < clf.vocab().size(); ++t)
        if (rng() % 8 == 0) f.entries.emplace_back(t, 1 + rng() % 2);
      bad += clf.predict(f).class_scores != back.predict(f).class_scores;
    }
    for (const auto& r : ds.records) bad += clf.classify(r.file_name).class_scores != back.classify(r.file_name).class_scores;
  }
  return bad;
}

void property_suites(Tally& tally) {
  const std::vector<std::pair<std::string, std::function<int()>>> suites = {
      {"tokenizer reconstruction and idempotence fuzz, 10k strings", tokenizer_fuzz},
      {"trie segmentation conservation fuzz", trie_fuzz},
      {"TF-IDF brute-force oracle (1e-12)", tfidf_oracle},
      {"NB posterior oracle (1e-10)", nb_oracle},
      {"AUROC pair-counting oracle (1e-12)", auroc_oracle},
      {"prediction-rate monotonicity over threshold sweeps", rate_monotonicity},
      {"model save/load bit-identical predictions", model_roundtrip},
      {"keyword set monotone in k", keyword_monotonicity},
  };
  int total = 0;
  char sub = 'a';
  for (const auto& [name, fn] : suites) {
    const int v = fn();
    total += v;
    tally.report(std::string("6") + sub++ + " (" + name + ")", v == 0, std::to_string(v) + " violations");
  }
  tally.report("6 (property suites)", total == 0, std::to_string(total) + " violations in total");
}

// ---------------------------------------------------------------------------
// Criteria 1, 2, 3, 4, 7

void cv_criterion(Tally& tally, const std::string& id, const Dataset& ws, ModelKind kind, double target_acc,
                  double min_pred_acc) {
  TrainConfig cfg;
  cfg.kind = kind;
  cfg.k = 0.2;
  const auto t0 = std::chrono::steady_clock::now();
  const auto cv = cross_validate(ws, cfg, 5, 0);
  const double elapsed = seconds_since(t0);
  const double acc = 100.0 * cv.report.accuracy;
  const bool acc_ok = std::abs(acc - target_acc) <= 2.5;
  const auto& best = cv.report.best;
  const double pa = best ? 100.0 * best->prediction_accuracy.value_or(0.0) : 0.0;
  const bool pa_ok = best && pa >= min_pred_acc && best->prediction_rate >= 0.9;
  std::string detail = "accuracy " + num(acc, 2) + " (target " + num(target_acc, 2) + " +/- 2.5), ";
  detail += best ? "prediction accuracy " + num(pa, 2) + " at rate " + num(best->prediction_rate, 3) + ", threshold " +
                       num(best->threshold, 2)
                 : std::string("no threshold reaches rate 0.9");
  detail += " (need >= " + num(min_pred_acc, 1) + "), " + num(elapsed, 1) + " s";
  const bool time_ok = kind != ModelKind::random_forest || elapsed < 300.0;
  tally.report(id, acc_ok && pa_ok && time_ok, detail);
}

int datasets(const fs::path& dir) {
  const fs::path ws_path = dir / "web_search.csv";
  const fs::path cc_path = dir / "common_crawl.csv";
  if (!fs::exists(ws_path) || !fs::exists(cc_path)) {
    for (const char* id : {"1", "2", "3", "4", "7"})
      std::cout << "criterion " << id << ": SKIP  dataset files not found (expected " << ws_path.string() << " and "
                << cc_path.string() << ")" << std::endl;
    return kSkip;
  }
  Tally tally;
  const Dataset ws = load_dataset(ws_path.string());
  const Dataset cc = load_dataset(cc_path.string());
  const Dataset ws_train = filter_by_ambiguity(ws, {Ambiguity::indicative});
  std::cout << "web search: " << ws.records.size() << " names, " << ws.categories.size() << " categories; "
            << "common crawl: " << cc.records.size() << " names" << std::endl;

  cv_criterion(tally, "1 (Web Search RF, 5-fold CV)", ws, ModelKind::random_forest, 94.92, 98.5);
  cv_criterion(tally, "2 (Web Search NB, 5-fold CV)", ws, ModelKind::naive_bayes, 94.13, 96.5);

  TrainConfig cfg;
  const Classifier rf = train_classifier(ws_train, cfg);
  const EvalReport rep = evaluate(rf, cc);
  {
    const auto& best = rep.best;
    const double pa = best ? 100.0 * best->prediction_accuracy.value_or(0.0) : 0.0;
    std::string detail = "indicative " + std::to_string(rep.n_indicative) + ", accuracy " +
                         num(100.0 * rep.accuracy, 2) + ", prediction accuracy " + num(pa, 2);
    if (best) detail += " at rate " + num(best->prediction_rate, 3) + ", threshold " + num(best->threshold, 2);
    detail += " (need >= 93, reference 96.57)";
    if (pa < 93.0 && pa >= 90.0) detail += "; within the 90 fallback band, divergence analysis required";
    tally.report("3 (Common Crawl generalization, RF)", best && pa >= 93.0, detail);
  }
  tally.report("4a (AUROC indicative vs ambiguous)", rep.auroc_indicative_vs_ambiguous.value_or(0.0) >= 0.88,
               rep.auroc_indicative_vs_ambiguous ? num(*rep.auroc_indicative_vs_ambiguous) + " (need >= 0.88, reference 0.922)"
                                                 : std::string("no ambiguous names in the Common Crawl file"));
  tally.report("4b (AUROC indicative vs out-of-scope)", rep.auroc_indicative_vs_oos.value_or(0.0) >= 0.88,
               rep.auroc_indicative_vs_oos ? num(*rep.auroc_indicative_vs_oos) + " (need >= 0.88, reference 0.923)"
                                           : std::string("no out-of-scope names in the Common Crawl file"));

  std::vector<double> ks;
  for (int i = 20; i <= 30; ++i) ks.push_back(i / 100.0);
  const auto pts = k_sweep_cv(ws, cfg, ks, 5, 0);
  double lo = 1.0, hi = 0.0;
  std::string curve;
  for (const auto& p : pts) {
    lo = std::min(lo, p.accuracy);
    hi = std::max(hi, p.accuracy);
    curve += " " + num(p.k, 2) + ":" + num(100.0 * p.accuracy, 2);
  }
  const double spread = 100.0 * (hi - lo);
  tally.report("7 (k plateau on [0.2, 0.3])", spread <= 1.5, "max - min " + num(spread, 2) + " points;" + curve);

  return tally.failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  bool offline = false, with_data = false;
  fs::path data_dir = "data";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--offline") offline = true;
    else if (a == "--datasets") with_data = true;
    else if (a == "--data-dir" && i + 1 < argc) data_dir = argv[++i];
    else {
      std::cerr << "usage: acceptance [--offline] [--datasets --data-dir DIR]\n";
      return 2;
    }
  }
  if (!offline && !with_data) offline = with_data = true;

  try {
    int status = 0;
    if (offline) {
      Tally tally;
      latency(tally);
      property_suites(tally);
      status = tally.failed ? 1 : 0;
    }
    if (with_data) {
      const int d = datasets(data_dir);
      if (d == 1) status = 1;
      else if (d == kSkip && status == 0) status = kSkip;
    }
    return status;
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << '\n';
    return 1;
  }
}
