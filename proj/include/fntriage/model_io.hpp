#pragma once

#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>

#include <boost/crc.hpp>
#include <json.hpp>

#include "fntriage/classifier.hpp"
#include "fntriage/error.hpp"

namespace fntriage {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline std::uint32_t crc32_of(const std::string& bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

inline nlohmann::json tree_to_json(const DecisionTree& t) {
  return {{"feature", t.feature}, {"threshold", t.threshold}, {"left", t.left},
          {"right", t.right},     {"leaf", t.leaf},           {"leaf_counts", t.leaf_counts}};
}

inline DecisionTree tree_from_json(const nlohmann::json& j, std::size_t n_classes, std::size_t n_features) {
  DecisionTree t;
  t.class_count = n_classes;
  j.at("feature").get_to(t.feature);
  j.at("threshold").get_to(t.threshold);
  j.at("left").get_to(t.left);
  j.at("right").get_to(t.right);
  j.at("leaf").get_to(t.leaf);
  j.at("leaf_counts").get_to(t.leaf_counts);
  const std::size_t n = t.feature.size();
  auto bad = [](const char* what) { return ModelFormatError(ModelFormatError::Kind::malformed, what); };
  if (n == 0 || t.threshold.size() != n || t.left.size() != n || t.right.size() != n || t.leaf.size() != n)
    throw bad("tree arrays have inconsistent lengths");
  if (t.leaf_counts.size() % n_classes != 0) throw bad("leaf_counts is not a multiple of the class count");
  for (std::size_t i = 0; i < n; ++i) {
    if (t.feature[i] >= 0) {
      if (static_cast<std::size_t>(t.feature[i]) >= n_features || t.left[i] <= i || t.right[i] <= i ||
          t.left[i] >= n || t.right[i] >= n)
        throw bad("tree node references out of range");
    } else if (t.leaf[i] < 0 || static_cast<std::size_t>(t.leaf[i]) >= t.leaf_count()) {
      throw bad("tree leaf references out of range");
    }
  }
  return t;
}

inline nlohmann::json model_body(const Classifier& clf) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["model_type"] = std::string(to_string(clf.kind()));
  j["categories"] = clf.categories();
  j["vocab"] = clf.vocab().tokens();
  j["keywords"] = clf.keywords().to_json();
  j["binary"] = clf.binary();
  j["threshold"] = clf.threshold() ? nlohmann::json(*clf.threshold()) : nlohmann::json(nullptr);
  if (const auto* nb = std::get_if<NaiveBayesModel>(&clf.model())) {
    j["parameters"] = {{"alpha", nb->alpha},
                       {"class_log_prior", nb->class_log_prior},
                       {"token_log_likelihood", nb->token_log_likelihood}};
  } else {
    const auto& rf = std::get<RandomForestModel>(clf.model());
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : rf.trees) trees.push_back(tree_to_json(t));
    j["parameters"] = {{"seed", rf.seed}, {"trees", std::move(trees)}};
  }
  return j;
}

}  // namespace detail

// Single JSON document; `crc32` covers the compact dump of every other key.
inline std::string serialize_model(const Classifier& clf) {
  nlohmann::json j = detail::model_body(clf);
  j["crc32"] = detail::crc32_of(j.dump());
  return j.dump() + "\n";
}

inline Classifier deserialize_model(const std::string& text) {
  using Kind = ModelFormatError::Kind;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const bool at_end = std::string_view(e.what()).find("unexpected end of input") != std::string_view::npos;
    throw ModelFormatError(at_end ? Kind::truncated : Kind::malformed,
                           std::string(at_end ? "model file is truncated: " : "model file is not valid JSON: ") +
                               e.what());
  }
  if (!j.is_object() || !j.contains("format_version") || !j["format_version"].is_number_integer())
    throw ModelFormatError(Kind::malformed, "model file has no format_version");
  if (const int v = j["format_version"].get<int>(); v != kModelFormatVersion)
    throw ModelFormatError(Kind::version, "unsupported model format version " + std::to_string(v) +
                                              " (expected " + std::to_string(kModelFormatVersion) + ")");
  if (!j.contains("crc32") || !j["crc32"].is_number_unsigned())
    throw ModelFormatError(Kind::malformed, "model file has no crc32");
  const auto stored = j["crc32"].get<std::uint32_t>();
  j.erase("crc32");
  if (detail::crc32_of(j.dump()) != stored) throw ModelFormatError(Kind::checksum, "model file checksum mismatch");

  try {
    auto categories = j.at("categories").get<std::vector<std::string>>();
    Vocabulary vocab(j.at("vocab").get<std::vector<std::string>>());
    auto keywords = KeywordIndex::from_json(j.at("keywords"));
    const bool binary = j.at("binary").get<bool>();
    std::optional<double> threshold;
    if (!j.at("threshold").is_null()) threshold = j["threshold"].get<double>();
    const auto& p = j.at("parameters");
    const ModelKind kind = parse_model_kind(j.at("model_type").get<std::string>());
    if (categories.empty()) throw ModelFormatError(Kind::malformed, "model has no categories");

    if (kind == ModelKind::naive_bayes) {
      NaiveBayesModel nb{std::move(vocab), std::move(categories), p.at("alpha").get<double>(),
                         p.at("class_log_prior").get<std::vector<double>>(),
                         p.at("token_log_likelihood").get<std::vector<double>>()};
      if (nb.class_log_prior.size() != nb.categories.size() ||
          nb.token_log_likelihood.size() != nb.categories.size() * nb.vocab.size())
        throw ModelFormatError(Kind::malformed, "naive bayes parameter shapes do not match");
      return {std::move(keywords), std::move(nb), binary, threshold};
    }
    RandomForestModel rf{std::move(vocab), std::move(categories), p.at("seed").get<std::uint64_t>(), {}};
    for (const auto& t : p.at("trees"))
      rf.trees.push_back(detail::tree_from_json(t, rf.categories.size(), std::max<std::size_t>(1, rf.vocab.size())));
    if (rf.trees.empty()) throw ModelFormatError(Kind::malformed, "random forest has no trees");
    return {std::move(keywords), std::move(rf), binary, threshold};
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(Kind::malformed, std::string("model file is malformed: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(Kind::malformed, std::string("model file is malformed: ") + e.what());
  }
}

inline void save_model(const Classifier& clf, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file '" + path + "'");
  out << serialize_model(clf);
  if (!out) throw DataError("failed writing model file '" + path + "'");
}

inline Classifier load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return deserialize_model(text);
  } catch (const ModelFormatError& e) {
    throw ModelFormatError(e.kind(), path + ": " + e.what());
  }
}

}  // namespace fntriage
