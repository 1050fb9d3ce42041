#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "fntriage/cli.hpp"

using namespace fntriage;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = cli::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

std::string read_file(const std::string& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("fntriage_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    auto ds = synth_fixture({"resume", "restaurant_menu", "course_syllabus"}, 30, 5);
    auto amb = synth_ambiguous(ds.categories, 10, 6);
    auto oos = synth_out_of_scope(6, 7);
    ds.records.insert(ds.records.end(), amb.begin(), amb.end());
    ds.records.insert(ds.records.end(), oos.begin(), oos.end());
    save_dataset(Dataset::from_records(ds.records), path("data.csv"));
    save_dataset(synth_fixture({"resume", "restaurant_menu", "course_syllabus"}, 8, 99), path("test.jsonl"));
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::string path(const std::string& name) { return (dir_ / name).string(); }

  static std::string trained_model(const std::string& kind) {
    const auto model = path("model_" + kind + ".json");
    if (!fs::exists(model)) {
      const auto r = run_cli({"train", "--train", path("data.csv"), "--out", model, "--model", kind, "--trees", "20"});
      EXPECT_EQ(r.code, 0) << r.err;
    }
    return model;
  }

  static inline fs::path dir_;
};

}  // namespace

TEST_F(CliTest, TrainThenPredict) {
  const auto model = trained_model("rf");
  const auto r = run_cli({"predict", "--model-file", model, "--name", "john_resume_2024.pdf"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto line = lines_of(r.out).at(0);
  EXPECT_EQ(line.rfind("john_resume_2024.pdf\tresume\t", 0), 0u) << line;

  // Identical argv, identical output.
  EXPECT_EQ(run_cli({"predict", "--model-file", model, "--name", "john_resume_2024.pdf"}).out, r.out);

  const auto nb = run_cli({"predict", "--model-file", trained_model("nb"), "--name", "Restaurant-Menu.pdf"});
  ASSERT_EQ(nb.code, 0) << nb.err;
  EXPECT_NE(nb.out.find("\trestaurant_menu\t"), std::string::npos) << nb.out;
}

TEST_F(CliTest, PredictReadsStdinOneLinePerName) {
  const auto r = run_cli({"predict", "--model-file", trained_model("rf"), "--threshold", "1"},
                         "a_resume.pdf\nlunch_menu.pdf\n3f9a0c.pdf\n");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = lines_of(r.out);
  ASSERT_EQ(lines.size(), 3u);
  for (const auto& l : lines) EXPECT_TRUE(l.ends_with("\tdefer")) << l;
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run_cli({"predict", "--name", "x.pdf"}).code, 1);
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"train", "--train", path("data.csv"), "--out", path("m.json"), "--model", "svm"}).code, 1);
  const auto missing = run_cli({"predict", "--model-file", path("nope.json"), "--name", "x.pdf"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("nope.json"), std::string::npos);
  EXPECT_EQ(run_cli({"train", "--train", path("nope.csv"), "--out", path("m.json")}).code, 2);

  std::ofstream(path("bad.json")) << "{\"format_version\": 1";
  EXPECT_EQ(run_cli({"predict", "--model-file", path("bad.json"), "--name", "x.pdf"}).code, 2);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST_F(CliTest, TokenizeAndBuildKeywords) {
  auto r = run_cli({"tokenize", "TcallsenResume2020v0710-aem-react.pdf"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "tcallsen resume 2020 v 0710 aem react pdf\n");

  const auto kw = path("kw.json");
  r = run_cli({"build-keywords", "--train", path("data.csv"), "--k", "0.05", "--out", kw});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run_cli({"tokenize", "--keywords", kw}, "Coursesyllabus.pdf\nlunchmenus.pdf\n");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines_of(r.out).at(0), "course syllabus pdf");
  EXPECT_EQ(lines_of(r.out).size(), 2u);
}

TEST_F(CliTest, EvaluateSweepCostCurveBench) {
  auto r = run_cli({"evaluate", "--data", path("data.csv"), "--model", "nb", "--json", path("rep.json"), "--csv",
                    path("thr.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("accuracy\t"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("rep.json")));
  EXPECT_EQ(lines_of(read_file(path("thr.csv"))).size(), 102u);

  r = run_cli({"evaluate", "--data", path("data.csv"), "--test", path("test.jsonl"), "--model", "nb"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("indicative\t24"), std::string::npos) << r.out;

  r = run_cli({"sweep", "--data", path("data.csv"), "--model", "nb", "--k-min", "0.1", "--k-max", "0.3", "--k-step",
               "0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines_of(r.out).size(), 4u);

  r = run_cli({"cost-curve", "--model-file", trained_model("nb"), "--data", path("data.csv"), "--step", "0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines_of(r.out).size(), 12u);

  r = run_cli({"bench", "--model-file", trained_model("nb"), "--name", "a.pdf", "--warmup", "0", "--reps", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("samples").get<int>(), 2);
  EXPECT_EQ(run_cli({"bench", "--model-file", trained_model("nb")}).code, 1);
}

TEST_F(CliTest, CalibratedThresholdIsStored) {
  const auto model = path("calibrated.json");
  const auto r = run_cli({"train", "--train", path("data.csv"), "--out", model, "--model", "nb", "--calibrate-folds",
                          "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("threshold"), std::string::npos) << r.out;
  EXPECT_TRUE(load_model(model).threshold().has_value());
}
