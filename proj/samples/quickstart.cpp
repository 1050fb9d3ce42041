// Train a random forest on a synthetic corpus and triage a few file names.
#include <iostream>

#include "fntriage/fntriage.hpp"

int main() {
  using namespace fntriage;

  const std::vector<std::string> categories = {"resume", "restaurant_menu", "press_release", "course_syllabus"};
  const Dataset train = synth_fixture(categories, 60, /*seed=*/1);

  TrainConfig cfg;
  cfg.kind = ModelKind::random_forest;
  cfg.seed = 7;
  const Classifier clf = train_classifier(train, cfg);

  std::cout << "keywords:";
  for (const auto& k : clf.keywords().keywords()) std::cout << ' ' << k;
  std::cout << "\n\n";

  const double threshold = 0.5;
  for (const char* name : {"john_resume_2024.pdf", "Coursesyllabus.pdf", "TheWillowRestaurantMenu.pdf",
                           "5bba5a94c8f1454f98d7b01be13289b9.pdf"}) {
    const Prediction p = clf.classify(name);
    std::cout << name << "\t" << clf.categories()[p.label] << "\t" << p.confidence << "\t"
              << (p.confidence > threshold ? "predict" : "defer") << "\n";
  }
}
