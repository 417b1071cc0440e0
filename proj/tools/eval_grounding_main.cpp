// Compares a predicted scene graph against a gold one: detection
// precision/recall at an IoU threshold, mean IoU over matches, triplet
// precision/recall/F1, and per-instance temporal overlap.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cli_common.hpp"
#include "vot/grounding_eval.hpp"
#include "vot/stsg_json.hpp"

int main(int argc, char** argv) {
  CLI::App app{"scene-graph grounding metrics"};

  std::string pred_path;
  std::string gold_path;
  double threshold = 0.5;

  app.add_option("--pred", pred_path, "predicted graph JSON")->required();
  app.add_option("--gold", gold_path, "gold graph JSON")->required();
  app.add_option("--threshold", threshold, "detection IoU threshold (default: 0.5)");

  if (const auto code = vot::cli::parse_or_exit(app, argc, argv)) return *code;

  return vot::cli::guarded([&]() -> int {
    const vot::stsg::STSG pred = vot::stsg::load_json_file(pred_path);
    const vot::stsg::STSG gold = vot::stsg::load_json_file(gold_path);
    const vot::eval::GroundingReport report = vot::eval::evaluate(pred, gold, threshold);
    std::cout << vot::eval::to_json(report).dump(2) << "\n";
    return 0;
  });
}
