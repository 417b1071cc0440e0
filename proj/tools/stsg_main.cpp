// Scene-graph utility: validate/serialize/parse/tracklet over JSON and the
// textual expression format. Graphs stream through stdin/stdout by default.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cli_common.hpp"
#include "vot/stsg.hpp"
#include "vot/stsg_json.hpp"
#include "vot/stsg_query.hpp"
#include "vot/stsg_text.hpp"

namespace {

using vot::cli::read_input;
using vot::cli::write_output;

vot::stsg::STSG read_graph(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_input(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw vot::Error(vot::ErrorCode::SchemaError, e.what());
  }
  return vot::stsg::from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spatial-temporal scene graph tool"};
  app.require_subcommand(1);

  std::string in_path = "-";
  std::string out_path = "-";

  auto* validate = app.add_subcommand("validate", "check a graph JSON for violations");
  validate->add_option("--in", in_path, "graph JSON (default: stdin)");

  auto* serialize = app.add_subcommand("serialize", "graph JSON -> textual expression");
  serialize->add_option("--in", in_path, "graph JSON (default: stdin)");
  serialize->add_option("--out", out_path, "expression output (default: stdout)");

  auto* parse = app.add_subcommand("parse", "textual expression -> graph JSON");
  parse->add_option("--in", in_path, "expression text (default: stdin)");
  parse->add_option("--out", out_path, "graph JSON output (default: stdout)");

  std::string target_id;
  bool tracklet_json = false;
  auto* tracklet = app.add_subcommand("tracklet", "extract one instance's tracklet");
  tracklet->add_option("--target", target_id, "instance id, e.g. car-1")->required();
  tracklet->add_flag("--json", tracklet_json, "emit graph JSON instead of the expression");
  tracklet->add_option("--in", in_path, "graph JSON (default: stdin)");
  tracklet->add_option("--out", out_path, "output (default: stdout)");

  if (const auto code = vot::cli::parse_or_exit(app, argc, argv)) return *code;

  return vot::cli::guarded([&]() -> int {
    if (validate->parsed()) {
      const vot::stsg::STSG graph = read_graph(in_path);
      const vot::stsg::ValidationReport report = vot::stsg::validate(graph);
      if (report.ok) {
        std::cout << "OK\n";
        return 0;
      }
      for (const vot::stsg::Violation& v : report.violations) {
        std::cout << vot::stsg::to_string(v.code);
        if (v.frame_index) std::cout << " frame=" << *v.frame_index;
        std::cout << " " << v.detail << "\n";
      }
      return 2;
    }
    if (serialize->parsed()) {
      const vot::stsg::STSG graph = read_graph(in_path);
      write_output(out_path, vot::stsg::serialize(graph).text + "\n");
      return 0;
    }
    if (parse->parsed()) {
      const vot::stsg::STSG graph = vot::stsg::parse(read_input(in_path));
      write_output(out_path, vot::stsg::to_json(graph).dump(2) + "\n");
      return 0;
    }
    // tracklet
    const vot::stsg::STSG graph = read_graph(in_path);
    const vot::stsg::Tracklet t = vot::stsg::extract_tracklet(graph, target_id);
    const vot::stsg::STSG partial = vot::stsg::tracklet_stsg(graph, t);
    if (tracklet_json) {
      write_output(out_path, vot::stsg::to_json(partial).dump(2) + "\n");
    } else {
      write_output(out_path, vot::stsg::serialize(partial).text + "\n");
    }
    return 0;
  });
}
