// Runs the five-step reasoning pipeline: `vot run` answers a single question
// instance, `vot bench` scores a JSONL dataset. The model behind it is either
// a scripted mock (--mock-script) or an OpenAI-style HTTP endpoint (--http,
// configured through VOT_API_BASE / VOT_API_KEY / VOT_MODEL plus flags).

#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "cli_common.hpp"
#include "vot/backend.hpp"
#include "vot/harness.hpp"
#include "vot/orchestrator.hpp"
#include "vot/stsg_json.hpp"

namespace {

struct BackendFlags {
  std::string mock_script;
  bool http = false;
  std::string model;
  int timeout_ms = 0;
};

void add_backend_flags(CLI::App* cmd, BackendFlags& flags) {
  cmd->add_option("--mock-script", flags.mock_script, "scripted-replies JSON file");
  cmd->add_flag("--http", flags.http, "use the HTTP backend (see VOT_API_BASE)");
  cmd->add_option("--model", flags.model, "HTTP backend: model name override");
  cmd->add_option("--timeout-ms", flags.timeout_ms, "HTTP backend: request timeout");
}

void add_pipeline_flags(CLI::App* cmd, vot::pipeline::VotConfig& config,
                        std::string& grounding) {
  cmd->add_option("--grounding,--mode", grounding, "model|oracle (default: model)");
  cmd->add_option("--hops", config.hops, "neighbor-scene radius (default: 2)");
  cmd->add_option("--max-retries", config.max_retries,
                  "failed verifications tolerated (default: 2)");
  cmd->add_option("--candidates", config.candidate_count_open_ended,
                  "answers to request for open-ended questions (default: 4)");
  cmd->add_option("--temperature", config.temperature, "sampling temperature (default: 0)");
}

std::unique_ptr<vot::backend::ChatBackend> make_backend(const BackendFlags& flags,
                                                        vot::pipeline::VotConfig& config) {
  if (flags.http && !flags.mock_script.empty()) {
    throw vot::Error(vot::ErrorCode::InvalidArgument,
                     "--http and --mock-script are mutually exclusive");
  }
  if (flags.http) {
    vot::backend::HttpConfig http = vot::backend::HttpConfig::from_env();
    if (!flags.model.empty()) http.model = flags.model;
    if (flags.timeout_ms > 0) http.timeout_ms = flags.timeout_ms;
    if (http.base_url.empty()) {
      throw vot::Error(vot::ErrorCode::InvalidArgument,
                       "--http requires VOT_API_BASE to be set");
    }
    config.backend = vot::pipeline::BackendKind::Http;
    return std::make_unique<vot::backend::HttpBackend>(http);
  }
  if (flags.mock_script.empty()) {
    throw vot::Error(vot::ErrorCode::InvalidArgument,
                     "pick a backend: --mock-script FILE or --http");
  }
  config.backend = vot::pipeline::BackendKind::Mock;
  return std::make_unique<vot::backend::MockBackend>(
      vot::backend::MockScript::load(flags.mock_script));
}

vot::pipeline::GroundingMode parse_grounding(const std::string& name) {
  if (name == "model") return vot::pipeline::GroundingMode::Model;
  if (name == "oracle") return vot::pipeline::GroundingMode::Oracle;
  throw vot::Error(vot::ErrorCode::InvalidArgument,
                   "--grounding must be model or oracle, got " + name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"five-step video question answering"};
  app.require_subcommand(1);

  BackendFlags run_backend;
  vot::pipeline::VotConfig run_config;
  std::string run_grounding = "model";
  std::string question_path;
  std::string stsg_path;
  std::string trace_path;
  auto* run = app.add_subcommand("run", "answer one question instance");
  run->add_option("--question", question_path, "instance JSON file")->required();
  run->add_option("--stsg", stsg_path, "attach a scene-graph JSON file to the instance");
  run->add_option("--trace", trace_path, "write the full reasoning trace here");
  add_backend_flags(run, run_backend);
  add_pipeline_flags(run, run_config, run_grounding);

  BackendFlags bench_backend;
  vot::pipeline::VotConfig bench_config;
  std::string bench_grounding = "model";
  std::string dataset_path;
  std::string report_path;
  std::string trace_dir;
  int jobs = 1;
  auto* bench = app.add_subcommand("bench", "score a JSONL dataset");
  bench->add_option("--dataset,--data", dataset_path, "JSONL instances, gold answers required")
      ->required();
  bench->add_option("--jobs", jobs, "worker threads (default: 1)");
  bench->add_option("--report,--out", report_path, "also write the report JSON here");
  bench->add_option("--trace-dir,--traces", trace_dir, "write per-instance traces here");
  add_backend_flags(bench, bench_backend);
  add_pipeline_flags(bench, bench_config, bench_grounding);

  if (const auto code = vot::cli::parse_or_exit(app, argc, argv)) return *code;

  return vot::cli::guarded([&]() -> int {
    if (run->parsed()) {
      run_config.grounding_mode = parse_grounding(run_grounding);
      const std::unique_ptr<vot::backend::ChatBackend> backend =
          make_backend(run_backend, run_config);

      nlohmann::json qj;
      try {
        qj = nlohmann::json::parse(vot::cli::read_input(question_path));
      } catch (const nlohmann::json::parse_error& e) {
        throw vot::Error(vot::ErrorCode::SchemaError, e.what());
      }
      vot::pipeline::QAInstance q = vot::pipeline::qa_from_json(qj);
      if (!stsg_path.empty()) {
        vot::stsg::STSG graph = vot::stsg::load_json_file(stsg_path);
        const vot::stsg::ValidationReport report = vot::stsg::validate(graph);
        if (!report.ok) {
          throw vot::Error(vot::ErrorCode::SchemaError,
                           stsg_path + ": " + report.violations.front().detail);
        }
        q.graph = std::move(graph);
      }
      const vot::pipeline::RunResult result = vot::pipeline::run_vot(q, *backend, run_config);

      if (!trace_path.empty()) {
        vot::cli::write_output(trace_path, result.trace.to_json().dump(2) + "\n");
      }
      nlohmann::json summary;
      summary["final"] = std::string(1, result.final);
      summary["retries"] = result.trace.retries;
      summary["unverified"] = result.trace.unverified;
      std::cout << summary.dump(2) << "\n";
      return 0;
    }

    // bench
    bench_config.grounding_mode = parse_grounding(bench_grounding);
    const std::unique_ptr<vot::backend::ChatBackend> backend =
        make_backend(bench_backend, bench_config);

    const vot::harness::Dataset dataset = vot::harness::load_dataset(dataset_path);
    vot::harness::BenchConfig config;
    config.vot = bench_config;
    config.jobs = jobs;
    if (!trace_dir.empty()) config.trace_dir = trace_dir;
    const vot::harness::BenchReport report =
        vot::harness::run_benchmark(dataset, *backend, config);

    const std::string text = report.to_json().dump(2) + "\n";
    if (!report_path.empty()) vot::cli::write_output(report_path, text);
    std::cout << text;
    return 0;
  });
}
