#include "vot/harness.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <thread>

#include "vot/errors.hpp"

namespace vot::harness {

namespace {

std::string letter_str(char letter) { return std::string(1, letter); }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out.flush()) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());

  Dataset dataset;
  std::set<std::string> seen;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::SchemaError, where + e.what());
    }
    pipeline::QAInstance instance;
    try {
      instance = pipeline::qa_from_json(j);
    } catch (const Error& e) {
      throw Error(ErrorCode::SchemaError, where + e.what());
    }
    if (!seen.insert(instance.id).second) {
      throw Error(ErrorCode::SchemaError, where + "duplicate id \"" + instance.id + "\"");
    }
    dataset.instances.push_back(std::move(instance));
  }
  return dataset;
}

std::string sanitize_id(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    const bool keep = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                      (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    if (!keep) c = '_';
  }
  return out;
}

nlohmann::json BenchReport::canonical_json() const {
  nlohmann::json j;
  j["accuracy"] = accuracy;
  j["model_id"] = model_id;
  j["n_correct"] = n_correct;
  j["n_errors"] = n_errors;
  j["n_instances"] = n_instances;
  j["n_unverified"] = n_unverified;
  nlohmann::json results_json = nlohmann::json::array();
  for (const InstanceResult& r : results) {
    nlohmann::json rj;
    rj["correct"] = r.correct;
    if (r.error) rj["error"] = *r.error;
    rj["gold"] = letter_str(r.gold);
    rj["id"] = r.id;
    rj["predicted"] = letter_str(r.predicted);
    rj["retries"] = r.retries;
    rj["unverified"] = r.unverified;
    results_json.push_back(std::move(rj));
  }
  j["results"] = std::move(results_json);
  return j;
}

nlohmann::json BenchReport::to_json() const {
  nlohmann::json j = canonical_json();
  if (trace_dir) j["trace_dir"] = *trace_dir;
  return j;
}

BenchReport run_benchmark(const Dataset& dataset, backend::ChatBackend& backend,
                          const BenchConfig& config) {
  if (config.jobs < 1) throw Error(ErrorCode::InvalidArgument, "jobs must be >= 1");
  pipeline::check_config(config.vot);
  for (const pipeline::QAInstance& q : dataset.instances) {
    if (q.options.empty()) {
      throw Error(ErrorCode::InvalidArgument,
                  "instance \"" + q.id + "\" has no answer options");
    }
    if (!q.gold.has_value()) {
      throw Error(ErrorCode::InvalidArgument,
                  "instance \"" + q.id + "\" has no gold answer");
    }
  }
  if (config.trace_dir) std::filesystem::create_directories(*config.trace_dir);

  std::vector<InstanceResult> results(dataset.instances.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= dataset.instances.size()) return;
      const pipeline::QAInstance& q = dataset.instances[i];
      InstanceResult& r = results[i];
      r.id = q.id;
      r.gold = *q.gold;
      try {
        const pipeline::RunResult run = pipeline::run_vot(q, backend, config.vot);
        r.predicted = run.final;
        r.correct = run.final == r.gold;
        r.unverified = run.trace.unverified;
        r.retries = run.trace.retries;
        if (config.trace_dir) {
          write_text_file(*config.trace_dir / (sanitize_id(q.id) + ".json"),
                          run.trace.to_json().dump(2) + "\n");
        }
      } catch (const std::exception& e) {
        r.predicted = '?';
        r.correct = false;
        r.error = e.what();
        if (config.trace_dir) {
          const nlohmann::json ej = {{"error", *r.error}, {"id", q.id}};
          write_text_file(*config.trace_dir / (sanitize_id(q.id) + ".error.json"),
                          ej.dump(2) + "\n");
        }
      }
    }
  };

  const int jobs = std::min<int>(config.jobs, std::max<std::size_t>(dataset.instances.size(), 1));
  std::vector<std::thread> threads;
  for (int t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (std::thread& t : threads) t.join();

  std::sort(results.begin(), results.end(),
            [](const InstanceResult& a, const InstanceResult& b) { return a.id < b.id; });

  BenchReport report;
  report.n_instances = static_cast<int>(results.size());
  for (const InstanceResult& r : results) {
    report.n_correct += r.correct ? 1 : 0;
    report.n_errors += r.error.has_value() ? 1 : 0;
    report.n_unverified += r.unverified ? 1 : 0;
  }
  report.accuracy =
      report.n_instances == 0 ? 0.0 : static_cast<double>(report.n_correct) / report.n_instances;
  report.model_id = backend.model_id();
  report.results = std::move(results);
  if (config.trace_dir) report.trace_dir = config.trace_dir->string();
  return report;
}

}  // namespace vot::harness
