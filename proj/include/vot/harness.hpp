#pragma once

// Dataset loading and benchmark execution for the reasoning pipeline.
//
// Datasets are JSONL: one question instance per line (blank lines are
// skipped). Benchmarks run every instance through run_vot — each on a fresh
// backend session, spread over a configurable number of worker threads — and
// produce a report whose canonical JSON form is byte-identical across
// re-runs and across thread counts.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vot/backend.hpp"
#include "vot/orchestrator.hpp"

namespace vot::harness {

struct Dataset {
  std::vector<pipeline::QAInstance> instances;
};

// Errors: IO_ERROR (unreadable file), SCHEMA_ERROR ("line N: ..." for a bad
// record or a duplicate id).
Dataset load_dataset(const std::filesystem::path& path);

struct BenchConfig {
  pipeline::VotConfig vot;
  int jobs = 1;  // worker threads, >= 1
  // When set, a <sanitized-id>.json trace (or <sanitized-id>.error.json) is
  // written per instance; the directory is created if missing.
  std::optional<std::filesystem::path> trace_dir;
};

struct InstanceResult {
  std::string id;
  char gold = '?';
  char predicted = '?';  // '?' when the run failed
  bool correct = false;
  bool unverified = false;
  int retries = 0;
  std::optional<std::string> error;
};

struct BenchReport {
  int n_instances = 0;
  int n_correct = 0;
  int n_errors = 0;
  int n_unverified = 0;
  double accuracy = 0.0;  // n_correct / n_instances
  std::string model_id;
  std::vector<InstanceResult> results;  // sorted by instance id
  std::optional<std::string> trace_dir;

  // Everything, including trace_dir when set.
  nlohmann::json to_json() const;
  // Deterministic subset: drops trace_dir, keeps all counts and results.
  nlohmann::json canonical_json() const;
};

// Instance ids become file names with every character outside
// [A-Za-z0-9._-] replaced by '_'.
std::string sanitize_id(const std::string& id);

// Precondition: every instance is multi-choice and carries a gold letter
// (INVALID_ARGUMENT naming the offending instance otherwise). A failed run
// counts as incorrect, increments n_errors, and carries its message in the
// instance result.
BenchReport run_benchmark(const Dataset& dataset, backend::ChatBackend& backend,
                          const BenchConfig& config);

}  // namespace vot::harness
