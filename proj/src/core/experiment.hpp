#pragma once

#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/metrics.hpp"
#include "core/pipeline.hpp"

namespace mars {

struct RunResult {
  ExperimentConfig config;
  std::string config_key;
  std::string dir;  // run directory; empty when nothing was persisted
  RunMetrics baseline;
  RunMetrics mars;
  ImprovementReport improvement;
  ReorderStats reorder_stats;
  std::string record_json;  // contents of run_record.json

  std::string summary() const;  // few-line human-readable digest of the run
};

// Simulate baseline and MARS over the identical generated request stream and
// compare. With a non-empty output_root, persists run_record.json, the
// metrics/locality/improvement CSVs and (optionally) request and command
// traces under <output_root>/<name>_<digest prefix>/; a failed run removes
// the directory it created rather than leaving partial output behind.
RunResult run_experiment(const ExperimentConfig& cfg, const std::string& output_root,
                         bool write_traces = true);

struct SweepResult {
  std::string param;
  std::vector<std::string> values;
  std::vector<RunResult> runs;
  std::string dir;          // sweep directory, empty when not persisted
  std::string summary_csv;  // contents of sweep.csv
};

// Re-run the experiment with one parameter varied. Supported params:
// leaves, request_q, pending_queue_depth, sets_ways (as "SxW"), drain_cap,
// seed. Runs land in subdirectories of one sweep directory.
SweepResult sweep_experiment(const ExperimentConfig& base, const std::string& param,
                             const std::vector<std::string>& values,
                             const std::string& output_root, bool write_traces = false);

std::vector<std::string> split_values(const std::string& csv);

}  // namespace mars
