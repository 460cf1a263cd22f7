#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mars/mars.h"

namespace {

int fail(mars_status st) {
  std::fprintf(stderr, "error: %s: %s\n", mars_status_name(st), mars_last_error());
  return static_cast<int>(st);
}

// Precedence: --output-root flag, then MARS_OUTPUT_ROOT, then ./runs.
std::string resolve_output_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  const char* env = std::getenv("MARS_OUTPUT_ROOT");
  if (env != nullptr && env[0] != '\0') return env;
  return "runs";
}

struct ConfigHandle {
  mars_config* ptr = nullptr;
  ~ConfigHandle() { mars_config_free(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MARS reordered memory traffic simulator"};
  app.set_version_flag("--version", mars_version());
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "simulate baseline and MARS for one config");
  std::string run_config;
  std::string run_root;
  bool run_no_traces = false;
  bool run_quiet = false;
  run_cmd->add_option("config", run_config, "experiment config (JSON)")->required();
  run_cmd->add_option("--output-root", run_root,
                      "where run directories go (default: $MARS_OUTPUT_ROOT or ./runs)");
  run_cmd->add_flag("--no-traces", run_no_traces, "skip request/command trace files");
  run_cmd->add_flag("--quiet", run_quiet, "print only the run directory");

  auto* sweep_cmd = app.add_subcommand("sweep", "re-run a config with one parameter varied");
  std::string sweep_config;
  std::string sweep_param;
  std::string sweep_values;
  std::string sweep_root;
  bool sweep_traces = false;
  sweep_cmd->add_option("config", sweep_config, "experiment config (JSON)")->required();
  sweep_cmd
      ->add_option("--param", sweep_param,
                   "leaves, request_q, pending_queue_depth, sets_ways, drain_cap or seed")
      ->required();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->required();
  sweep_cmd->add_option("--output-root", sweep_root,
                        "where the sweep directory goes (default: $MARS_OUTPUT_ROOT or ./runs)");
  sweep_cmd->add_flag("--traces", sweep_traces, "also write per-run trace files");

  auto* locality_cmd = app.add_subcommand("locality", "mean locality of a request trace file");
  std::string trace_path;
  std::vector<std::uint64_t> windows;
  std::uint32_t page_offset_bits = 0;
  locality_cmd->add_option("trace", trace_path, "request trace CSV")->required();
  locality_cmd->add_option("--window", windows, "window size in requests (repeatable)");
  locality_cmd->add_option("--page-offset-bits", page_offset_bits,
                           "page size as a bit count (default 12 = 4KB)");

  auto* report_cmd = app.add_subcommand("report", "rebuild summary and figures for a run");
  std::string report_dir;
  report_cmd->add_option("run_dir", report_dir, "run directory with run_record.json")->required();

  auto* validate_cmd = app.add_subcommand("validate", "check a config and print its digest");
  std::string validate_config;
  validate_cmd->add_option("config", validate_config, "experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(MARS_ERR_USAGE);
  }

  if (*validate_cmd) {
    ConfigHandle cfg;
    mars_status st = mars_config_load_file(validate_config.c_str(), &cfg.ptr);
    if (st != MARS_OK) return fail(st);
    char* digest = nullptr;
    st = mars_config_digest(cfg.ptr, &digest);
    if (st != MARS_OK) return fail(st);
    std::printf("ok %s\n", digest);
    mars_string_free(digest);
    return 0;
  }

  if (*run_cmd) {
    ConfigHandle cfg;
    mars_status st = mars_config_load_file(run_config.c_str(), &cfg.ptr);
    if (st != MARS_OK) return fail(st);
    std::string root = resolve_output_root(run_root);
    mars_run_record* rec = nullptr;
    st = mars_run_experiment(cfg.ptr, root.c_str(), run_no_traces ? 0 : 1, &rec);
    if (st != MARS_OK) return fail(st);
    if (run_quiet) {
      std::printf("%s\n", mars_run_dir(rec));
    } else {
      std::printf("%s", mars_run_summary(rec));
      std::printf("output: %s\n", mars_run_dir(rec));
    }
    mars_run_record_free(rec);
    return 0;
  }

  if (*sweep_cmd) {
    ConfigHandle cfg;
    mars_status st = mars_config_load_file(sweep_config.c_str(), &cfg.ptr);
    if (st != MARS_OK) return fail(st);
    std::string root = resolve_output_root(sweep_root);
    mars_run_record** recs = nullptr;
    size_t count = 0;
    st = mars_sweep_experiment(cfg.ptr, sweep_param.c_str(), sweep_values.c_str(), root.c_str(),
                               sweep_traces ? 1 : 0, &recs, &count);
    if (st != MARS_OK) return fail(st);
    for (size_t i = 0; i < count; ++i) {
      std::printf("%s", mars_run_summary(recs[i]));
      std::printf("output: %s\n\n", mars_run_dir(recs[i]));
    }
    mars_run_record_list_free(recs, count);
    return 0;
  }

  if (*locality_cmd) {
    if (windows.empty()) windows = {128, 512, 2048, 8192, 16384};
    char* csv = nullptr;
    mars_status st = mars_trace_locality(trace_path.c_str(), windows.data(), windows.size(),
                                         page_offset_bits, &csv);
    if (st != MARS_OK) return fail(st);
    std::fputs(csv, stdout);
    mars_string_free(csv);
    return 0;
  }

  if (*report_cmd) {
    char* summary = nullptr;
    mars_status st = mars_report(report_dir.c_str(), &summary);
    if (st != MARS_OK) return fail(st);
    std::fputs(summary, stdout);
    mars_string_free(summary);
    return 0;
  }

  return static_cast<int>(MARS_ERR_USAGE);
}
