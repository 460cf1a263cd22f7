#include "mars/mars.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/errors.hpp"
#include "core/experiment.hpp"
#include "core/metrics.hpp"
#include "core/report.hpp"
#include "core/traffic.hpp"

struct mars_config {
  mars::ExperimentConfig cfg;
};

struct mars_run_record {
  mars::RunResult run;
  std::string summary;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

mars_status usage_error(const char* message) {
  g_last_error = message;
  return MARS_ERR_USAGE;
}

template <typename Fn>
mars_status guarded(Fn&& fn) {
  try {
    fn();
    return MARS_OK;
  } catch (const mars::ConfigError& e) {
    g_last_error = e.what();
    return MARS_ERR_CONFIG;
  } catch (const mars::IoError& e) {
    g_last_error = e.what();
    return MARS_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MARS_ERR_RUNTIME;
  }
}

mars_run_record* make_record(mars::RunResult&& run) {
  auto* rec = new mars_run_record;
  rec->run = std::move(run);
  rec->summary = rec->run.summary();
  return rec;
}

}  // namespace

extern "C" {

const char* mars_version(void) { return "1.0.0"; }

const char* mars_status_name(mars_status status) {
  switch (status) {
    case MARS_OK: return "ok";
    case MARS_ERR_CONFIG: return "config";
    case MARS_ERR_IO: return "io";
    case MARS_ERR_USAGE: return "usage";
    case MARS_ERR_RUNTIME: return "runtime";
  }
  return "unknown";
}

const char* mars_last_error(void) { return g_last_error.c_str(); }

void mars_string_free(char* s) { std::free(s); }

mars_status mars_config_default(mars_config** out) {
  if (out == nullptr) return usage_error("mars_config_default: out is NULL");
  return guarded([&] { *out = new mars_config{mars::default_config()}; });
}

mars_status mars_config_load_file(const char* path, mars_config** out) {
  if (path == nullptr) return usage_error("mars_config_load_file: path is NULL");
  if (out == nullptr) return usage_error("mars_config_load_file: out is NULL");
  return guarded([&] { *out = new mars_config{mars::load_config_file(path)}; });
}

mars_status mars_config_load_string(const char* text, mars_config** out) {
  if (text == nullptr) return usage_error("mars_config_load_string: text is NULL");
  if (out == nullptr) return usage_error("mars_config_load_string: out is NULL");
  return guarded([&] { *out = new mars_config{mars::load_config_string(text)}; });
}

mars_status mars_config_digest(const mars_config* cfg, char** out) {
  if (cfg == nullptr) return usage_error("mars_config_digest: cfg is NULL");
  if (out == nullptr) return usage_error("mars_config_digest: out is NULL");
  return guarded([&] { *out = dup_string(cfg->cfg.digest()); });
}

void mars_config_free(mars_config* cfg) { delete cfg; }

mars_status mars_run_experiment(const mars_config* cfg, const char* output_root,
                                int write_traces, mars_run_record** out) {
  if (cfg == nullptr) return usage_error("mars_run_experiment: cfg is NULL");
  if (out == nullptr) return usage_error("mars_run_experiment: out is NULL");
  return guarded([&] {
    std::string root = output_root == nullptr ? "" : output_root;
    *out = make_record(mars::run_experiment(cfg->cfg, root, write_traces != 0));
  });
}

mars_status mars_sweep_experiment(const mars_config* cfg, const char* param,
                                  const char* values_csv, const char* output_root,
                                  int write_traces, mars_run_record*** out_records,
                                  size_t* out_count) {
  if (cfg == nullptr) return usage_error("mars_sweep_experiment: cfg is NULL");
  if (param == nullptr) return usage_error("mars_sweep_experiment: param is NULL");
  if (values_csv == nullptr) return usage_error("mars_sweep_experiment: values_csv is NULL");
  if (out_records == nullptr || out_count == nullptr) {
    return usage_error("mars_sweep_experiment: output pointer is NULL");
  }
  return guarded([&] {
    std::string root = output_root == nullptr ? "" : output_root;
    mars::SweepResult sweep = mars::sweep_experiment(cfg->cfg, param,
                                                     mars::split_values(values_csv), root,
                                                     write_traces != 0);
    auto** records = static_cast<mars_run_record**>(
        std::malloc(sizeof(mars_run_record*) * sweep.runs.size()));
    if (records == nullptr) throw std::bad_alloc();
    size_t built = 0;
    try {
      for (; built < sweep.runs.size(); ++built) {
        records[built] = make_record(std::move(sweep.runs[built]));
      }
    } catch (...) {
      for (size_t i = 0; i < built; ++i) delete records[i];
      std::free(records);
      throw;
    }
    *out_records = records;
    *out_count = sweep.runs.size();
  });
}

const char* mars_run_summary(const mars_run_record* rec) {
  return rec == nullptr ? "" : rec->summary.c_str();
}

const char* mars_run_dir(const mars_run_record* rec) {
  return rec == nullptr ? "" : rec->run.dir.c_str();
}

const char* mars_run_record_json(const mars_run_record* rec) {
  return rec == nullptr ? "" : rec->run.record_json.c_str();
}

void mars_run_record_free(mars_run_record* rec) { delete rec; }

void mars_run_record_list_free(mars_run_record** records, size_t count) {
  if (records == nullptr) return;
  for (size_t i = 0; i < count; ++i) delete records[i];
  std::free(records);
}

mars_status mars_trace_locality(const char* trace_path, const uint64_t* windows,
                                size_t window_count, uint32_t page_offset_bits, char** out_csv) {
  if (trace_path == nullptr) return usage_error("mars_trace_locality: trace_path is NULL");
  if (windows == nullptr || window_count == 0) {
    return usage_error("mars_trace_locality: windows is empty");
  }
  if (out_csv == nullptr) return usage_error("mars_trace_locality: out_csv is NULL");
  return guarded([&] {
    unsigned bits = page_offset_bits == 0 ? mars::kDefaultPageOffsetBits : page_offset_bits;
    std::vector<mars::MemoryRequest> stream = mars::read_trace_file(trace_path);
    std::string csv = "window,mean_locality\n";
    for (size_t i = 0; i < window_count; ++i) {
      if (windows[i] == 0) throw mars::ConfigError("locality window must be positive");
      csv += std::to_string(windows[i]) + "," +
             mars::fixed6(mars::stream_locality(stream, windows[i], bits)) + "\n";
    }
    *out_csv = dup_string(csv);
  });
}

mars_status mars_report(const char* run_dir, char** out_summary) {
  if (run_dir == nullptr) return usage_error("mars_report: run_dir is NULL");
  if (out_summary == nullptr) return usage_error("mars_report: out_summary is NULL");
  return guarded([&] { *out_summary = dup_string(mars::report_run(run_dir)); });
}

}  // extern "C"
