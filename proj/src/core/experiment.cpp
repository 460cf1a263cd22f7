#include "core/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/digest.hpp"
#include "core/errors.hpp"

namespace fs = std::filesystem;

namespace mars {
namespace {

using nlohmann::json;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for write: " + path.string());
  os << content;
  os.flush();
  if (!os) throw IoError("write failed: " + path.string());
}

std::vector<LocalityPoint> locality_curve(const std::vector<MemoryRequest>& stream,
                                          const std::vector<std::uint64_t>& windows,
                                          unsigned page_offset_bits) {
  std::vector<LocalityPoint> curve;
  curve.reserve(windows.size());
  for (std::uint64_t w : windows) {
    curve.push_back(LocalityPoint{w, stream_locality(stream, w, page_offset_bits)});
  }
  return curve;
}

json metrics_json(const RunMetrics& m) {
  json j;
  ChannelMetrics agg = m.aggregate();
  j["requests"] = m.requests;
  j["total_cycles"] = m.total_cycles;
  j["act"] = agg.acts;
  j["rd"] = agg.reads;
  j["wr"] = agg.writes;
  j["pre"] = agg.pres;
  j["cas"] = agg.cas();
  j["cas_per_act"] = agg.cas_per_act();
  j["bytes"] = m.total_bytes();
  j["bandwidth_bytes_per_cycle"] = m.bandwidth();
  j["data_bus_utilization"] = m.bus_utilization();
  json channels = json::array();
  for (std::size_t ch = 0; ch < m.channels.size(); ++ch) {
    const ChannelMetrics& c = m.channels[ch];
    json jc;
    jc["act"] = c.acts;
    jc["cas"] = c.cas();
    jc["cas_per_act"] = c.cas_per_act();
    jc["bandwidth_bytes_per_cycle"] = m.channel_bandwidth(ch);
    channels.push_back(jc);
  }
  j["channels"] = channels;
  json loc;
  for (const auto& [tap, curve] : m.locality) {
    json arr = json::array();
    for (const LocalityPoint& pt : curve) arr.push_back({pt.window, pt.value});
    loc[tap] = arr;
  }
  j["locality"] = loc;
  return j;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.1f%%", fraction * 100.0);
  return buf;
}

std::uint64_t parse_sweep_number(const std::string& text, const std::string& what) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(what + ": '" + text + "' is not a number");
  }
  return value;
}

ExperimentConfig apply_sweep_param(const ExperimentConfig& base, const std::string& param,
                                   const std::string& value) {
  ExperimentConfig cfg = base;
  if (param == "leaves") {
    std::uint64_t v = parse_sweep_number(value, "sweep leaves");
    if (v == 0) throw ConfigError("sweep leaves: value must be positive");
    cfg.workload.tree.leaves = v;
    if (v > 8 && v % 8 == 0) {
      cfg.workload.tree.fanouts = {v / 8, 8};
    } else {
      cfg.workload.tree.fanouts = {v};
    }
    const std::vector<StreamSpec>& pattern = base.workload.per_leaf;
    cfg.workload.per_leaf.clear();
    if (!pattern.empty()) {
      for (std::uint64_t i = 0; i < v; ++i) {
        cfg.workload.per_leaf.push_back(pattern[i % pattern.size()]);
      }
    }
  } else if (param == "request_q") {
    cfg.reorder.request_q = static_cast<std::uint32_t>(parse_sweep_number(value, "sweep request_q"));
  } else if (param == "pending_queue_depth") {
    cfg.dram.pending_queue_depth =
        static_cast<std::uint32_t>(parse_sweep_number(value, "sweep pending_queue_depth"));
  } else if (param == "drain_cap") {
    cfg.reorder.drain_cap = static_cast<std::uint32_t>(parse_sweep_number(value, "sweep drain_cap"));
  } else if (param == "seed") {
    cfg.seed = parse_sweep_number(value, "sweep seed");
  } else if (param == "sets_ways") {
    std::size_t x = value.find('x');
    if (x == std::string::npos || x == 0 || x + 1 == value.size()) {
      throw ConfigError("sweep sets_ways: expected '<sets>x<ways>', got '" + value + "'");
    }
    cfg.reorder.sets =
        static_cast<std::uint32_t>(parse_sweep_number(value.substr(0, x), "sweep sets"));
    cfg.reorder.ways =
        static_cast<std::uint32_t>(parse_sweep_number(value.substr(x + 1), "sweep ways"));
  } else {
    throw ConfigError("unknown sweep param '" + param +
                      "' (expected leaves, request_q, pending_queue_depth, sets_ways, drain_cap "
                      "or seed)");
  }
  cfg.name = base.name + "_" + param + "_" + value;
  cfg.output_dir = param + "_" + value;
  return cfg;
}

}  // namespace

std::string RunResult::summary() const {
  ChannelMetrics base_agg = baseline.aggregate();
  ChannelMetrics mars_agg = mars.aggregate();
  std::ostringstream os;
  os << "workload " << config.name << "  config " << config_key << "  requests "
     << baseline.requests << '\n';
  os << "baseline: cycles=" << baseline.total_cycles
     << " cas_per_act=" << fixed6(base_agg.cas_per_act())
     << " bandwidth=" << fixed6(baseline.bandwidth()) << " B/cycle\n";
  os << "mars:     cycles=" << mars.total_cycles << " cas_per_act=" << fixed6(mars_agg.cas_per_act())
     << " bandwidth=" << fixed6(mars.bandwidth()) << " B/cycle\n";
  os << "gain:     cas_per_act " << percent(improvement.cas_per_act_gain) << ", bandwidth "
     << percent(improvement.bandwidth_gain) << ", acts " << percent(-improvement.act_reduction)
     << ", cycles " << percent(-improvement.cycle_reduction) << '\n';
  return os.str();
}

RunResult run_experiment(const ExperimentConfig& cfg, const std::string& output_root,
                         bool write_traces) {
  cfg.validate();
  RunResult result;
  result.config = cfg;
  result.config_key = cfg.digest();

  const unsigned page_bits = cfg.page_offset_bits();
  std::vector<std::vector<MemoryRequest>> per_source = generate_per_source(cfg.workload, cfg.seed);
  std::vector<MemoryRequest> merged = merge(cfg.workload.tree, per_source);
  const std::uint64_t input_digest = stream_digest(merged);

  std::vector<LocalityPoint> source_curve;
  source_curve.reserve(cfg.windows.size());
  std::vector<const std::vector<MemoryRequest>*> source_ptrs;
  source_ptrs.reserve(per_source.size());
  for (const auto& s : per_source) source_ptrs.push_back(&s);
  for (std::uint64_t w : cfg.windows) {
    source_curve.push_back(LocalityPoint{w, multi_stream_locality(source_ptrs, w, page_bits)});
  }
  std::vector<LocalityPoint> merge_curve = locality_curve(merged, cfg.windows, page_bits);

  bool want_source = std::count(cfg.taps.begin(), cfg.taps.end(), "source") != 0;
  bool want_merge = std::count(cfg.taps.begin(), cfg.taps.end(), "merge") != 0;
  bool want_mars = std::count(cfg.taps.begin(), cfg.taps.end(), "mars") != 0;

  PassthroughFeeder base_feeder(merged);
  SimulationResult base_sim = simulate(cfg.dram, cfg.map, base_feeder, write_traces);
  if (stream_digest(base_feeder.forwarded()) != input_digest) {
    throw SimError("baseline run altered the request stream");
  }
  result.baseline = build_metrics("baseline", result.config_key, base_sim, cfg.dram);
  if (want_source) result.baseline.locality["source"] = source_curve;
  if (want_merge) result.baseline.locality["merge"] = merge_curve;

  ReorderFeeder mars_feeder(merged, cfg.reorder);
  SimulationResult mars_sim = simulate(cfg.dram, cfg.map, mars_feeder, write_traces);
  std::vector<MemoryRequest> mars_stream = mars_feeder.forwarded();
  {
    std::vector<MemoryRequest> sorted = mars_stream;
    std::sort(sorted.begin(), sorted.end(),
              [](const MemoryRequest& a, const MemoryRequest& b) { return a.seq < b.seq; });
    if (stream_digest(sorted) != input_digest) {
      throw SimError("reorder stage lost or altered requests");
    }
  }
  result.mars = build_metrics("mars", result.config_key, mars_sim, cfg.dram);
  if (want_source) result.mars.locality["source"] = source_curve;
  if (want_merge) result.mars.locality["merge"] = merge_curve;
  if (want_mars) result.mars.locality["mars"] = locality_curve(mars_stream, cfg.windows, page_bits);
  result.reorder_stats = mars_feeder.stats();

  result.improvement = compare_runs(result.baseline, result.mars);

  const bool persist = !output_root.empty();
  json record;
  record["name"] = cfg.name;
  record["config_key"] = result.config_key;
  record["config"] = cfg.to_json();
  record["request_count"] = merged.size();
  record["input_digest"] = hex64(input_digest);
  record["baseline"] = metrics_json(result.baseline);
  json mars_json = metrics_json(result.mars);
  {
    const ReorderStats& st = result.reorder_stats;
    json rj;
    rj["stall_queue_full"] = st.stall_queue_full;
    rj["stall_set_conflict"] = st.stall_set_conflict;
    rj["stall_order_q_full"] = st.stall_order_q_full;
    rj["stall_page_draining"] = st.stall_page_draining;
    rj["stall_total"] = st.stall_total();
    rj["peak_occupancy"] = st.peak_occupancy;
    rj["peak_live_pages"] = st.peak_live_pages;
    mars_json["reorder"] = rj;
  }
  record["mars"] = mars_json;
  {
    json imp;
    imp["cas_per_act_gain"] = result.improvement.cas_per_act_gain;
    imp["bandwidth_gain"] = result.improvement.bandwidth_gain;
    imp["act_reduction"] = result.improvement.act_reduction;
    imp["cycle_reduction"] = result.improvement.cycle_reduction;
    record["improvement"] = imp;
    json ref;
    ref["bandwidth_gain"] = kReferenceBandwidthGain;
    ref["cas_per_act_gain"] = kReferenceCasPerActGain;
    record["reference"] = ref;
  }
  json files = json::object();
  if (persist) {
    files["metrics"] = "metrics.csv";
    files["channel_metrics"] = "channel_metrics.csv";
    files["locality"] = "locality.csv";
    files["improvement"] = "improvement.csv";
    if (write_traces) {
      files["merged_requests"] = "traces/merged_requests.csv";
      files["mars_requests"] = "traces/mars_requests.csv";
      files["baseline_commands"] = "traces/baseline_commands.csv";
      files["mars_commands"] = "traces/mars_commands.csv";
    }
  }
  record["files"] = files;
  result.record_json = record.dump(2) + "\n";

  if (persist) {
    std::string run_name = cfg.output_dir.empty()
                               ? cfg.name + "_" + result.config_key.substr(0, 12)
                               : cfg.output_dir;
    fs::path dir = fs::path(output_root) / run_name;
    bool created = !fs::exists(dir);
    try {
      fs::create_directories(dir);
      write_file(dir / "run_record.json", result.record_json);
      std::vector<RunMetrics> both = {result.baseline, result.mars};
      std::ostringstream os;
      write_metrics_csv(os, both);
      write_file(dir / "metrics.csv", os.str());
      os.str("");
      write_channel_metrics_csv(os, both);
      write_file(dir / "channel_metrics.csv", os.str());
      os.str("");
      write_locality_csv(os, both);
      write_file(dir / "locality.csv", os.str());
      os.str("");
      write_improvement_csv(os, result.improvement);
      write_file(dir / "improvement.csv", os.str());
      if (write_traces) {
        fs::create_directories(dir / "traces");
        write_trace_file((dir / "traces/merged_requests.csv").string(), merged);
        write_trace_file((dir / "traces/mars_requests.csv").string(), mars_stream);
        write_command_trace_file((dir / "traces/baseline_commands.csv").string(), base_sim.trace,
                                 cfg.dram);
        write_command_trace_file((dir / "traces/mars_commands.csv").string(), mars_sim.trace,
                                 cfg.dram);
      }
    } catch (...) {
      if (created) {
        std::error_code ec;
        fs::remove_all(dir, ec);
      }
      throw;
    }
    result.dir = dir.string();
  }
  return result;
}

std::vector<std::string> split_values(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t pos = csv.find(',', start);
    std::string token =
        pos == std::string::npos ? csv.substr(start) : csv.substr(start, pos - start);
    std::size_t b = token.find_first_not_of(" \t");
    std::size_t e = token.find_last_not_of(" \t");
    token = b == std::string::npos ? "" : token.substr(b, e - b + 1);
    if (token.empty()) throw ConfigError("empty entry in value list '" + csv + "'");
    out.push_back(token);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

SweepResult sweep_experiment(const ExperimentConfig& base, const std::string& param,
                             const std::vector<std::string>& values,
                             const std::string& output_root, bool write_traces) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  SweepResult sweep;
  sweep.param = param;
  sweep.values = values;

  const bool persist = !output_root.empty();
  fs::path dir;
  bool created = false;
  if (persist) {
    dir = fs::path(output_root) / (base.name + "_sweep_" + param);
    created = !fs::exists(dir);
    fs::create_directories(dir);
    sweep.dir = dir.string();
  }
  try {
    std::ostringstream os;
    os << "param,value,config_key,baseline_cas_per_act,mars_cas_per_act,cas_per_act_gain,"
          "baseline_bandwidth,mars_bandwidth,bandwidth_gain,baseline_cycles,mars_cycles,"
          "cycle_reduction\n";
    for (const std::string& value : values) {
      ExperimentConfig cfg = apply_sweep_param(base, param, value);
      RunResult run = run_experiment(cfg, persist ? sweep.dir : "", write_traces);
      const ImprovementReport& imp = run.improvement;
      os << param << ',' << value << ',' << run.config_key << ','
         << fixed6(imp.baseline_cas_per_act) << ',' << fixed6(imp.mars_cas_per_act) << ','
         << fixed6(imp.cas_per_act_gain) << ',' << fixed6(imp.baseline_bandwidth) << ','
         << fixed6(imp.mars_bandwidth) << ',' << fixed6(imp.bandwidth_gain) << ','
         << imp.baseline_cycles << ',' << imp.mars_cycles << ',' << fixed6(imp.cycle_reduction)
         << '\n';
      sweep.runs.push_back(std::move(run));
    }
    sweep.summary_csv = os.str();
    if (persist) write_file(dir / "sweep.csv", sweep.summary_csv);
  } catch (...) {
    if (persist && created) {
      std::error_code ec;
      fs::remove_all(dir, ec);
    }
    throw;
  }
  return sweep;
}

}  // namespace mars
