// Acceptance gate for the simulator. Each criterion prints exactly one
// PASS/FAIL line; the exit code is the number of failed criteria.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "core/config.hpp"
#include "core/dram.hpp"
#include "core/experiment.hpp"
#include "core/metrics.hpp"
#include "core/pipeline.hpp"
#include "core/reorder.hpp"
#include "core/traffic.hpp"

using namespace mars;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned thresholds. The reference evaluation reports +69% CAS/ACT, +11%
// bandwidth and >2x CAS/ACT on WL1/WL5; the floors leave head room for the
// model's simplifications while still demanding most of the effect.
constexpr double kPooledCasPerActGainFloor = 0.50;
constexpr double kPooledBandwidthGainFloor = 0.05;
constexpr double kPerWorkloadCasPerActRatioFloor = 1.5;
constexpr double kLocalityProbeBudgetSeconds = 30.0;
constexpr double kAbSuiteBudgetSeconds = 60.0;

const std::vector<std::uint64_t> kWindows = {128, 512, 2048, 8192, 16384};
const std::vector<std::uint64_t> kAbSeeds = {1, 2, 3};
const std::vector<std::string> kPresets = {"WL1", "WL2", "WL3", "WL4", "WL5"};

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s %d %s: %s\n", pass ? "PASS" : "FAIL", criterion, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

MemoryRequest page_request(std::uint64_t seq, std::uint64_t page) {
  MemoryRequest r;
  r.seq = seq;
  r.addr = PhysicalAddress{page << 12};
  return r;
}

std::vector<MemoryRequest> group_by_page(const std::vector<MemoryRequest>& input) {
  std::vector<std::uint64_t> order;
  std::map<std::uint64_t, std::vector<MemoryRequest>> buckets;
  for (const auto& r : input) {
    auto [it, fresh] = buckets.try_emplace(r.page().value);
    if (fresh) order.push_back(r.page().value);
    it->second.push_back(r);
  }
  std::vector<MemoryRequest> out;
  out.reserve(input.size());
  for (std::uint64_t p : order) {
    for (const auto& r : buckets[p]) out.push_back(r);
  }
  return out;
}

std::vector<TraceRow> to_rows(const std::vector<DramCommand>& trace, const DramConfig& cfg) {
  std::vector<TraceRow> rows;
  rows.reserve(trace.size());
  for (const DramCommand& c : trace) {
    rows.push_back(TraceRow{c.issue_cycle, c.coord.channel, c.coord.rank * cfg.banks + c.coord.bank,
                            c.kind, c.coord.row, c.coord.column, c.seq});
  }
  return rows;
}

// ---- locality trend probe -------------------------------------------------

WorkloadScale probe_scale(std::uint64_t leaves, std::vector<std::uint64_t> fanouts) {
  WorkloadScale s;
  s.leaves = leaves;
  s.fanouts = std::move(fanouts);
  s.pages_per_source = 1;       // every source hammers one page
  s.requests_per_page = 16384;  // covers the largest window exactly
  return s;
}

struct LocalityProbe {
  std::vector<std::vector<double>> per_source;  // [source][window]
  std::vector<double> merged;                   // [window]
};

LocalityProbe run_probe(std::uint64_t leaves, std::vector<std::uint64_t> fanouts) {
  const Workload wl = workload_preset("WL1", probe_scale(leaves, std::move(fanouts)));
  const auto sources = generate_per_source(wl, 1);
  const auto merged = merge(wl.tree, sources);
  LocalityProbe probe;
  probe.per_source.resize(sources.size());
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const auto pages = pages_of(sources[s]);
    for (std::uint64_t w : kWindows) {
      probe.per_source[s].push_back(mean_window_locality(pages, w));
    }
  }
  const auto merged_pages = pages_of(merged);
  for (std::uint64_t w : kWindows) {
    probe.merged.push_back(mean_window_locality(merged_pages, w));
  }
  return probe;
}

void criterion_locality_trend() {
  const auto start = Clock::now();
  const LocalityProbe p24 = run_probe(24, {3, 8});
  const LocalityProbe p40 = run_probe(40, {5, 8});
  const double elapsed = seconds_since(start);

  bool sources_increase = true;
  for (const auto& curve : p24.per_source) {
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
      if (!(curve[i] < curve[i + 1])) sources_increase = false;
    }
  }
  bool merged_below_sources = true;
  for (std::size_t i = 0; i < kWindows.size(); ++i) {
    for (const auto& curve : p24.per_source) {
      if (!(p24.merged[i] < curve[i])) merged_below_sources = false;
    }
  }
  bool wider_merge_lower = true;
  for (std::size_t i = 0; i < kWindows.size(); ++i) {
    if (!(p40.merged[i] < p24.merged[i])) wider_merge_lower = false;
  }
  const bool in_budget = elapsed < kLocalityProbeBudgetSeconds;

  report(1, "source vs merged locality trend",
         sources_increase && merged_below_sources && wider_merge_lower && in_budget,
         fmt("24-source curves increase over %zu windows (%d), merged stays below every source "
             "(%d), 40-source merged below 24-source (%d); merged w=128: %.2f vs %.2f; %.1fs "
             "(budget %.0fs)",
             kWindows.size(), sources_increase ? 1 : 0, merged_below_sources ? 1 : 0,
             wider_merge_lower ? 1 : 0, p24.merged.front(), p40.merged.front(), elapsed,
             kLocalityProbeBudgetSeconds));
}

// ---- A/B suite over the workload presets ----------------------------------

struct AbTotals {
  std::uint64_t cas = 0;
  std::uint64_t act = 0;
  std::uint64_t bytes = 0;
  std::uint64_t cycles = 0;

  double cas_per_act() const { return act == 0 ? 0.0 : double(cas) / double(act); }
  double bandwidth() const { return cycles == 0 ? 0.0 : double(bytes) / double(cycles); }
};

struct AbRun {
  std::string workload;
  std::uint64_t seed = 0;
  AbTotals base;
  AbTotals mars;
};

struct AbSuite {
  std::vector<AbRun> runs;
  std::uint64_t requests = 0;
  std::uint64_t trace_rows = 0;
  std::uint64_t violations = 0;
  double elapsed = 0.0;
};

AbTotals totals_of(const SimulationResult& sim, const DramConfig& cfg) {
  AbTotals t;
  for (const ChannelCounters& ch : sim.channels) {
    t.cas += ch.cas_count();
    t.act += ch.act_count;
  }
  t.bytes = t.cas * (cfg.burst_length / 2) * cfg.bus_bytes_per_beat * 2;
  t.cycles = sim.total_cycles;
  return t;
}

AbSuite run_ab_suite() {
  AbSuite suite;
  const auto start = Clock::now();
  const DramConfig dram;
  const MemoryMap map = make_page_contiguous_map(dram.map_dimensions());
  const ReorderConfig reorder;

  for (const std::string& preset : kPresets) {
    const Workload wl = workload_preset(preset, WorkloadScale{});
    for (std::uint64_t seed : kAbSeeds) {
      const auto merged = generate_workload(wl, seed);
      suite.requests += merged.size();

      PassthroughFeeder base_feeder(merged);
      const SimulationResult base = simulate(dram, map, base_feeder);
      ReorderFeeder mars_feeder(merged, reorder);
      const SimulationResult mars = simulate(dram, map, mars_feeder);

      for (const auto* sim : {&base, &mars}) {
        const auto rows = to_rows(sim->trace, dram);
        suite.trace_rows += rows.size();
        suite.violations += check_trace(rows, dram).size();
      }

      AbRun run;
      run.workload = preset;
      run.seed = seed;
      run.base = totals_of(base, dram);
      run.mars = totals_of(mars, dram);
      suite.runs.push_back(run);
    }
  }
  suite.elapsed = seconds_since(start);
  return suite;
}

void criterion_ab_gains(const AbSuite& suite) {
  bool every_run_no_worse = true;
  std::string worst;
  AbTotals pooled_base, pooled_mars;
  std::map<std::string, std::pair<AbTotals, AbTotals>> by_workload;
  for (const AbRun& run : suite.runs) {
    // cas_m/act_m >= cas_b/act_b, cross-multiplied to stay in integers.
    if (run.mars.cas * run.base.act < run.base.cas * run.mars.act) {
      every_run_no_worse = false;
      worst = fmt(" (regression: %s seed %llu)", run.workload.c_str(),
                  static_cast<unsigned long long>(run.seed));
    }
    auto& [b, m] = by_workload[run.workload];
    for (auto [sum, part] : {std::pair{&pooled_base, &run.base}, std::pair{&pooled_mars, &run.mars},
                             std::pair{&b, &run.base}, std::pair{&m, &run.mars}}) {
      sum->cas += part->cas;
      sum->act += part->act;
      sum->bytes += part->bytes;
      sum->cycles += part->cycles;
    }
  }

  const double pooled_gain = pooled_mars.cas_per_act() / pooled_base.cas_per_act() - 1.0;
  const double bandwidth_gain = pooled_mars.bandwidth() / pooled_base.bandwidth() - 1.0;
  const double wl1_ratio = by_workload["WL1"].second.cas_per_act() /
                           by_workload["WL1"].first.cas_per_act();
  const double wl5_ratio = by_workload["WL5"].second.cas_per_act() /
                           by_workload["WL5"].first.cas_per_act();

  const bool pass = every_run_no_worse && pooled_gain >= kPooledCasPerActGainFloor &&
                    bandwidth_gain >= kPooledBandwidthGainFloor &&
                    wl1_ratio >= kPerWorkloadCasPerActRatioFloor &&
                    wl5_ratio >= kPerWorkloadCasPerActRatioFloor;
  report(2, "reorder gains across WL1-WL5 x 3 seeds", pass,
         fmt("cas/act %.2f -> %.2f (+%.0f%%, floor +%.0f%%), bandwidth +%.1f%% (floor +%.0f%%), "
             "WL1 %.1fx, WL5 %.1fx (floor %.1fx), every run no worse (%d)%s",
             pooled_base.cas_per_act(), pooled_mars.cas_per_act(), pooled_gain * 100.0,
             kPooledCasPerActGainFloor * 100.0, bandwidth_gain * 100.0,
             kPooledBandwidthGainFloor * 100.0, wl1_ratio, wl5_ratio,
             kPerWorkloadCasPerActRatioFloor, every_run_no_worse ? 1 : 0, worst.c_str()));
}

// ---- ideal grouping oracle -------------------------------------------------

void criterion_grouping_oracle() {
  bool pass = true;
  std::string detail = "buffer >= stream: output equals stable group-by-page";
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint64_t> page_pick(0, 255);
    std::vector<MemoryRequest> input(10000);
    for (std::size_t i = 0; i < input.size(); ++i) input[i] = page_request(i, page_pick(rng));

    ReorderConfig cfg;
    cfg.request_q = static_cast<std::uint32_t>(input.size());
    cfg.sets = 512;  // distinct pages never share a set
    cfg.ways = 2;
    ReorderBuffer rb(cfg);
    const std::size_t n = input.size();
    const auto run = run_reorder(
        rb, input, [n](std::uint64_t tick) { return tick >= n ? 1u : 0u; });

    if (!run.completed || run.output != group_by_page(input)) {
      pass = false;
      detail = fmt("mismatch at seed %llu", static_cast<unsigned long long>(seed));
      break;
    }
  }
  report(3, "ideal grouping equals the group-by-page oracle", pass,
         detail + " on 3 seeds x 10000 requests");
}

// ---- conservation and ordering fuzz ----------------------------------------

void criterion_conservation_fuzz() {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
  std::uniform_int_distribution<std::uint64_t> page_pick(0, 4095);
  std::uniform_int_distribution<std::uint32_t> credit_pick(0, 3);

  const std::size_t n = 1000000;
  std::vector<MemoryRequest> input(n);
  for (std::size_t i = 0; i < n; ++i) input[i] = page_request(i, page_pick(rng));

  std::vector<std::uint32_t> credit_tape(1 << 16);
  for (auto& c : credit_tape) c = credit_pick(rng);

  ReorderConfig cfg;
  cfg.request_q = 512;
  cfg.sets = 64;
  cfg.ways = 2;
  cfg.drain_cap = 8;
  ReorderBuffer rb(cfg);
  const auto run = run_reorder(rb, input, [&credit_tape](std::uint64_t t) {
    return credit_tape[t & (credit_tape.size() - 1)];
  });
  rb.check_invariants();

  std::uint64_t dropped_or_duplicated = 0;
  std::vector<std::uint8_t> seen(n, 0);
  for (const auto& r : run.output) {
    if (r.seq >= n || seen[r.seq]++) ++dropped_or_duplicated;
  }
  if (run.output.size() != n) dropped_or_duplicated += n - std::min<std::size_t>(n, run.output.size());

  std::uint64_t order_breaks = 0;
  std::map<std::uint64_t, std::uint64_t> last_seq;
  for (const auto& r : run.output) {
    auto [it, fresh] = last_seq.try_emplace(r.page().value, r.seq);
    if (!fresh) {
      if (r.seq <= it->second) ++order_breaks;
      it->second = r.seq;
    }
  }

  const bool pass = run.completed && dropped_or_duplicated == 0 && order_breaks == 0;
  report(4, "conservation and per-page order under random stalls", pass,
         fmt("%zu requests, drain_cap 8: %llu lost/duplicated, %llu per-page order breaks "
             "(tolerance 0)",
             n, static_cast<unsigned long long>(dropped_or_duplicated),
             static_cast<unsigned long long>(order_breaks)));
}

// ---- protocol legality -------------------------------------------------------

void criterion_protocol(const AbSuite& suite) {
  report(5, "command traces obey the DRAM protocol", suite.violations == 0,
         fmt("%llu commands from %zu simulations checked, %llu violations (tolerance 0)",
             static_cast<unsigned long long>(suite.trace_rows), suite.runs.size() * 2,
             static_cast<unsigned long long>(suite.violations)));
}

// ---- degenerate equivalence --------------------------------------------------

std::string trace_text(const SimulationResult& sim, const DramConfig& cfg) {
  std::ostringstream os;
  write_command_trace(os, sim.trace, cfg);
  return os.str();
}

void criterion_degenerate_equivalence() {
  const DramConfig dram;
  const MemoryMap map = make_page_contiguous_map(dram.map_dimensions());
  ReorderConfig one_slot;
  one_slot.request_q = 1;

  WorkloadScale scale;  // reduced: the property is scale-independent
  scale.pages_per_source = 4;
  scale.requests_per_page = 16;

  bool pass = true;
  std::string failed;
  for (const std::string& preset : kPresets) {
    const auto merged = generate_workload(workload_preset(preset, scale), 1);
    PassthroughFeeder base_feeder(merged);
    const auto base = simulate(dram, map, base_feeder);
    ReorderFeeder mars_feeder(merged, one_slot);
    const auto mars = simulate(dram, map, mars_feeder);
    if (trace_text(base, dram) != trace_text(mars, dram)) {
      pass = false;
      failed = " (differs on " + preset + ")";
    }
  }
  report(6, "one-slot buffer reproduces the baseline trace", pass,
         "byte-identical command traces across WL1-WL5" + failed);
}

// ---- determinism ---------------------------------------------------------------

std::map<std::string, std::string> collect_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream is(entry.path(), std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    files[fs::relative(entry.path(), root).string()] = os.str();
  }
  return files;
}

void criterion_determinism() {
  const ExperimentConfig cfg = load_config_string(R"({
    "workload": {"preset": "WL1", "pages_per_source": 4, "requests_per_page": 16},
    "locality": {"windows": [64, 256, 1024]},
    "seed": 5
  })");

  const fs::path root =
      fs::temp_directory_path() / ("mars_accept_det_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const fs::path root_a = root / "a";
  const fs::path root_b = root / "b";
  fs::create_directories(root_a);
  fs::create_directories(root_b);

  bool pass = false;
  std::string detail;
  try {
    run_experiment(cfg, root_a.string(), true);
    run_experiment(cfg, root_b.string(), true);
    const auto tree_a = collect_tree(root_a);
    const auto tree_b = collect_tree(root_b);
    pass = !tree_a.empty() && tree_a == tree_b;
    detail = fmt("%zu files per run compared byte-for-byte, including CSVs and traces",
                 tree_a.size());
    if (!pass && tree_a.size() == tree_b.size()) {
      for (const auto& [name, content] : tree_a) {
        auto it = tree_b.find(name);
        if (it == tree_b.end() || it->second != content) {
          detail += " (first difference: " + name + ")";
          break;
        }
      }
    }
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  fs::remove_all(root);
  report(7, "repeated runs are byte-identical", pass, detail);
}

// ---- performance -----------------------------------------------------------------

void criterion_performance(const AbSuite& suite) {
  report(8, "full A/B suite fits the time budget", suite.elapsed < kAbSuiteBudgetSeconds,
         fmt("%zu simulations over %llu requests in %.1fs (budget %.0fs)", suite.runs.size() * 2,
             static_cast<unsigned long long>(suite.requests), suite.elapsed,
             kAbSuiteBudgetSeconds));
}

}  // namespace

int main() {
  criterion_locality_trend();
  const AbSuite suite = run_ab_suite();
  criterion_ab_gains(suite);
  criterion_grouping_oracle();
  criterion_conservation_fuzz();
  criterion_protocol(suite);
  criterion_degenerate_equivalence();
  criterion_determinism();
  criterion_performance(suite);

  if (g_failures == 0) {
    std::printf("all 8 criteria passed\n");
  } else {
    std::printf("%d of 8 criteria failed\n", g_failures);
  }
  return g_failures;
}
