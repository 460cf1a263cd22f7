#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "core/dram.hpp"
#include "core/request.hpp"

namespace mars {

// Row-buffer locality of a stream: split into back-to-back windows of
// `window` requests (the tail window may be short) and score each window as
// requests / distinct pages. 1.0 means every request opened a new page.
std::vector<double> window_locality(const std::vector<std::uint64_t>& pages, std::uint64_t window);

// Mean of window_locality weighted by window length; 0.0 for an empty stream.
double mean_window_locality(const std::vector<std::uint64_t>& pages, std::uint64_t window);

std::vector<std::uint64_t> pages_of(const std::vector<MemoryRequest>& stream,
                                    unsigned page_offset_bits = kDefaultPageOffsetBits);

double stream_locality(const std::vector<MemoryRequest>& stream, std::uint64_t window,
                       unsigned page_offset_bits = kDefaultPageOffsetBits);

// Request-weighted mean across several streams, each windowed on its own.
double multi_stream_locality(const std::vector<const std::vector<MemoryRequest>*>& streams,
                             std::uint64_t window, unsigned page_offset_bits = kDefaultPageOffsetBits);

struct LocalityPoint {
  std::uint64_t window;
  double value;
};

struct ChannelMetrics {
  std::uint64_t acts = 0;
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t pres = 0;
  std::uint64_t data_busy_cycles = 0;

  std::uint64_t cas() const { return reads + writes; }
  double cas_per_act() const { return acts == 0 ? 0.0 : static_cast<double>(cas()) / acts; }
};

struct RunMetrics {
  std::string variant;     // "baseline" or "mars"
  std::string config_key;  // config digest; comparisons require equal keys
  std::uint64_t requests = 0;
  std::uint64_t total_cycles = 0;
  std::uint32_t burst_length = 8;
  std::uint32_t bus_bytes_per_beat = 2;
  std::vector<ChannelMetrics> channels;
  // tap name ("source", "merge", "mars") to locality curve over windows
  std::map<std::string, std::vector<LocalityPoint>> locality;

  ChannelMetrics aggregate() const;
  std::uint64_t bytes_for_cas(std::uint64_t cas) const {
    return cas * (burst_length / 2) * bus_bytes_per_beat * 2;
  }
  std::uint64_t total_bytes() const { return bytes_for_cas(aggregate().cas()); }
  double bandwidth() const;                                // bytes per cycle, all channels
  double channel_bandwidth(std::size_t channel) const;
  double channel_utilization(std::size_t channel) const;   // data bus busy fraction
  double bus_utilization() const;                          // mean over channels
};

RunMetrics build_metrics(const std::string& variant, const std::string& config_key,
                         const SimulationResult& sim, const DramConfig& cfg);

// Headline gains from the original MARS evaluation, kept beside measured
// numbers in reports for context.
constexpr double kReferenceBandwidthGain = 0.11;
constexpr double kReferenceCasPerActGain = 0.69;

struct ImprovementReport {
  std::string config_key;
  double baseline_cas_per_act = 0.0;
  double mars_cas_per_act = 0.0;
  double cas_per_act_gain = 0.0;  // ratio - 1
  double baseline_bandwidth = 0.0;
  double mars_bandwidth = 0.0;
  double bandwidth_gain = 0.0;  // ratio - 1
  std::uint64_t baseline_acts = 0;
  std::uint64_t mars_acts = 0;
  double act_reduction = 0.0;  // 1 - mars/baseline
  std::uint64_t baseline_cycles = 0;
  std::uint64_t mars_cycles = 0;
  double cycle_reduction = 0.0;  // 1 - mars/baseline
};

// Both runs must carry the same config_key, otherwise the comparison is
// between different experiments and throws ConfigError.
ImprovementReport compare_runs(const RunMetrics& baseline, const RunMetrics& mars);

// Cross-check of the counter path: CAS/ACT recomputed from a command trace.
double cas_per_act_from_trace(const std::vector<TraceRow>& rows);

// Fixed-point formatting keeps every emitted CSV byte-stable across runs.
std::string fixed6(double v);

void write_metrics_csv(std::ostream& os, const std::vector<RunMetrics>& runs);
void write_channel_metrics_csv(std::ostream& os, const std::vector<RunMetrics>& runs);
void write_locality_csv(std::ostream& os, const std::vector<RunMetrics>& runs);
void write_improvement_csv(std::ostream& os, const ImprovementReport& rep);

}  // namespace mars
