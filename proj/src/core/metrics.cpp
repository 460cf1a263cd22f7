#include "core/metrics.hpp"

#include <cstdio>
#include <ostream>
#include <unordered_set>

#include "core/errors.hpp"

namespace mars {

std::vector<double> window_locality(const std::vector<std::uint64_t>& pages,
                                    std::uint64_t window) {
  if (window == 0) throw ConfigError("locality window must be positive");
  std::vector<double> values;
  std::unordered_set<std::uint64_t> distinct;
  for (std::size_t start = 0; start < pages.size(); start += window) {
    std::size_t len = std::min<std::size_t>(window, pages.size() - start);
    distinct.clear();
    for (std::size_t i = start; i < start + len; ++i) distinct.insert(pages[i]);
    values.push_back(static_cast<double>(len) / static_cast<double>(distinct.size()));
  }
  return values;
}

double mean_window_locality(const std::vector<std::uint64_t>& pages, std::uint64_t window) {
  if (pages.empty()) return 0.0;
  std::vector<double> values = window_locality(pages, window);
  double weighted = 0.0;
  for (std::size_t w = 0; w < values.size(); ++w) {
    std::size_t start = w * window;
    std::size_t len = std::min<std::size_t>(window, pages.size() - start);
    weighted += values[w] * static_cast<double>(len);
  }
  return weighted / static_cast<double>(pages.size());
}

std::vector<std::uint64_t> pages_of(const std::vector<MemoryRequest>& stream,
                                    unsigned page_offset_bits) {
  std::vector<std::uint64_t> pages;
  pages.reserve(stream.size());
  for (const MemoryRequest& req : stream) pages.push_back(req.page(page_offset_bits).value);
  return pages;
}

double stream_locality(const std::vector<MemoryRequest>& stream, std::uint64_t window,
                       unsigned page_offset_bits) {
  return mean_window_locality(pages_of(stream, page_offset_bits), window);
}

double multi_stream_locality(const std::vector<const std::vector<MemoryRequest>*>& streams,
                             std::uint64_t window, unsigned page_offset_bits) {
  double weighted = 0.0;
  std::uint64_t total = 0;
  for (const auto* stream : streams) {
    if (stream->empty()) continue;
    weighted += stream_locality(*stream, window, page_offset_bits) *
                static_cast<double>(stream->size());
    total += stream->size();
  }
  return total == 0 ? 0.0 : weighted / static_cast<double>(total);
}

ChannelMetrics RunMetrics::aggregate() const {
  ChannelMetrics agg;
  for (const ChannelMetrics& ch : channels) {
    agg.acts += ch.acts;
    agg.reads += ch.reads;
    agg.writes += ch.writes;
    agg.pres += ch.pres;
    agg.data_busy_cycles += ch.data_busy_cycles;
  }
  return agg;
}

double RunMetrics::bandwidth() const {
  if (total_cycles == 0) return 0.0;
  return static_cast<double>(total_bytes()) / static_cast<double>(total_cycles);
}

double RunMetrics::channel_bandwidth(std::size_t channel) const {
  if (total_cycles == 0) return 0.0;
  return static_cast<double>(bytes_for_cas(channels.at(channel).cas())) /
         static_cast<double>(total_cycles);
}

double RunMetrics::channel_utilization(std::size_t channel) const {
  if (total_cycles == 0) return 0.0;
  return static_cast<double>(channels.at(channel).data_busy_cycles) /
         static_cast<double>(total_cycles);
}

double RunMetrics::bus_utilization() const {
  if (total_cycles == 0 || channels.empty()) return 0.0;
  return static_cast<double>(aggregate().data_busy_cycles) /
         (static_cast<double>(total_cycles) * static_cast<double>(channels.size()));
}

RunMetrics build_metrics(const std::string& variant, const std::string& config_key,
                         const SimulationResult& sim, const DramConfig& cfg) {
  RunMetrics m;
  m.variant = variant;
  m.config_key = config_key;
  m.requests = sim.request_count;
  m.total_cycles = sim.total_cycles;
  m.burst_length = cfg.burst_length;
  m.bus_bytes_per_beat = cfg.bus_bytes_per_beat;
  m.channels.reserve(sim.channels.size());
  for (const ChannelCounters& c : sim.channels) {
    ChannelMetrics ch;
    ch.acts = c.act_count;
    ch.reads = c.read_count;
    ch.writes = c.write_count;
    ch.pres = c.pre_count;
    ch.data_busy_cycles = c.data_busy_cycles;
    m.channels.push_back(ch);
  }
  return m;
}

ImprovementReport compare_runs(const RunMetrics& baseline, const RunMetrics& mars) {
  if (baseline.config_key != mars.config_key) {
    throw ConfigError("cannot compare runs from different configurations (config keys " +
                      baseline.config_key + " and " + mars.config_key + ")");
  }
  ImprovementReport rep;
  rep.config_key = baseline.config_key;
  ChannelMetrics base_agg = baseline.aggregate();
  ChannelMetrics mars_agg = mars.aggregate();
  rep.baseline_cas_per_act = base_agg.cas_per_act();
  rep.mars_cas_per_act = mars_agg.cas_per_act();
  rep.cas_per_act_gain = rep.baseline_cas_per_act == 0.0
                             ? 0.0
                             : rep.mars_cas_per_act / rep.baseline_cas_per_act - 1.0;
  rep.baseline_bandwidth = baseline.bandwidth();
  rep.mars_bandwidth = mars.bandwidth();
  rep.bandwidth_gain =
      rep.baseline_bandwidth == 0.0 ? 0.0 : rep.mars_bandwidth / rep.baseline_bandwidth - 1.0;
  rep.baseline_acts = base_agg.acts;
  rep.mars_acts = mars_agg.acts;
  rep.act_reduction = rep.baseline_acts == 0
                          ? 0.0
                          : 1.0 - static_cast<double>(rep.mars_acts) /
                                      static_cast<double>(rep.baseline_acts);
  rep.baseline_cycles = baseline.total_cycles;
  rep.mars_cycles = mars.total_cycles;
  rep.cycle_reduction = rep.baseline_cycles == 0
                            ? 0.0
                            : 1.0 - static_cast<double>(rep.mars_cycles) /
                                        static_cast<double>(rep.baseline_cycles);
  return rep;
}

double cas_per_act_from_trace(const std::vector<TraceRow>& rows) {
  std::uint64_t acts = 0;
  std::uint64_t cas = 0;
  for (const TraceRow& r : rows) {
    if (r.kind == CommandKind::ACT) ++acts;
    if (r.kind == CommandKind::RD || r.kind == CommandKind::WR) ++cas;
  }
  return acts == 0 ? 0.0 : static_cast<double>(cas) / static_cast<double>(acts);
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void write_metrics_csv(std::ostream& os, const std::vector<RunMetrics>& runs) {
  os << "variant,requests,total_cycles,act,rd,wr,pre,cas,cas_per_act,bytes,"
        "bandwidth_bytes_per_cycle,data_bus_utilization\n";
  for (const RunMetrics& m : runs) {
    ChannelMetrics agg = m.aggregate();
    os << m.variant << ',' << m.requests << ',' << m.total_cycles << ',' << agg.acts << ','
       << agg.reads << ',' << agg.writes << ',' << agg.pres << ',' << agg.cas() << ','
       << fixed6(agg.cas_per_act()) << ',' << m.total_bytes() << ',' << fixed6(m.bandwidth())
       << ',' << fixed6(m.bus_utilization()) << '\n';
  }
}

void write_channel_metrics_csv(std::ostream& os, const std::vector<RunMetrics>& runs) {
  os << "variant,channel,act,rd,wr,pre,cas,cas_per_act,bytes,bandwidth_bytes_per_cycle,"
        "data_bus_utilization\n";
  for (const RunMetrics& m : runs) {
    for (std::size_t ch = 0; ch < m.channels.size(); ++ch) {
      const ChannelMetrics& c = m.channels[ch];
      os << m.variant << ',' << ch << ',' << c.acts << ',' << c.reads << ',' << c.writes << ','
         << c.pres << ',' << c.cas() << ',' << fixed6(c.cas_per_act()) << ','
         << m.bytes_for_cas(c.cas()) << ',' << fixed6(m.channel_bandwidth(ch)) << ','
         << fixed6(m.channel_utilization(ch)) << '\n';
    }
  }
}

void write_locality_csv(std::ostream& os, const std::vector<RunMetrics>& runs) {
  os << "variant,tap,window,mean_locality\n";
  for (const RunMetrics& m : runs) {
    for (const auto& [tap, curve] : m.locality) {
      for (const LocalityPoint& pt : curve) {
        os << m.variant << ',' << tap << ',' << pt.window << ',' << fixed6(pt.value) << '\n';
      }
    }
  }
}

void write_improvement_csv(std::ostream& os, const ImprovementReport& rep) {
  os << "metric,baseline,mars,improvement\n";
  os << "cas_per_act," << fixed6(rep.baseline_cas_per_act) << ',' << fixed6(rep.mars_cas_per_act)
     << ',' << fixed6(rep.cas_per_act_gain) << '\n';
  os << "bandwidth_bytes_per_cycle," << fixed6(rep.baseline_bandwidth) << ','
     << fixed6(rep.mars_bandwidth) << ',' << fixed6(rep.bandwidth_gain) << '\n';
  os << "act_count," << rep.baseline_acts << ',' << rep.mars_acts << ','
     << fixed6(rep.act_reduction) << '\n';
  os << "total_cycles," << rep.baseline_cycles << ',' << rep.mars_cycles << ','
     << fixed6(rep.cycle_reduction) << '\n';
}

}  // namespace mars
